#include <string.h>
#include "user.h"

void set_user_name(struct user *u, const char *value)
{
    strncpy(u->name, value, FIELD_MAX - 1);
    u->dirty = 1;
}

void set_user_home(struct user *u, const char *value)
{
    strncpy(u->home, value, FIELD_MAX - 1);
    u->dirty = 1;
}

void set_user_shell(struct user *u, const char *value)
{
    strncpy(u->shell, value, FIELD_MAX - 1);
    u->dirty = 1;
}
