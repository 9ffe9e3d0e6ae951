#include <string.h>
#include "user.h"

void set_user_name(struct user *u, const char *value)
{
    strcpy(u->name, value);
    u->dirty = 1;
}

void set_user_home(struct user *u, const char *value)
{
    strcpy(u->home, value);
    u->dirty = 1;
}

void set_user_shell(struct user *u, const char *value)
{
    strcpy(u->shell, value);
    u->dirty = 1;
}
