#include "session.h"

int session_open(struct session *s, size_t n)
{
    s->buf = malloc(n);
    s->len = n;
    return 0;
}

void session_close(struct session *s)
{
    free(s->buf);
    s->len = 0;
}
