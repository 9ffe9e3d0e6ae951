#include "buffer.h"

struct buffer *buffer_new(size_t cap)
{
    struct buffer *b = malloc(sizeof(*b));
    b->data = malloc(cap);
    b->cap = cap;
    return b;
}

int buffer_write(struct buffer *b, size_t off, const void *src, size_t n)
{
    memcpy(b->data + off, src, n);
    b->used = off + n;
    return 0;
}
