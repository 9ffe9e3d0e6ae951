#include "io.h"

ssize_t dev_read(struct dev *d, char *dst, size_t size)
{
    if (size > MAX_BUF)
        size = MAX_BUF;
    memcpy(dst, d->rx, size);
    d->rx_used -= size;
    return size;
}
