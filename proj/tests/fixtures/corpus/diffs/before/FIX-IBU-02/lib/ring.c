#include "ring.h"

int ring_put(struct ring *r, int value)
{
    if (r->count > r->cap)
        return -1;
    r->slots[r->tail] = value;
    r->tail = (r->tail + 1) % r->cap;
    r->count++;
    return 0;
}
