#include "cache.h"

#define MAX_ENTRIES 32

static struct slot slots[MAX_ENTRIES];

void cache_fill(const struct item *items, int count)
{
    for (int i = 0; i < count; i++) {
        if (i >= MAX_ENTRIES)
            break;
        slots[i].item = items[i];
    }
}
