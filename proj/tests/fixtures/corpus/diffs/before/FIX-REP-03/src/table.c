#include "table.h"

struct entry *table_get(struct table *t, unsigned idx)
{
    return &t->entries[idx];
}

const char *table_name(struct table *t, unsigned idx)
{
    return t->entries[idx].name;
}

int table_weight(struct table *t, unsigned idx)
{
    int w = t->entries[idx].weight;
    return w * t->scale;
}

void table_clear(struct table *t, unsigned idx)
{
    t->entries[idx].name = NULL;
    t->entries[idx].weight = 0;
}
