#include "object.h"

void object_release(struct object *obj)
{
    list_del(&obj->node);
    stats_dec(obj->pool);
    kfree(obj);
}

void object_detach(struct object *obj)
{
    obj->pool->count--;
    obj->owner = NULL;
}
