#include <stdlib.h>
#include "list.h"

void list_push(struct list *l, void *item)
{
    struct node *n = malloc(sizeof(*n));
    n->item = item;
    n->next = l->head;
    l->head = n;
    l->size++;
}

void *list_pop(struct list *l)
{
    struct node *n = l->head;
    void *item = n->item;
    l->head = n->next;
    l->size--;
    free(n);
    return item;
}
