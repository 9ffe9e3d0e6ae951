#include "device.h"

void device_get(struct device *dev)
{
    dev->refs++;
}

void device_put(struct device *dev)
{
    dev->refs--;
}
