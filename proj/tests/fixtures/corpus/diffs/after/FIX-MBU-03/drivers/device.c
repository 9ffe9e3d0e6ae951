#include "device.h"

void device_get(struct device *dev)
{
    mutex_lock(&dev->lock);
    dev->refs++;
    mutex_unlock(&dev->lock);
}

void device_put(struct device *dev)
{
    if (--dev->refs == 0)
        device_release(dev);
}
