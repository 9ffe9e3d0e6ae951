#include "config.h"

int config_init(struct config *cfg)
{
    memset(cfg, 0, sizeof(*cfg));
    cfg->mode = MODE_DEFAULT;
    cfg->flags = 0;
    return 0;
}

void config_set_mode(struct config *cfg, int mode)
{
    cfg->mode = mode & MODE_MASK;
}

int config_apply(struct config *cfg, struct target *t)
{
    if (!cfg->valid)
        return -EINVAL;
    t->mode = cfg->mode;
    t->flags = cfg->flags;
    return target_commit(t);
}
