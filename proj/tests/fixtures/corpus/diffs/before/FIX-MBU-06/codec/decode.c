#include "frame.h"

int decode_frame(struct decoder *dec, struct frame *f)
{
    int ret = read_planes(dec, f->pixels, f->size);
    dec->frames++;
    return ret;
}
