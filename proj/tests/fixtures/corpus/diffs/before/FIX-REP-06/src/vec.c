#include "vec.h"

int vec_sum(const int *v, int n)
{
    int total = 0;
    for (int i = 0; i <= n; i++)
        total += v[i];
    return total;
}

int vec_max(const int *v, int n)
{
    int best = v[0];
    for (int i = 0; i <= n; i++)
        if (v[i] > best)
            best = v[i];
    return best;
}
