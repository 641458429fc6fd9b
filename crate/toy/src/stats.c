#include "buffer.h"

int stats_mean(const int *xs, int n)
{
    int total = 0;
    int i;
    for (i = 0; i < n; i++)
        total += xs[i];
    return total / n;
}

int stats_max(const int *xs, int n)
{
    int best = xs[0];
    int i;
    for (i = 1; i < n; i++) {
        if (xs[i] > best)
            best = xs[i];
    }
    return best;
}

int stats_range(const int *xs, int n)
{
    int lo = xs[0];
    int hi = stats_max(xs, n);
    int i;
    for (i = 1; i < n; i++) {
        if (xs[i] < lo)
            lo = xs[i];
    }
    return hi - lo;
}

int parity_mask(const int *xs, int n)
{
    int mask = 0;
    int i;
    for (i = 0; i < n && i < 16; i++)
        mask |= (xs[i] & 1) << i;
    return mask;
}

int clamp(int v, int lo, int hi)
{
    int out = v;
    int below = v < lo;
    int above = v > hi;
    if (below && !above)
        out = lo;
    else if (above || below)
        out = hi;
    return out;
}
