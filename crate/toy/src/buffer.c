#include <assert.h>
#include <stdlib.h>

#include "buffer.h"

int buf_init(IntBuf *b, size_t cap)
{
    b->data = malloc(cap * sizeof(int));
    if (b->data == NULL)
        return -1;
    b->len = 0;
    b->cap = cap;
    return 0;
}

static int buf_grow(IntBuf *b)
{
    size_t cap = b->cap * 2;
    int *data = realloc(b->data, cap * sizeof(int));
    if (data == NULL)
        return -1;
    b->data = data;
    b->cap = cap;
    return 0;
}

int buf_push(IntBuf *b, int v)
{
    if (b->len == b->cap && buf_grow(b) != 0)
        return -1;
    b->data[b->len] = v;
    b->len++;
    assert(b->len <= b->cap);
    return 0;
}

int buf_get(const IntBuf *b, size_t idx, int *out)
{
    if (idx >= b->len)
        return -1;
    *out = *(b->data + idx);
    return 0;
}

int buf_sum(const IntBuf *b)
{
    int total = 0;
    const int *p = b->data;
    const int *end = b->data + b->len;
    while (p < end) {
        total += *p;
        p++;
    }
    return total;
}

void buf_free(IntBuf *b)
{
    free(b->data);
    b->data = NULL;
    b->len = 0;
    b->cap = 0;
}
