#include <stdlib.h>
#include <string.h>

#include "buffer.h"

static size_t hash_key(const char *key, size_t size)
{
    size_t h = 5381;
    while (*key != '\0') {
        h = ((h << 5) + h) ^ (unsigned char)*key;
        key++;
    }
    return h % size;
}

int table_init(Table *t, size_t size)
{
    t->keys = calloc(size, sizeof(char *));
    t->values = calloc(size, sizeof(int));
    t->size = size;
    if (t->keys == NULL || t->values == NULL)
        return -1;
    return 0;
}

int table_put(Table *t, const char *key, int value)
{
    size_t slot = hash_key(key, t->size);
    size_t probes = 0;
    while (t->keys[slot] != NULL && strcmp(t->keys[slot], key) != 0) {
        slot = (slot + 1) % t->size;
        probes++;
        if (probes >= t->size)
            return -1;
    }
    if (t->keys[slot] == NULL)
        t->keys[slot] = strdup(key);
    t->values[slot] = value;
    return 0;
}

int table_get(const Table *t, const char *key, int *out)
{
    size_t slot = hash_key(key, t->size);
    size_t probes = 0;
    while (t->keys[slot] != NULL) {
        if (strcmp(t->keys[slot], key) == 0) {
            *out = t->values[slot];
            return 0;
        }
        slot = (slot + 1) % t->size;
        probes++;
        if (probes >= t->size)
            break;
    }
    return -1;
}

void table_free(Table *t)
{
    size_t i;
    for (i = 0; i < t->size; i++)
        free(t->keys[i]);
    free(t->keys);
    free(t->values);
}
