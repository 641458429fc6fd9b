#ifndef TOY_BUFFER_H
#define TOY_BUFFER_H

#include <stddef.h>

typedef struct {
    int *data;
    size_t len;
    size_t cap;
} IntBuf;

typedef struct {
    char **keys;
    int *values;
    size_t size;
} Table;

int buf_init(IntBuf *b, size_t cap);
int buf_push(IntBuf *b, int v);
int buf_get(const IntBuf *b, size_t idx, int *out);
int buf_sum(const IntBuf *b);
void buf_free(IntBuf *b);

size_t str_copy(char *dst, const char *src, size_t cap);
void str_reverse(char *s);
int count_char(const char *s, char c);
int is_palindrome(const char *s);

int table_init(Table *t, size_t size);
int table_put(Table *t, const char *key, int value);
int table_get(const Table *t, const char *key, int *out);
void table_free(Table *t);

int stats_mean(const int *xs, int n);
int stats_max(const int *xs, int n);
int stats_range(const int *xs, int n);
int parity_mask(const int *xs, int n);
int clamp(int v, int lo, int hi);

#endif
