#include <string.h>

#include "buffer.h"

size_t str_copy(char *dst, const char *src, size_t cap)
{
    size_t i = 0;
    if (cap == 0)
        return 0;
    while (src[i] != '\0' && i + 1 < cap) {
        dst[i] = src[i];
        i++;
    }
    dst[i] = '\0';
    return i;
}

void str_reverse(char *s)
{
    char *lo = s;
    char *hi = s + strlen(s) - 1;
    while (lo < hi) {
        char tmp = *lo;
        *lo = *hi;
        *hi = tmp;
        lo++;
        hi--;
    }
}

int count_char(const char *s, char c)
{
    int n = 0;
    for (; *s != '\0'; s++) {
        if (*s == c)
            n++;
    }
    return n;
}

int is_palindrome(const char *s)
{
    size_t len = strlen(s);
    size_t i;
    for (i = 0; i < len / 2; i++) {
        if (s[i] != s[len - 1 - i])
            return 0;
    }
    return 1;
}
