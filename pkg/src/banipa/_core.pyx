# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: codepoint run classification and word edit alignment."""

from libc.stdlib cimport malloc, free

DEF BANGLA_LETTER = 0
DEF BANGLA_DIGIT = 1
DEF WHITESPACE = 2
DEF PUNCTUATION = 3
DEF FOREIGN_LETTER = 4
DEF OTHER_SYMBOL = 5


cdef inline bint _base_punct(Py_UCS4 c):
    if c < 0x80:
        return (0x21 <= c <= 0x2F) or (0x3A <= c <= 0x40) or (0x5B <= c <= 0x60) or (0x7B <= c <= 0x7E)
    return c == 0x0964 or c == 0x0965 or c == 0x2018 or c == 0x2019 \
        or c == 0x201C or c == 0x201D or c == 0x2013 or c == 0x2014


cdef inline int _classify(Py_UCS4 c, frozenset extra):
    if 0x09E6 <= c <= 0x09EF:
        return BANGLA_DIGIT
    if 0x0980 <= c <= 0x09FF:
        return BANGLA_LETTER
    if c.isspace():
        return WHITESPACE
    if _base_punct(c):
        return PUNCTUATION
    if extra and c in extra:
        return PUNCTUATION
    if c.isalpha() or 0x30 <= c <= 0x39:
        return FOREIGN_LETTER
    return OTHER_SYMBOL


def classify_code(str ch, frozenset extra=frozenset()):
    return _classify(ch[0], extra)


def char_runs(str text, frozenset extra=frozenset()):
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, j
    cdef int cls
    runs = []
    while i < n:
        cls = _classify(text[i], extra)
        j = i + 1
        if cls != PUNCTUATION:
            while j < n and _classify(text[j], extra) == cls:
                j += 1
        runs.append((cls, i, j))
        i = j
    return runs


def edit_ops(ref, hyp):
    cdef Py_ssize_t n = len(ref), m = len(hyp)
    cdef Py_ssize_t w = m + 1
    cdef Py_ssize_t i, j
    cdef long *r = <long *> malloc(n * sizeof(long) + 1)
    cdef long *h = <long *> malloc(m * sizeof(long) + 1)
    cdef int *dp = <int *> malloc((n + 1) * w * sizeof(int))
    cdef int diag, up, left, best, cost
    cdef int s = 0, d = 0, ins = 0
    if r == NULL or h == NULL or dp == NULL:
        free(r); free(h); free(dp)
        raise MemoryError()
    try:
        for i in range(n):
            r[i] = ref[i]
        for j in range(m):
            h[j] = hyp[j]
        for i in range(n + 1):
            dp[i * w] = <int> i
        for j in range(m + 1):
            dp[j] = <int> j
        for i in range(1, n + 1):
            for j in range(1, m + 1):
                diag = dp[(i - 1) * w + j - 1] + (r[i - 1] != h[j - 1])
                up = dp[(i - 1) * w + j] + 1
                left = dp[i * w + j - 1] + 1
                best = diag
                if up < best:
                    best = up
                if left < best:
                    best = left
                dp[i * w + j] = best
        i = n
        j = m
        while i > 0 or j > 0:
            if i > 0 and j > 0:
                cost = r[i - 1] != h[j - 1]
                if dp[i * w + j] == dp[(i - 1) * w + j - 1] + cost:
                    s += cost
                    i -= 1
                    j -= 1
                    continue
            if i > 0 and dp[i * w + j] == dp[(i - 1) * w + j] + 1:
                d += 1
                i -= 1
            else:
                ins += 1
                j -= 1
    finally:
        free(r)
        free(h)
        free(dp)
    return s, d, ins
