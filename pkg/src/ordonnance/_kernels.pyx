# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled string kernels.

Same contracts as ordonnance._kernels_py; the row-DP longest-match search
below visits candidate matches in the same order as the fallback (ends in
``a`` ascending, then ends in ``b`` ascending, strict improvement only), so
both backends produce bit-identical results.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset


cdef struct Frag:
    int alo
    int ahi
    int blo
    int bhi


def similarity(str a, str b):
    """Longest-contiguous-match similarity ratio in [0, 1]."""
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    cdef str t
    cdef Py_ssize_t tn
    if la == 0 and lb == 0:
        return 1.0
    if la == 0 or lb == 0:
        return 0.0
    # canonical argument order keeps the result symmetric (see _kernels_py)
    if la > lb or (la == lb and a > b):
        t = a; a = b; b = t
        tn = la; la = lb; lb = tn

    cdef int* ca = <int*> malloc(la * sizeof(int))
    cdef int* cb = <int*> malloc(lb * sizeof(int))
    cdef int* prev = <int*> malloc((lb + 1) * sizeof(int))
    cdef int* cur = <int*> malloc((lb + 1) * sizeof(int))
    # each processed fragment pushes at most two children; the live stack
    # never exceeds the number of distinct match boundaries + 1
    cdef Py_ssize_t cap = (la if la < lb else lb) + 2
    cdef Frag* stack = <Frag*> malloc(cap * sizeof(Frag))
    if ca == NULL or cb == NULL or prev == NULL or cur == NULL or stack == NULL:
        free(ca); free(cb); free(prev); free(cur); free(stack)
        raise MemoryError()

    cdef Py_ssize_t i, j
    for i in range(la):
        ca[i] = <int> ord(a[i])
    for j in range(lb):
        cb[j] = <int> ord(b[j])

    cdef Py_ssize_t top = 0
    stack[top].alo = 0
    stack[top].ahi = <int> la
    stack[top].blo = 0
    stack[top].bhi = <int> lb
    top += 1

    cdef long matched = 0
    cdef int alo, ahi, blo, bhi, besti, bestj, bestk, k
    cdef int* tmp

    while top > 0:
        top -= 1
        alo = stack[top].alo
        ahi = stack[top].ahi
        blo = stack[top].blo
        bhi = stack[top].bhi

        besti = alo
        bestj = blo
        bestk = 0
        memset(prev, 0, (lb + 1) * sizeof(int))
        for i in range(alo, ahi):
            memset(cur, 0, (lb + 1) * sizeof(int))
            for j in range(blo, bhi):
                if ca[i] == cb[j]:
                    k = prev[j] + 1
                    cur[j + 1] = k
                    if k > bestk:
                        bestk = k
                        besti = <int> i - k + 1
                        bestj = <int> j - k + 1
            tmp = prev
            prev = cur
            cur = tmp

        if bestk > 0:
            matched += bestk
            if alo < besti and blo < bestj:
                stack[top].alo = alo
                stack[top].ahi = besti
                stack[top].blo = blo
                stack[top].bhi = bestj
                top += 1
            if besti + bestk < ahi and bestj + bestk < bhi:
                stack[top].alo = besti + bestk
                stack[top].ahi = ahi
                stack[top].blo = bestj + bestk
                stack[top].bhi = bhi
                top += 1

    free(ca)
    free(cb)
    free(prev)
    free(cur)
    free(stack)
    return 2.0 * matched / (la + lb)


def levenshtein_leq1(str a, str b):
    """True iff the edit distance between a and b is at most 1."""
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    cdef str t
    cdef Py_ssize_t tn
    if la > lb:
        t = a; a = b; b = t
        tn = la; la = lb; lb = tn
    if lb - la > 1:
        return False
    cdef Py_ssize_t i
    cdef bint seen = False
    if la == lb:
        for i in range(la):
            if a[i] != b[i]:
                if seen:
                    return False
                seen = True
        return True
    i = 0
    while i < la and a[i] == b[i]:
        i += 1
    return a[i:] == b[i + 1:]
