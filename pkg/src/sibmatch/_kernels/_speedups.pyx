# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled permutation kernels.

Semantics must match ``sibmatch._kernels._pyimpl`` exactly: the backends
are interchangeable and are compared item-for-item in the test suite.
"""

from libc.stdlib cimport free, malloc


def decode_insertions(displacements):
    """Materialise a permutation from per-item displacement counts.

    Equivalent to inserting item i at position ``i - displacements[i]``
    of the growing list.  Implemented backwards: item i (processed from
    last to first) takes the ``(i - displacements[i] + 1)``-th free slot,
    located with a Fenwick tree in O(log n), so the whole decode is
    O(n log n) instead of the O(n^2) shifting of the list-insert form.
    """
    cdef Py_ssize_t n = len(displacements)
    cdef list out = [0] * n
    if n == 0:
        return out

    cdef long *disp = <long *> malloc(n * sizeof(long))
    cdef long *tree = <long *> malloc((n + 1) * sizeof(long))
    if disp == NULL or tree == NULL:
        if disp != NULL:
            free(disp)
        if tree != NULL:
            free(tree)
        raise MemoryError()

    cdef Py_ssize_t i
    cdef long v
    try:
        for i in range(n):
            v = displacements[i]
            if v < 0 or v > i:
                raise ValueError(
                    f"displacement {v} out of range at index {i}"
                )
            disp[i] = v

        # tree[k] counts free slots; initially every slot is free.
        for i in range(n + 1):
            tree[i] = 0
        for i in range(1, n + 1):
            tree[i] += 1
            if i + (i & -i) <= n:
                tree[i + (i & -i)] += tree[i]

        cdef_find_and_fill(tree, disp, out, n)
    finally:
        free(disp)
        free(tree)
    return out


cdef void cdef_find_and_fill(long *tree, long *disp, list out, Py_ssize_t n):
    cdef Py_ssize_t i, pos, step
    cdef long k, delta
    cdef Py_ssize_t log2n = 0
    while (1 << (log2n + 1)) <= n:
        log2n += 1
    for i in range(n - 1, -1, -1):
        # item i goes to the (i - disp[i] + 1)-th free slot from the left
        k = i - disp[i] + 1
        pos = 0
        step = 1 << log2n
        while step > 0:
            if pos + step <= n and tree[pos + step] < k:
                pos += step
                k -= tree[pos]
            step >>= 1
        # pos is now the 0-based slot index; mark it occupied
        out[pos] = i
        pos += 1
        while pos <= n:
            tree[pos] -= 1
            pos += pos & -pos


def count_inversions(seq):
    """Number of pairs (i, j) with i < j and seq[i] > seq[j]."""
    cdef Py_ssize_t n = len(seq)
    if n < 2:
        return 0
    cdef long *a = <long *> malloc(n * sizeof(long))
    cdef long *buf = <long *> malloc(n * sizeof(long))
    if a == NULL or buf == NULL:
        if a != NULL:
            free(a)
        if buf != NULL:
            free(buf)
        raise MemoryError()
    cdef Py_ssize_t i, j, k, lo, mid, hi, width
    cdef unsigned long long inversions = 0
    try:
        for i in range(n):
            a[i] = seq[i]
        width = 1
        while width < n:
            lo = 0
            while lo < n - width:
                mid = lo + width
                hi = lo + 2 * width
                if hi > n:
                    hi = n
                i = lo
                j = mid
                k = lo
                while i < mid and j < hi:
                    if a[i] <= a[j]:
                        buf[k] = a[i]
                        i += 1
                    else:
                        buf[k] = a[j]
                        j += 1
                        inversions += mid - i
                    k += 1
                while i < mid:
                    buf[k] = a[i]
                    i += 1
                    k += 1
                while j < hi:
                    buf[k] = a[j]
                    j += 1
                    k += 1
                for k in range(lo, hi):
                    a[k] = buf[k]
                lo += 2 * width
            width *= 2
    finally:
        free(a)
        free(buf)
    return inversions
