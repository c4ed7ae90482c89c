"""numba kernels for the exit search on CSR arrays.

These mirror ``superbubble.find_exit`` step for step; the Python version is
the readable one and the two are cross-checked in the tests.
"""

import numpy as np
from numba import njit

TIP = -1
CYCLE = -2
EXHAUSTED = -3

# per-vertex mark = run << 2 | state; a mark from an older run reads as unlabeled
_SEEN = 1
_PUSHED = 2      # seen and already in S
_VISITED = 3

@njit(cache=True, nogil=True, inline="always")
def _heap_push(heap, size, x):
    i = size
    heap[i] = x
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] <= x:
            break
        heap[i] = heap[parent]
        i = parent
    heap[i] = x
    return size + 1


@njit(cache=True, nogil=True, inline="always")
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    if size > 0:
        x = heap[size]
        i = 0
        while True:
            c = 2 * i + 1
            if c >= size:
                break
            if c + 1 < size and heap[c + 1] < heap[c]:
                c += 1
            if heap[c] >= x:
                break
            heap[i] = heap[c]
            i = c
        heap[i] = x
    return top, size


@njit(cache=True, nogil=True)
def find_exit(out_ptr, out_nbr, in_ptr, in_nbr, s, run, mark, heap, visited):
    """Return ``(t_or_code, n_visited)``; visited vertices land in ``visited``.

    ``mark[v] >> 2 == run`` means ``v`` is labeled in this run, and the low two
    bits say how.  One array keeps each check to a single cache line.
    """
    base = run << 2
    size = _heap_push(heap, 0, s)
    n_seen = 0
    n_visited = 0
    while size > 0:
        v, size = _heap_pop(heap, size)
        if v != s:
            n_seen -= 1     # everything popped after s was seen and pushed
        mark[v] = base | _VISITED
        visited[n_visited] = v
        n_visited += 1
        lo = out_ptr[v]
        hi = out_ptr[v + 1]
        if lo == hi:
            return TIP, n_visited
        for j in range(lo, hi):
            u = out_nbr[j]
            if u == s or u == v:
                return CYCLE, n_visited
            m = mark[u]
            if m < base:
                mark[u] = base | _SEEN
                n_seen += 1
            elif m >= base | _PUSHED:
                continue
            ready = True
            for q in range(in_ptr[u], in_ptr[u + 1]):
                if mark[in_nbr[q]] != base | _VISITED:
                    ready = False
                    break
            if ready:
                mark[u] = base | _PUSHED
                size = _heap_push(heap, size, u)
        if size == 1 and n_seen == 1:
            t = heap[0]
            for j in range(out_ptr[t], out_ptr[t + 1]):
                if out_nbr[j] == s:
                    return CYCLE, n_visited
            return t, n_visited
    return EXHAUSTED, n_visited


@njit(cache=True, nogil=True)
def scan(out_ptr, out_nbr, in_ptr, in_nbr, lo, hi, exits, visits):
    """Run the exit search from every entrance in ``[lo, hi)``."""
    n = out_ptr.shape[0] - 1
    mark = np.zeros(n, dtype=np.int64)
    heap = np.empty(n + 1, dtype=np.int64)
    visited = np.empty(n + 1, dtype=np.int64)
    run = 0
    for s in range(lo, hi):
        run += 1
        t, nv = find_exit(out_ptr, out_nbr, in_ptr, in_nbr, s, run,
                          mark, heap, visited)
        exits[s] = t
        visits[s] = nv


@njit(cache=True, nogil=True)
def collect(out_ptr, out_nbr, in_ptr, in_nbr, entrances, total):
    """Re-run successful searches and return their interiors, CSR-packed.

    A successful search visits ``s`` first and never visits the exit, so the
    interior is the visit list minus its first entry.
    """
    n = out_ptr.shape[0] - 1
    mark = np.zeros(n, dtype=np.int64)
    heap = np.empty(n + 1, dtype=np.int64)
    visited = np.empty(n + 1, dtype=np.int64)
    flat = np.empty(total, dtype=np.int64)
    offsets = np.zeros(entrances.shape[0] + 1, dtype=np.int64)
    pos = 0
    for i in range(entrances.shape[0]):
        t, nv = find_exit(out_ptr, out_nbr, in_ptr, in_nbr, entrances[i], i + 1,
                          mark, heap, visited)
        flat[pos:pos + nv - 1] = visited[1:nv]
        pos += nv - 1
        offsets[i + 1] = pos
    return flat, offsets
