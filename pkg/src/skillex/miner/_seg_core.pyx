# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled segmentation kernel.

Twin of ``_seg_py.best_segmentation``: identical loop structure and
tie-breaking, so both produce bit-identical results. Keep in sync.
"""

from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY


def best_segmentation(int[::1] ids, double[::1] unigram_scores, double oov_score,
                      int[::1] trie_offsets, int[::1] trie_tokens,
                      int[::1] trie_children, double[::1] node_scores,
                      int max_len):
    """Maximum-score segmentation of one encoded sentence.

    Same contract as the pure Python fallback; see ``_seg_py``.
    """
    cdef int n = ids.shape[0]
    cdef double *dp = <double *> malloc((n + 1) * sizeof(double))
    cdef int *back = <int *> malloc((n + 1) * sizeof(int))
    if dp == NULL or back == NULL:
        if dp != NULL:
            free(dp)
        if back != NULL:
            free(back)
        raise MemoryError()
    cdef int i, j, jmax, tid, node, lo, hi, mid, t, pos
    cdef double d, s, sc
    try:
        for i in range(n + 1):
            dp[i] = -INFINITY
            back[i] = 0
        dp[0] = 0.0
        for i in range(n):
            d = dp[i]
            tid = ids[i]
            if tid >= 0:
                s = d + unigram_scores[tid]
            else:
                s = d + oov_score
            if s > dp[i + 1]:
                dp[i + 1] = s
                back[i + 1] = i
            node = 0
            jmax = i + max_len
            if jmax > n:
                jmax = n
            for j in range(i, jmax):
                tid = ids[j]
                if tid < 0:
                    break
                lo = trie_offsets[node]
                hi = trie_offsets[node + 1]
                node = -1
                while lo < hi:
                    mid = (lo + hi) // 2
                    t = trie_tokens[mid]
                    if t == tid:
                        node = trie_children[mid]
                        break
                    if t < tid:
                        lo = mid + 1
                    else:
                        hi = mid
                if node < 0:
                    break
                if j > i:
                    sc = node_scores[node]
                    if sc != -INFINITY:
                        s = d + sc
                        if s > dp[j + 1]:
                            dp[j + 1] = s
                            back[j + 1] = i
        bounds = [n]
        pos = n
        while pos > 0:
            pos = back[pos]
            bounds.append(pos)
        bounds.reverse()
        return dp[n], bounds
    finally:
        free(dp)
        free(back)
