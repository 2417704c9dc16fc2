"""Pure Python segmentation kernel.

Fallback twin of the compiled ``_seg_core`` extension: same inputs, same
loop structure, same tie-breaking, bit-identical outputs. Keep the two in
sync when touching either.
"""

NEG_INF = float("-inf")


def best_segmentation(ids, unigram_scores, oov_score,
                      trie_offsets, trie_tokens, trie_children, node_scores,
                      max_len):
    """Maximum-score segmentation of one encoded sentence.

    ids: token ids (-1 for out-of-vocabulary), length n.
    unigram_scores: log score of each token id as a single-token segment.
    oov_score: log score of an out-of-vocabulary single-token segment.
    trie_*: CSR trie over id sequences; node_scores[k] is the log score of
        the multi-token segment ending at node k (-inf when none).
    Returns (total log score, boundary positions [0, ..., n]).
    """
    n = len(ids)
    dp = [NEG_INF] * (n + 1)
    back = [0] * (n + 1)
    dp[0] = 0.0
    for i in range(n):
        d = dp[i]
        tid = ids[i]
        s = d + (unigram_scores[tid] if tid >= 0 else oov_score)
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
                if sc != NEG_INF:
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
