"""Quality-guided phrasal segmentation.

A sentence is partitioned into non-overlapping segments maximizing the sum
of log segment scores: a multi-token segment scores quality * popularity,
a single token scores its popularity (single tokens are always legal, which
keeps every sentence segmentable). The dynamic program runs in a compiled
kernel when the extension built, with a pure Python twin selected at import
time otherwise; set SKILLEX_PURE_KERNEL=1 to force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..corpus import Ngram, TokenizedSentence, popularity
from . import _seg_py

if os.environ.get("SKILLEX_PURE_KERNEL"):
    _impl = _seg_py
    KERNEL = "python"
else:
    try:
        from . import _seg_core as _impl  # type: ignore[no-redef]
        KERNEL = "compiled"
    except ImportError:
        _impl = _seg_py
        KERNEL = "python"

NEG_INF = float("-inf")

# Probability floor for single tokens never seen in the stats; keeps the
# objective finite on out-of-vocabulary input.
OOV_PROB = 1e-12


@dataclass
class SegmentationResult:
    sentence: TokenizedSentence
    segments: list[tuple[int, int]]
    score: float

    def segment_grams(self) -> list[Ngram]:
        words = [t.surface.lower() for t in self.sentence.tokens]
        return [tuple(words[a:b]) for a, b in self.segments]


class ScoreTable:
    """Per-corpus segment scores encoded for the kernels.

    Single-token scores live in a dense array indexed by token id;
    multi-token segment scores live in a CSR trie over id sequences.
    """

    def __init__(self, stats, quality_by_gram: dict[Ngram, float],
                 max_len: int, unigram_floor: float = 1.0,
                 pos_probs: dict[tuple, float] | None = None,
                 pos_floor: float = 1e-6):
        self.max_len = max_len
        self.pos_probs = pos_probs
        self.pos_floor = pos_floor
        vocab_words = sorted(g[0] for g in stats.ngram_counts if len(g) == 1)
        self.vocab = {w: i for i, w in enumerate(vocab_words)}
        scores = np.empty(len(vocab_words), dtype=np.float64)
        for w, i in self.vocab.items():
            scores[i] = math.log(popularity(stats, (w,)) * unigram_floor)
        self.unigram_scores = scores
        self.oov_score = math.log(OOV_PROB)
        # log score per multi-token gram; zero-scored grams are unusable
        entries = []
        for gram in sorted(g for g in quality_by_gram if len(g) >= 2):
            q = quality_by_gram[gram]
            s = q * popularity(stats, gram)
            if s > 0.0:
                ids = tuple(self.vocab[w] for w in gram)
                entries.append((ids, math.log(s)))
        self._build_trie(entries)
        self._log_scores = {gram: math.log(q * popularity(stats, gram))
                            for gram, q in quality_by_gram.items()
                            if len(gram) >= 2 and q * popularity(stats, gram) > 0}

    def _build_trie(self, entries):
        children: list[dict[int, int]] = [{}]
        scores = [NEG_INF]
        for ids, logscore in entries:
            node = 0
            for tid in ids:
                nxt = children[node].get(tid)
                if nxt is None:
                    nxt = len(children)
                    children[node][tid] = nxt
                    children.append({})
                    scores.append(NEG_INF)
                node = nxt
            scores[node] = logscore
        offsets = [0]
        tokens: list[int] = []
        child_nodes: list[int] = []
        for node_children in children:
            for tid in sorted(node_children):
                tokens.append(tid)
                child_nodes.append(node_children[tid])
            offsets.append(len(tokens))
        self.trie_offsets = np.asarray(offsets, dtype=np.int32)
        self.trie_tokens = np.asarray(tokens, dtype=np.int32)
        self.trie_children = np.asarray(child_nodes, dtype=np.int32)
        self.node_scores = np.asarray(scores, dtype=np.float64)

    @classmethod
    def from_quality_model(cls, model, stats, features_by_gram: dict,
                           max_len: int, **kwargs) -> "ScoreTable":
        quality = {gram: model.quality(feats)
                   for gram, feats in features_by_gram.items() if len(gram) >= 2}
        return cls(stats, quality, max_len, **kwargs)

    def encode(self, words: list[str]) -> np.ndarray:
        return np.array([self.vocab.get(w, -1) for w in words], dtype=np.int32)

    def span_logscore(self, words: tuple[str, ...]) -> float:
        """Log score of one candidate segment (used by the POS path and tests)."""
        if len(words) == 1:
            tid = self.vocab.get(words[0], -1)
            return self.unigram_scores[tid] if tid >= 0 else self.oov_score
        return self._log_scores.get(tuple(words), NEG_INF)


def segment_encoded(table: ScoreTable, ids: np.ndarray):
    """Run the selected kernel on an already encoded sentence."""
    return _impl.best_segmentation(
        ids, table.unigram_scores, table.oov_score,
        table.trie_offsets, table.trie_tokens, table.trie_children,
        table.node_scores, table.max_len)


def _segment_with_tags(table: ScoreTable, words, tags):
    """General DP used when POS guidance is active.

    Each segment score is multiplied by the empirical probability of its
    tag sequence among positive-pool occurrences (floored for unseen
    sequences). Mirrors the kernel's loop order and tie-breaking.
    """
    n = len(words)
    dp = [NEG_INF] * (n + 1)
    back = [0] * (n + 1)
    dp[0] = 0.0
    probs = table.pos_probs
    floor = table.pos_floor
    for i in range(n):
        d = dp[i]
        jmax = min(i + table.max_len, n)
        for j in range(i, jmax):
            base = table.span_logscore(tuple(words[i:j + 1]))
            if base == NEG_INF:
                continue
            tag_p = probs.get(tuple(tags[i:j + 1]), floor)
            s = d + base + math.log(tag_p)
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


def segment_sentence(table: ScoreTable,
                     sentence: TokenizedSentence) -> SegmentationResult:
    """Best-scoring segmentation of one sentence under the score table."""
    words = [t.surface.lower() for t in sentence.tokens]
    if not words:
        return SegmentationResult(sentence, [], 0.0)
    if table.pos_probs is not None and all(t.pos_tag for t in sentence.tokens):
        tags = [t.pos_tag for t in sentence.tokens]
        score, bounds = _segment_with_tags(table, words, tags)
    else:
        score, bounds = segment_encoded(table, table.encode(words))
    segments = list(zip(bounds[:-1], bounds[1:]))
    return SegmentationResult(sentence, segments, score)


def pos_tag_profile(docs, positive_grams: set[Ngram]) -> dict[tuple, float]:
    """Empirical tag-sequence distribution over positive-pool occurrences.

    Only fully tagged occurrences count. Returns an empty dict when the
    corpus carries no tags.
    """
    counts: dict[tuple, int] = {}
    total = 0
    lengths = {len(g) for g in positive_grams}
    for doc in docs:
        for section in doc.sections:
            if section.sentences is None:
                continue
            for sentence in section.sentences:
                tokens = sentence.tokens
                words = [t.surface.lower() for t in tokens]
                for n in lengths:
                    for i in range(len(words) - n + 1):
                        if tuple(words[i:i + n]) not in positive_grams:
                            continue
                        span = tokens[i:i + n]
                        if not all(t.pos_tag for t in span):
                            continue
                        tagseq = tuple(t.pos_tag for t in span)
                        counts[tagseq] = counts.get(tagseq, 0) + 1
                        total += 1
    if total == 0:
        return {}
    return {tagseq: c / total for tagseq, c in counts.items()}
