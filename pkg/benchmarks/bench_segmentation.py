"""Benchmark the segmentation kernels: compiled extension vs pure Python.

Generates a synthetic corpus with repeating collocations, builds one score
table, then runs the exact same encoded sentences through both kernel
implementations. Scores must agree bitwise; throughput is reported per
kernel together with the speedup.

Usage:
    python3 benchmarks/bench_segmentation.py [--sentences N] [--vocab N]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from skillex.corpus import Document, Section, count_ngrams, tokenize_corpus
from skillex.miner import _seg_py
from skillex.miner.segmentation import KERNEL, ScoreTable

try:
    from skillex.miner import _seg_core
except ImportError:
    _seg_core = None


def build_workload(rng, vocab_size: int, num_sentences: int,
                   max_len: int) -> tuple[ScoreTable, list[np.ndarray], int]:
    vocab = [f"w{i:04d}" for i in range(vocab_size)]
    # zipf-ish word frequencies so the same collocations keep reappearing
    weights = 1.0 / np.arange(1, vocab_size + 1)
    weights /= weights.sum()
    sentences = []
    for _ in range(num_sentences):
        size = int(rng.integers(5, 31))
        idx = rng.choice(vocab_size, size=size, p=weights)
        sentences.append([vocab[int(i)] for i in idx])
    docs = tokenize_corpus(
        Document(id=f"d{i}", sections=[Section(kind="other",
                                               text=" ".join(words))])
        for i, words in enumerate(sentences))
    stats = count_ngrams(docs, max_n=max_len)

    multi = sorted((g for g in stats.ngram_counts if len(g) >= 2),
                   key=lambda g: -stats.count(g))
    quality = {gram: float(rng.uniform(0.3, 1.0)) for gram in multi[:600]}
    table = ScoreTable(stats, quality, max_len=max_len)

    encoded = [table.encode(words) for words in sentences]
    num_tokens = sum(len(words) for words in sentences)
    return table, encoded, num_tokens


def run_kernel(impl, table: ScoreTable, encoded: list[np.ndarray],
               repeats: int) -> tuple[float, list[float]]:
    best = float("inf")
    scores: list[float] = []
    for _ in range(repeats):
        scores = []
        started = time.perf_counter()
        for ids in encoded:
            score, _ = impl.best_segmentation(
                ids, table.unigram_scores, table.oov_score,
                table.trie_offsets, table.trie_tokens, table.trie_children,
                table.node_scores, table.max_len)
            scores.append(score)
        best = min(best, time.perf_counter() - started)
    return best, scores


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="compare the compiled and pure Python "
                    "segmentation kernels")
    parser.add_argument("--sentences", type=int, default=4000)
    parser.add_argument("--vocab", type=int, default=1500)
    parser.add_argument("--max-len", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    table, encoded, num_tokens = build_workload(
        rng, args.vocab, args.sentences, args.max_len)
    print(f"workload: {len(encoded)} sentences, {num_tokens} tokens, "
          f"{len(table.node_scores)} trie nodes, max_len {table.max_len}")
    print(f"kernel selected at import: {KERNEL}")

    py_time, py_scores = run_kernel(_seg_py, table, encoded, args.repeats)
    print(f"python   kernel: {py_time:8.3f} s best of {args.repeats} "
          f"({num_tokens / py_time:,.0f} tokens/s)")

    if _seg_core is None:
        print("compiled kernel: not built (pip install -e . rebuilds it)")
        return 0

    c_time, c_scores = run_kernel(_seg_core, table, encoded, args.repeats)
    print(f"compiled kernel: {c_time:8.3f} s best of {args.repeats} "
          f"({num_tokens / c_time:,.0f} tokens/s)")
    print(f"speedup: {py_time / c_time:.1f}x")

    agree = sum(1 for a, b in zip(py_scores, c_scores) if a == b)
    print(f"agreement: identical objective on {agree}/{len(encoded)} "
          f"sentences")
    if agree != len(encoded):
        print("kernels disagree", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
