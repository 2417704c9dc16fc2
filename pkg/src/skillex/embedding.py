"""SIF text embedding over pre-trained word vectors.

Words, phrases, sentences and whole sections all map into one vector space:
a smooth-inverse-frequency weighted average of word vectors,

    v_s = (1/|s|) * sum_{w in s} a/(a + f_w) * v_w

where f_w is the word's raw corpus count. Rare words dominate, frequent
filler words are damped. Similarity between pieces of text is the cosine
of the angle between their embeddings.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusStats
from .errors import EmbeddingError, VectorFormatError

OOV_POLICIES = ("skip", "zero")
FREQUENCY_MODES = ("raw", "relative")


@dataclass
class VectorStore:
    """Immutable word-vector table plus word frequencies.

    ``frequencies`` holds raw counts f_w; they arrive separately from the
    vectors (corpus stats artifact or a ``word<TAB>count`` TSV).
    """

    dimension: int
    vectors: dict[str, np.ndarray]
    frequencies: dict[str, int] = field(default_factory=dict)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word)

    def frequency(self, word: str) -> int:
        return self.frequencies.get(word, 0)

    def total_frequency(self) -> int:
        return sum(self.frequencies.values())


@dataclass
class SifConfig:
    a: float = 1e-3
    remove_common_component: bool = False
    oov_policy: str = "skip"
    frequency_mode: str = "raw"

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"SIF smoothing a must be > 0, got {self.a}")
        if not (1e-4 <= self.a <= 1e-3):
            warnings.warn(f"SIF a={self.a} is outside the usual "
                          f"[1e-4, 1e-3] range", stacklevel=2)
        if self.oov_policy not in OOV_POLICIES:
            raise ValueError(f"oov_policy must be one of {OOV_POLICIES}, "
                             f"got {self.oov_policy!r}")
        if self.frequency_mode not in FREQUENCY_MODES:
            raise ValueError(f"frequency_mode must be one of "
                             f"{FREQUENCY_MODES}, got {self.frequency_mode!r}")


def load_vectors(path) -> VectorStore:
    """Read word vectors in word2vec text format.

    First line is ``N D``; each following line is a word and D space
    separated floats. Frequencies are attached separately afterwards.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        fields = header.split()
        if len(fields) != 2:
            raise VectorFormatError(
                f"{path}: line 1: expected header 'N D', got {header!r}")
        try:
            count, dim = int(fields[0]), int(fields[1])
        except ValueError as exc:
            raise VectorFormatError(
                f"{path}: line 1: non-integer header field: {exc}") from exc
        if count < 0 or dim < 1:
            raise VectorFormatError(
                f"{path}: line 1: bad header values N={count} D={dim}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if len(parts) != dim + 1:
                raise VectorFormatError(
                    f"{path}: line {lineno}: expected 1 word + {dim} values, "
                    f"got {len(parts)} fields")
            word = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise VectorFormatError(
                    f"{path}: line {lineno}: non-numeric value: {exc}") from exc
            if not np.all(np.isfinite(vec)):
                raise VectorFormatError(
                    f"{path}: line {lineno}: non-finite vector entry")
            if word in vectors:
                warnings.warn(f"{path}: line {lineno}: duplicate word "
                              f"{word!r}, keeping the last occurrence",
                              stacklevel=2)
            vectors[word] = vec
    if len(vectors) != count:
        warnings.warn(f"{path}: header announced {count} vectors, "
                      f"found {len(vectors)}", stacklevel=2)
    return VectorStore(dimension=dim, vectors=vectors)


def save_vectors(store: VectorStore, path) -> None:
    """Write the store back in word2vec text format (repr-exact floats)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store.vectors)} {store.dimension}\n")
        for word, vec in store.vectors.items():
            values = " ".join(repr(float(x)) for x in vec)
            fh.write(f"{word} {values}\n")


def load_frequencies_tsv(path) -> dict[str, int]:
    """Read ``word<TAB>count`` rows."""
    freqs: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                word, count = line.split("\t")
                freqs[word] = int(count)
            except ValueError as exc:
                raise VectorFormatError(
                    f"{path}: line {lineno}: expected 'word<TAB>count': "
                    f"{exc}") from exc
    return freqs


def frequencies_from_stats(stats: CorpusStats) -> dict[str, int]:
    return dict(stats.word_counts)


def sif_weight(store: VectorStore, config: SifConfig, word: str) -> float:
    """a/(a + f_w); unknown words get f_w = 0, hence weight 1."""
    f = float(store.frequency(word))
    if config.frequency_mode == "relative":
        total = store.total_frequency()
        f = f / total if total > 0 else 0.0
    return config.a / (config.a + f)


def _resolve(store: VectorStore, token: str) -> list[str] | None:
    """Map a token to the store words that represent it.

    Lookup order: token as-is, then lowercased, then (for underscore-joined
    multiword units) the underscore-split parts. Returns None when nothing
    is in vocabulary.
    """
    if token in store:
        return [token]
    lowered = token.lower()
    if lowered in store:
        return [lowered]
    if "_" in token:
        parts = [p for p in token.split("_") if p]
        resolved: list[str] = []
        for part in parts:
            hit = _resolve(store, part)
            if hit:
                resolved.extend(hit)
        if resolved:
            return resolved
    return None


def embed_text(store: VectorStore, config: SifConfig, tokens,
               common_direction: np.ndarray | None = None) -> np.ndarray:
    """SIF embedding of a token sequence.

    Out-of-vocabulary tokens are skipped (excluded from the sum and from
    |s|) or replaced by the zero vector, per ``config.oov_policy``. With
    ``remove_common_component`` the projection onto ``common_direction``
    is subtracted after averaging.
    """
    tokens = list(tokens)
    if not tokens:
        raise EmbeddingError("cannot embed an empty token sequence")
    total = np.zeros(store.dimension, dtype=np.float64)
    size = 0
    for token in tokens:
        words = _resolve(store, token)
        if words is None:
            if config.oov_policy == "zero":
                size += 1
            continue
        for word in words:
            total += sif_weight(store, config, word) * store.vectors[word]
            size += 1
    if size == 0:
        raise EmbeddingError(
            f"all tokens out of vocabulary under skip policy: {tokens!r}")
    out = total / size
    if config.remove_common_component and common_direction is not None:
        c = common_direction
        out = out - (out @ c) * c
    return out


def cosine(x: np.ndarray, y: np.ndarray) -> float:
    """x.y / (|x||y|); zero-norm inputs score 0 by convention."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise EmbeddingError(
            f"dimension mismatch: {x.shape} vs {y.shape}")
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.dot(x, y) / (nx * ny))


class SifEmbedder:
    """Bound (store, config) pair with optional common-component removal."""

    def __init__(self, store: VectorStore, config: SifConfig | None = None):
        self.store = store
        self.config = config or SifConfig()
        self.common_direction: np.ndarray | None = None

    def fit_common_direction(self, token_sequences) -> np.ndarray:
        """First principal direction of the sequence embeddings (no centering)."""
        rows = []
        for tokens in token_sequences:
            try:
                rows.append(embed_text(self.store, self.config, tokens))
            except EmbeddingError:
                continue
        if not rows:
            raise EmbeddingError("no embeddable sequences to fit the "
                                 "common direction on")
        matrix = np.vstack(rows)
        _, _, vt = np.linalg.svd(matrix, full_matrices=False)
        self.common_direction = vt[0]
        return self.common_direction

    def embed(self, tokens) -> np.ndarray:
        direction = (self.common_direction
                     if self.config.remove_common_component else None)
        return embed_text(self.store, self.config, tokens,
                          common_direction=direction)

    def similarity(self, tokens_a, tokens_b) -> float:
        return cosine(self.embed(tokens_a), self.embed(tokens_b))
