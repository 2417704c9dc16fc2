"""End-to-end phrase mining: count, featurize, train, segment, rectify."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

from ..corpus import (CorpusStats, Document, Ngram, Section, count_ngrams,
                      popularity)
from ..util import derive_seed
from .features import (PhraseCandidate, PhraseFeatures, best_split,
                       collect_occurrence_contexts, compute_features,
                       extract_candidates, pkl, pmi)
from .quality import QualityModel, split_pools, train_quality_model
from .segmentation import ScoreTable, pos_tag_profile, segment_sentence


@dataclass
class MinerConfig:
    min_support: int = 3
    max_n: int = 6
    ensemble_size: int = 100
    subsample_size: int | None = None  # default: 2x positive pool
    max_depth: int = 4
    quality_threshold: float = 0.5
    iterations: int = 1
    unigram_floor: float = 1.0
    pos_guidance: bool = False
    seed: int = 0
    positives: set[Ngram] = field(default_factory=set)
    stopwords: set[str] = field(default_factory=set)


@dataclass
class MiningResult:
    stats: CorpusStats
    model: QualityModel
    candidates: list[PhraseCandidate]
    features_by_gram: dict[Ngram, PhraseFeatures]
    scored: list[tuple[Ngram, float]]    # all surviving candidates, desc quality
    selected: list[tuple[Ngram, float]]  # quality >= threshold


class RectifiedPopularity:
    """Popularity over rectified (segment-chosen) counts.

    Sequences whose rectified count dropped to zero fall back to their raw
    corpus popularity so that split parts keep finite probabilities.
    """

    def __init__(self, raw: CorpusStats, rect_counts: dict[Ngram, int]):
        self.raw = raw
        self.rect_counts = rect_counts
        totals: dict[int, int] = {}
        for gram, count in rect_counts.items():
            totals[len(gram)] = totals.get(len(gram), 0) + count
        self.order_totals = totals
        # vocabulary listing only; popularity still prefers rectified mass
        self.ngram_counts = raw.ngram_counts

    def popularity(self, u: Ngram) -> float:
        count = self.rect_counts.get(tuple(u), 0)
        if count > 0:
            return count / self.order_totals[len(u)]
        return self.raw.popularity(tuple(u))


def _refresh_popularity_features(gram: Ngram, feats: PhraseFeatures,
                                 measure) -> PhraseFeatures:
    """Recompute the popularity-derived fields against a new count measure."""
    pop = popularity(measure, gram)
    if len(gram) >= 2:
        u_l, u_r = best_split(measure, gram)
        pmi_score = pmi(measure, u_l, u_r)
        pkl_score = pkl(measure, gram, u_l, u_r)
    else:
        pmi_score = 0.0
        pkl_score = 0.0
    return replace(feats, popularity=pop, pmi=pmi_score, pkl=pkl_score)


def _iter_sentences(docs):
    for doc in docs:
        for section in doc.sections:
            if section.sentences is None:
                continue
            yield from section.sentences


def rectify_and_retrain(model: QualityModel, stats: CorpusStats,
                        candidates: list[PhraseCandidate],
                        features_by_gram: dict[Ngram, PhraseFeatures],
                        sentences, positives: set[Ngram],
                        config: MinerConfig, iterations: int | None = None):
    """Re-estimate quality via phrasal segmentation.

    Each pass segments every sentence with the current model, sets each
    candidate's rectified frequency to the number of segments exactly equal
    to it, drops zero-support candidates, recomputes popularity-derived
    features from the rectified counts and retrains the ensemble.
    """
    iterations = config.iterations if iterations is None else iterations
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    sentences = list(sentences)
    measure = stats
    for it in range(iterations):
        table = ScoreTable.from_quality_model(
            model, measure, features_by_gram, config.max_n,
            unigram_floor=config.unigram_floor,
            pos_probs=_pos_profile(config, candidates, positives, sentences))
        rect_counts: Counter = Counter()
        for sentence in sentences:
            result = segment_sentence(table, sentence)
            rect_counts.update(result.segment_grams())
        survivors = []
        for cand in candidates:
            rect = rect_counts.get(cand.tokens, 0)
            cand.rectified_frequency = rect
            if rect > 0:
                survivors.append(cand)
        candidates = survivors
        measure = RectifiedPopularity(stats, dict(rect_counts))
        features_by_gram = {
            cand.tokens: _refresh_popularity_features(
                cand.tokens, features_by_gram[cand.tokens], measure)
            for cand in candidates
        }
        model = train_quality_model(
            positives, [(c, features_by_gram[c.tokens]) for c in candidates],
            T=config.ensemble_size, K=config.subsample_size,
            max_depth=config.max_depth,
            seed=derive_seed(config.seed, f"quality-retrain-{it}"))
    return model, candidates, features_by_gram, measure


def _pos_profile(config: MinerConfig, candidates, positives, sentences):
    if not config.pos_guidance:
        return None
    pos_idx, _ = split_pools(positives, [(c, None) for c in candidates])
    pool = {candidates[i].tokens for i in pos_idx}
    # pos_tag_profile walks documents; wrap the loose sentences in one
    wrapper = Document(id="_", sections=[Section(kind="other", text="",
                                                 sentences=list(sentences))])
    profile = pos_tag_profile([wrapper], pool)
    return profile or None


def mine_phrases(docs: list[Document],
                 config: MinerConfig) -> list[tuple[Ngram, float]]:
    """Corpus to scored phrase list; phrases with quality >= threshold."""
    return run_mining(docs, config).selected


def run_mining(docs: list[Document], config: MinerConfig) -> MiningResult:
    stats = count_ngrams(docs, config.max_n)
    candidates = extract_candidates(stats, config.min_support, config.max_n)
    contexts = collect_occurrence_contexts(
        docs, [c.tokens for c in candidates], config.max_n)
    features_by_gram = {
        cand.tokens: compute_features(stats, cand, contexts, config.stopwords)
        for cand in candidates
    }
    model = train_quality_model(
        config.positives,
        [(c, features_by_gram[c.tokens]) for c in candidates],
        T=config.ensemble_size, K=config.subsample_size,
        max_depth=config.max_depth,
        seed=derive_seed(config.seed, "quality-initial"))
    model, candidates, features_by_gram, _ = rectify_and_retrain(
        model, stats, candidates, features_by_gram,
        _iter_sentences(docs), config.positives, config)
    scored = [(cand.tokens, model.quality(features_by_gram[cand.tokens]))
              for cand in candidates]
    scored.sort(key=lambda item: (-item[1], item[0]))
    selected = [(gram, q) for gram, q in scored
                if q >= config.quality_threshold]
    return MiningResult(stats=stats, model=model, candidates=candidates,
                        features_by_gram=features_by_gram,
                        scored=scored, selected=selected)


def write_phrases_tsv(scored: list[tuple[Ngram, float]], path) -> None:
    """Mined phrase output: ``phrase<TAB>quality``, descending quality."""
    with open(path, "w", encoding="utf-8") as fh:
        for gram, quality in scored:
            fh.write(f"{' '.join(gram)}\t{quality!r}\n")


def read_phrases_tsv(path) -> list[tuple[Ngram, float]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            phrase, quality = line.split("\t")
            rows.append((tuple(phrase.split(" ")), float(quality)))
    return rows
