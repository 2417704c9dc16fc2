"""Pipeline stages, artifact persistence and the M1-M4 ablation modes.

Each stage reads and writes plain files under a working directory, so any
stage can be rerun or inspected independently:

    stats.json          n-gram statistics of the corpus
    candidates.tsv      every scored candidate phrase (quality descending)
    phrases.tsv         candidates at or above the quality threshold
    quality_model.json  the mining ensemble
    classifier.json     the trained skill classifier
    extraction-<mode>.jsonl   per-document detected phrases + stage scores
    manifest-<stage>.json     config hash, seed and artifact digests

Modes: M1 mines only; M2 adds ranking against the requirements section;
M3 sends mined phrases straight to the classifier; M4 runs the full
mine, rank, classify chain. Later stages only ever remove phrases, so
M4 output is contained in M2 output is contained in M1 output.
"""

from __future__ import annotations

import hashlib
import json
import os
import warnings
from dataclasses import asdict, dataclass, replace

from . import __version__
from .classifier import (LabeledTerm, SkillClassifier, load_labeled_tsv,
                         predict, sample_negatives, train)
from .corpus import (CorpusStats, Document, load_corpus, tokenize_corpus)
from .embedding import (EmbeddingError, SifConfig, SifEmbedder,
                        frequencies_from_stats, load_frequencies_tsv,
                        load_vectors)
from .errors import PipelineOrderError, SkillexError, TrainingError
from .evaluator import (EvalReport, GoldDocument, PredictionSet, evaluate,
                        spans_from_phrases)
from .miner.features import load_phrase_list, load_stopwords
from .miner.mine import (MinerConfig, MiningResult, read_phrases_tsv,
                         run_mining, write_phrases_tsv)
from .ranker import RankedPhrase, filter_by_threshold, rank_phrases
from .util import canonical_json, derive_seed, file_sha256

MODES = ("M1", "M2", "M3", "M4")
SECTION_SCOPES = ("requirements", "all")

STATS_FILE = "stats.json"
CANDIDATES_FILE = "candidates.tsv"
PHRASES_FILE = "phrases.tsv"
QUALITY_MODEL_FILE = "quality_model.json"
CLASSIFIER_FILE = "classifier.json"

MANIFEST_FORMAT = "skillex.manifest"
MANIFEST_VERSION = 1


def extraction_file(mode: str) -> str:
    return f"extraction-{mode}.jsonl"


def manifest_file(stage: str) -> str:
    return f"manifest-{stage}.json"


@dataclass
class PipelineConfig:
    """Everything a pipeline run needs; JSON file + flag overrides."""

    corpus: str = ""
    vectors: str = ""
    positive_list: str = ""
    stopword_list: str = ""
    frequencies: str = ""      # word<TAB>count TSV; default: stats artifact
    labeled_terms: str = ""    # phrase<TAB>label TSV; default: distant labels
    workdir: str = "skillex-run"
    mode: str = "M1"
    sections: str = "requirements"
    # miner
    min_support: int = 3
    max_n: int = 6
    ensemble_size: int = 100
    subsample_size: int | None = None
    max_depth: int = 4
    quality_threshold: float = 0.5
    iterations: int = 1
    unigram_floor: float = 1.0
    # embedding
    sif_a: float = 1e-3
    oov_policy: str = "skip"
    frequency_mode: str = "raw"
    remove_common_component: bool = False
    # ranking
    rank_threshold: float = 0.5
    # classifier
    hidden: int = 64
    epochs: int = 200
    learning_rate: float = 0.05
    batch_size: int = 32
    decision_threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise SkillexError(f"mode must be one of {MODES}, "
                               f"got {self.mode!r}")
        if self.sections not in SECTION_SCOPES:
            raise SkillexError(f"sections must be one of {SECTION_SCOPES}, "
                               f"got {self.sections!r}")

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise SkillexError(f"{path}: unknown config keys: "
                               f"{sorted(unknown)}")
        config = cls(**payload)
        if overrides:
            config = replace(config, **overrides)
        return config

    def to_json(self) -> dict:
        return asdict(self)

    def sha256(self) -> str:
        return hashlib.sha256(
            canonical_json(self.to_json()).encode("utf-8")).hexdigest()

    def path(self, name: str) -> str:
        return os.path.join(self.workdir, name)


def _require_file(path: str, hint: str) -> None:
    if not path:
        raise SkillexError(hint)
    if not os.path.exists(path):
        raise SkillexError(f"{path} does not exist; {hint}")


def _require_artifact(path: str, hint: str) -> None:
    if not os.path.exists(path):
        raise PipelineOrderError(f"missing artifact {path}; {hint}")


def write_manifest(config: PipelineConfig, stage: str,
                   inputs: dict[str, str], outputs: dict[str, str]) -> str:
    """Digest record for one stage; no timestamps, so reruns are identical."""
    payload = {
        "format": MANIFEST_FORMAT,
        "format_version": MANIFEST_VERSION,
        "package_version": __version__,
        "stage": stage,
        "seed": config.seed,
        "config": config.to_json(),
        "config_sha256": config.sha256(),
        "inputs": {name: file_sha256(p) for name, p in sorted(inputs.items())
                   if p and os.path.exists(p)},
        "outputs": {name: file_sha256(p) for name, p in sorted(outputs.items())},
    }
    path = config.path(manifest_file(stage))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(payload))
        fh.write("\n")
    return path


def _load_tokenized_corpus(config: PipelineConfig) -> list[Document]:
    _require_file(config.corpus, "set 'corpus' to the JSONL corpus path")
    return tokenize_corpus(load_corpus(config.corpus))


def _build_embedder(config: PipelineConfig) -> SifEmbedder:
    _require_file(config.vectors,
                  "this mode needs word vectors; set 'vectors' in the config")
    store = load_vectors(config.vectors)
    if config.frequencies:
        _require_file(config.frequencies,
                      "set 'frequencies' to a word<TAB>count TSV")
        store.frequencies.update(load_frequencies_tsv(config.frequencies))
    else:
        stats_path = config.path(STATS_FILE)
        _require_artifact(stats_path,
                          "word frequencies come from the corpus stats; "
                          "run mine first or set 'frequencies'")
        store.frequencies.update(
            frequencies_from_stats(CorpusStats.load(stats_path)))
    sif = SifConfig(a=config.sif_a,
                    remove_common_component=config.remove_common_component,
                    oov_policy=config.oov_policy,
                    frequency_mode=config.frequency_mode)
    return SifEmbedder(store, sif)


class _CachingEmbedder(SifEmbedder):
    """Memoizes embeddings by token tuple; ranking revisits phrases often."""

    def __init__(self, inner: SifEmbedder):
        super().__init__(inner.store, inner.config)
        self.common_direction = inner.common_direction
        self._memo: dict[tuple, object] = {}

    def embed(self, tokens):
        key = tuple(tokens)
        if key not in self._memo:
            try:
                self._memo[key] = super().embed(tokens)
            except EmbeddingError as exc:
                self._memo[key] = exc
        hit = self._memo[key]
        if isinstance(hit, EmbeddingError):
            raise hit
        return hit


def _fit_common_direction(embedder: SifEmbedder,
                          docs: list[Document]) -> None:
    if not embedder.config.remove_common_component:
        return
    sequences = []
    for doc in docs:
        for section in doc.sections:
            if section.sentences:
                sequences.append([t.surface for t in section.tokens()])
    embedder.fit_common_direction(sequences)


def stage_mine(config: PipelineConfig) -> MiningResult:
    """Mine the corpus and persist stats, phrase lists and the quality model."""
    docs = _load_tokenized_corpus(config)
    _require_file(config.positive_list,
                  "set 'positive_list' to the seed phrase file")
    positives = load_phrase_list(config.positive_list)
    stopwords = (load_stopwords(config.stopword_list)
                 if config.stopword_list else set())
    miner_config = MinerConfig(
        min_support=config.min_support, max_n=config.max_n,
        ensemble_size=config.ensemble_size,
        subsample_size=config.subsample_size, max_depth=config.max_depth,
        quality_threshold=config.quality_threshold,
        iterations=config.iterations, unigram_floor=config.unigram_floor,
        seed=config.seed, positives=positives, stopwords=stopwords)
    result = run_mining(docs, miner_config)
    os.makedirs(config.workdir, exist_ok=True)
    result.stats.save(config.path(STATS_FILE))
    write_phrases_tsv(result.scored, config.path(CANDIDATES_FILE))
    write_phrases_tsv(result.selected, config.path(PHRASES_FILE))
    result.model.save(config.path(QUALITY_MODEL_FILE))
    write_manifest(config, "mine",
                   inputs={"corpus": config.corpus,
                           "positive_list": config.positive_list,
                           "stopword_list": config.stopword_list},
                   outputs={name: config.path(name) for name in
                            (STATS_FILE, CANDIDATES_FILE, PHRASES_FILE,
                             QUALITY_MODEL_FILE)})
    return result


def _distant_labels(config: PipelineConfig,
                    embedder: SifEmbedder) -> list[tuple[tuple, int]]:
    """Positive list vs. seeded sample of other mined candidates, 1:1."""
    _require_file(config.positive_list,
                  "set 'positive_list' or provide 'labeled_terms'")
    positives = load_phrase_list(config.positive_list)
    cand_path = config.path(CANDIDATES_FILE)
    _require_artifact(cand_path, "negative sampling draws from mined "
                                 "candidates; run mine first")
    grams = [gram for gram, _ in read_phrases_tsv(cand_path)]
    pos_rows = []
    for gram in sorted(positives):
        try:
            embedder.embed(list(gram))
        except EmbeddingError:
            warnings.warn(f"positive phrase {gram!r} is out of vocabulary; "
                          f"skipped", stacklevel=2)
            continue
        pos_rows.append((gram, 1))
    if not pos_rows:
        raise TrainingError("no positive phrase is embeddable with the "
                            "given vectors")
    pool = []
    for gram in grams:
        try:
            embedder.embed(list(gram))
        except EmbeddingError:
            continue
        pool.append(gram)
    negatives = sample_negatives(pool, positives, len(pos_rows),
                                 seed=derive_seed(config.seed, "negatives"))
    return pos_rows + [(gram, 0) for gram in negatives]


def stage_train_classifier(config: PipelineConfig) -> SkillClassifier:
    """Train the skill/non-skill classifier on phrase embeddings."""
    embedder = _build_embedder(config)
    if config.remove_common_component:
        _fit_common_direction(embedder, _load_tokenized_corpus(config))
    if config.labeled_terms:
        rows = load_labeled_tsv(config.labeled_terms)
    else:
        rows = _distant_labels(config, embedder)
    data = []
    for gram, label in rows:
        try:
            vec = embedder.embed(list(gram))
        except EmbeddingError:
            warnings.warn(f"labeled phrase {gram!r} is out of vocabulary; "
                          f"skipped", stacklevel=2)
            continue
        data.append(LabeledTerm(phrase=tuple(gram), label=label,
                                embedding=vec))
    model = train(data, epochs=config.epochs,
                  learning_rate=config.learning_rate,
                  batch_size=config.batch_size, hidden=config.hidden,
                  seed=derive_seed(config.seed, "classifier"))
    os.makedirs(config.workdir, exist_ok=True)
    model.save(config.path(CLASSIFIER_FILE))
    write_manifest(config, "train-classifier",
                   inputs={"vectors": config.vectors,
                           "positive_list": config.positive_list,
                           "labeled_terms": config.labeled_terms,
                           "candidates": config.path(CANDIDATES_FILE),
                           "stats": config.path(STATS_FILE)},
                   outputs={CLASSIFIER_FILE: config.path(CLASSIFIER_FILE)})
    return model


def _section_grams(section, lengths) -> set[tuple]:
    present = set()
    for sentence in section.sentences or []:
        words = [t.surface.lower() for t in sentence.tokens]
        for n in lengths:
            for i in range(len(words) - n + 1):
                present.add(tuple(words[i:i + n]))
    return present


def stage_extract(config: PipelineConfig, mode: str | None = None) -> list[dict]:
    """Detect skill phrases per document under the given mode.

    A phrase is detected in a document when it occurs (as a contiguous,
    case-insensitive token run) in an in-scope section; M2/M4 then require
    a rank score at or above the threshold against some containing section,
    and M3/M4 require the classifier to accept the phrase embedding.
    """
    mode = mode or config.mode
    if mode not in MODES:
        raise SkillexError(f"mode must be one of {MODES}, got {mode!r}")
    phrases_path = config.path(PHRASES_FILE)
    _require_artifact(phrases_path, "no mined phrase list; run mine first")
    quality_by_gram = dict(read_phrases_tsv(phrases_path))
    lengths = sorted({len(g) for g in quality_by_gram})
    docs = _load_tokenized_corpus(config)

    embedder = None
    if mode in ("M2", "M3", "M4"):
        embedder = _CachingEmbedder(_build_embedder(config))
        _fit_common_direction(embedder, docs)
    model = None
    if mode in ("M3", "M4"):
        classifier_path = config.path(CLASSIFIER_FILE)
        _require_artifact(classifier_path,
                          "no classifier; run train-classifier first")
        model = SkillClassifier.load(classifier_path)

    scope_kinds = (("requirements",) if config.sections == "requirements"
                   else None)
    records = []
    for doc in docs:
        scope = [(i, s) for i, s in enumerate(doc.sections)
                 if scope_kinds is None or s.kind in scope_kinds]
        occurrences: dict[tuple, list[int]] = {}
        for index, section in scope:
            present = _section_grams(section, lengths)
            for gram in present & quality_by_gram.keys():
                occurrences.setdefault(gram, []).append(index)
        survivors = sorted(occurrences)
        rank_scores: dict[tuple, float] = {}
        probs: dict[tuple, float] = {}

        if mode in ("M2", "M4") and survivors:
            best: dict[tuple, RankedPhrase] = {}
            for index, section in scope:
                here = [g for g in survivors if index in occurrences[g]]
                if not here:
                    continue
                try:
                    ranked = rank_phrases(embedder, here, section,
                                          section_ref=(doc.id, index))
                except EmbeddingError:
                    continue  # section has no in-vocabulary token
                for r in ranked:
                    prev = best.get(r.phrase)
                    if prev is None or r.score > prev.score:
                        best[r.phrase] = r
            ranked_best = [best[g] for g in survivors if g in best]
            kept = filter_by_threshold(ranked_best, config.rank_threshold)
            rank_scores = {r.phrase: r.score for r in kept}
            survivors = [g for g in survivors if g in rank_scores]

        if mode in ("M3", "M4") and survivors:
            kept = []
            for gram in survivors:
                try:
                    vec = embedder.embed(list(gram))
                except EmbeddingError:
                    continue  # nothing to classify
                prob, label = predict(model, vec, config.decision_threshold)
                probs[gram] = prob
                if label == 1:
                    kept.append(gram)
            survivors = kept

        records.append({
            "doc_id": doc.id,
            "phrases": [{
                "phrase": " ".join(gram),
                "quality": quality_by_gram[gram],
                "rank_score": rank_scores.get(gram),
                "classifier_prob": probs.get(gram),
                "sections": occurrences[gram],
            } for gram in survivors],
        })

    os.makedirs(config.workdir, exist_ok=True)
    out_path = config.path(extraction_file(mode))
    write_extraction_jsonl(records, out_path)
    write_manifest(config, f"extract-{mode}",
                   inputs={"corpus": config.corpus,
                           "phrases": phrases_path,
                           "vectors": config.vectors,
                           "classifier": config.path(CLASSIFIER_FILE)},
                   outputs={extraction_file(mode): out_path})
    return records


def write_extraction_jsonl(records: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_extraction_jsonl(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def extraction_sets(records: list[dict]) -> dict[str, set[str]]:
    """(doc_id -> detected phrase strings), the unit of mode containment."""
    return {record["doc_id"]: {p["phrase"] for p in record["phrases"]}
            for record in records}


def evaluate_extraction(gold: list[GoldDocument],
                        records: list[dict]) -> EvalReport:
    """Align detected phrases to gold text spans and score both modes."""
    preds = []
    for record in records:
        matching = [g for g in gold if g.doc_id == record["doc_id"]]
        if not matching:
            raise PipelineOrderError(
                f"extraction mentions doc_id {record['doc_id']!r} absent "
                f"from the gold file")
        text = matching[0].text
        phrases = [p["phrase"] for p in record["phrases"]]
        preds.append(PredictionSet(doc_id=record["doc_id"],
                                   pred_spans=spans_from_phrases(text,
                                                                 phrases)))
    return evaluate(gold, preds)


def run_pipeline(config: PipelineConfig) -> list[dict]:
    """Mine, train whatever the mode needs, then extract."""
    stage_mine(config)
    if config.mode in ("M3", "M4"):
        stage_train_classifier(config)
    return stage_extract(config, config.mode)
