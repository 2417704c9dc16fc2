"""Command line interface.

    skillex mine             --config run.json
    skillex train-classifier --config run.json
    skillex extract          --config run.json --mode M4
    skillex evaluate         --gold gold.jsonl --extraction out.jsonl
    skillex embed-text       --vectors vec.txt --text "python and sql"

Every subcommand exits 0 on success and nonzero with a categorized error
message on failure. Flags override values from the JSON config file.
"""

from __future__ import annotations

import argparse
import json
import sys

from .corpus import CorpusStats, default_tokenizer
from .embedding import (SifConfig, SifEmbedder, frequencies_from_stats,
                        load_frequencies_tsv, load_vectors)
from .errors import SkillexError
from .evaluator import (EvalReport, evaluate, load_gold_jsonl,
                        load_predictions_jsonl)
from .pipeline import (MODES, PipelineConfig, evaluate_extraction,
                       read_extraction_jsonl, stage_extract, stage_mine,
                       stage_train_classifier)

# flags shared by the pipeline subcommands, keyed by config field name
_CONFIG_FLAGS: dict[str, dict] = {
    "corpus": {"help": "JSONL corpus path"},
    "vectors": {"help": "word2vec text format vector file"},
    "positive_list": {"help": "seed phrase list, one phrase per line"},
    "stopword_list": {"help": "stopword list, one word per line"},
    "frequencies": {"help": "word<TAB>count TSV overriding corpus stats"},
    "labeled_terms": {"help": "phrase<TAB>label TSV for the classifier"},
    "workdir": {"help": "artifact directory"},
    "sections": {"help": "rank scope: requirements or all"},
    "min_support": {"type": int},
    "max_n": {"type": int},
    "ensemble_size": {"type": int},
    "subsample_size": {"type": int},
    "max_depth": {"type": int},
    "quality_threshold": {"type": float},
    "iterations": {"type": int},
    "unigram_floor": {"type": float},
    "sif_a": {"type": float},
    "oov_policy": {"help": "skip or zero"},
    "frequency_mode": {"help": "raw or relative"},
    "remove_common_component": {"action": "store_true", "default": None},
    "rank_threshold": {"type": float},
    "hidden": {"type": int},
    "epochs": {"type": int},
    "learning_rate": {"type": float},
    "batch_size": {"type": int},
    "decision_threshold": {"type": float},
    "seed": {"type": int},
}


def _add_config_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file")
    for name, spec in _CONFIG_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        sub.add_argument(flag, dest=name, **spec)


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {name: getattr(args, name)
                 for name in _CONFIG_FLAGS
                 if getattr(args, name, None) is not None}
    if args.config:
        return PipelineConfig.from_file(args.config, overrides)
    return PipelineConfig(**overrides)


def _cmd_mine(args) -> int:
    config = _resolve_config(args)
    result = stage_mine(config)
    print(f"mined {len(result.scored)} candidates, "
          f"{len(result.selected)} at quality >= "
          f"{config.quality_threshold}; artifacts in {config.workdir}")
    return 0


def _cmd_train_classifier(args) -> int:
    config = _resolve_config(args)
    model = stage_train_classifier(config)
    final_loss = model.loss_history[-1] if model.loss_history else float("nan")
    print(f"trained [{model.dimension}, {model.hidden}, 1] classifier, "
          f"final loss {final_loss:.6f}; artifacts in {config.workdir}")
    return 0


def _cmd_extract(args) -> int:
    config = _resolve_config(args)
    records = stage_extract(config, args.mode)
    total = sum(len(r["phrases"]) for r in records)
    mode = args.mode or config.mode
    print(f"extracted {total} phrase occurrences across "
          f"{len(records)} documents (mode {mode}); artifacts in "
          f"{config.workdir}")
    return 0


def _print_report(report: EvalReport) -> None:
    for name in ("full", "partial"):
        block = getattr(report, name)
        counts = report.counts[name]
        print(f"{name:7s} P={block['precision']:.4f} "
              f"R={block['recall']:.4f} F1={block['f1']:.4f} "
              f"(tp={counts['tp']} fp={counts['fp']} fn={counts['fn']})")


def _cmd_evaluate(args) -> int:
    gold = load_gold_jsonl(args.gold)
    if args.extraction:
        report = evaluate_extraction(gold,
                                     read_extraction_jsonl(args.extraction))
    else:
        report = evaluate(gold, load_predictions_jsonl(args.predictions))
    if args.report:
        report.save(args.report)
        print(f"report written to {args.report}")
    _print_report(report)
    return 0


def _cmd_embed_text(args) -> int:
    store = load_vectors(args.vectors)
    if args.frequencies:
        store.frequencies.update(load_frequencies_tsv(args.frequencies))
    elif args.stats:
        store.frequencies.update(
            frequencies_from_stats(CorpusStats.load(args.stats)))
    config = SifConfig(a=args.sif_a, oov_policy=args.oov_policy)
    embedder = SifEmbedder(store, config)
    tokens = [t.surface for sent in default_tokenizer(args.text)
              for t in sent.tokens]
    vector = embedder.embed(tokens)
    if args.json:
        print(json.dumps({"dimension": len(vector),
                          "values": [float(x) for x in vector]}))
    else:
        print(" ".join(repr(float(x)) for x in vector))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillex",
        description="occupational skill detection from job listings")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("mine", help="mine quality phrases from the corpus")
    _add_config_args(sub)
    sub.set_defaults(func=_cmd_mine)

    sub = subs.add_parser("train-classifier",
                          help="train the skill/non-skill classifier")
    _add_config_args(sub)
    sub.set_defaults(func=_cmd_train_classifier)

    sub = subs.add_parser("extract",
                          help="run a pipeline mode over the corpus")
    _add_config_args(sub)
    sub.add_argument("--mode", choices=MODES,
                     help="pipeline mode (default: config value)")
    sub.set_defaults(func=_cmd_extract)

    sub = subs.add_parser("evaluate", help="score predictions against gold")
    sub.add_argument("--gold", required=True, help="gold JSONL file")
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--extraction", help="extraction JSONL from extract")
    group.add_argument("--predictions", help="span predictions JSONL")
    sub.add_argument("--report", help="write the report JSON here")
    sub.set_defaults(func=_cmd_evaluate)

    sub = subs.add_parser("embed-text", help="embed a piece of text")
    sub.add_argument("--vectors", required=True,
                     help="word2vec text format vector file")
    sub.add_argument("--frequencies", help="word<TAB>count TSV")
    sub.add_argument("--stats", help="corpus stats artifact")
    sub.add_argument("--text", required=True, help="text to embed")
    sub.add_argument("--sif-a", dest="sif_a", type=float, default=1e-3)
    sub.add_argument("--oov-policy", dest="oov_policy", default="skip",
                     choices=("skip", "zero"))
    sub.add_argument("--json", action="store_true",
                     help="print a JSON object instead of bare numbers")
    sub.set_defaults(func=_cmd_embed_text)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SkillexError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
