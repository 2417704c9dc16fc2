"""Command line interface, driven in-process through main()."""

import json
import os

import pytest

from conftest import make_config
from skillex.cli import build_parser, main
from skillex.evaluator import save_predictions_jsonl, PredictionSet
from skillex.pipeline import (CLASSIFIER_FILE, PHRASES_FILE, extraction_file,
                              manifest_file)


@pytest.fixture(scope="module")
def cli_run(small_bundle, tmp_path_factory):
    """Config file + workdir shared by the CLI tests, mined once."""
    workdir = tmp_path_factory.mktemp("cli-run")
    config = make_config(small_bundle, workdir)
    config_path = workdir / "config.json"
    config_path.write_text(json.dumps(config.to_json()), encoding="utf-8")
    assert main(["mine", "--config", str(config_path)]) == 0
    return config, str(config_path), small_bundle


class TestMine:
    def test_artifacts_and_output(self, cli_run, capsys):
        config, config_path, _ = cli_run
        assert os.path.exists(config.path(PHRASES_FILE))
        assert os.path.exists(config.path(manifest_file("mine")))

    def test_flag_overrides_config(self, cli_run, tmp_path, capsys):
        config, config_path, _ = cli_run
        workdir = tmp_path / "override"
        code = main(["mine", "--config", config_path,
                     "--workdir", str(workdir),
                     "--quality-threshold", "0.9"])
        assert code == 0
        out = capsys.readouterr().out
        assert "quality >= 0.9" in out
        assert os.path.exists(workdir / PHRASES_FILE)

    def test_flags_without_config_file(self, small_bundle, tmp_path, capsys):
        bundle = small_bundle
        code = main(["mine", "--corpus", bundle.corpus_path,
                     "--positive-list", bundle.positives_path,
                     "--stopword-list", bundle.stopwords_path,
                     "--workdir", str(tmp_path / "flagrun"),
                     "--max-n", "4", "--seed", "42"])
        assert code == 0
        assert "mined" in capsys.readouterr().out


class TestTrainAndExtract:
    def test_train_then_extract_m4(self, cli_run, capsys):
        config, config_path, _ = cli_run
        assert main(["train-classifier", "--config", config_path]) == 0
        out = capsys.readouterr().out
        assert "classifier" in out
        assert os.path.exists(config.path(CLASSIFIER_FILE))

        assert main(["extract", "--config", config_path,
                     "--mode", "M4"]) == 0
        out = capsys.readouterr().out
        assert "mode M4" in out
        assert os.path.exists(config.path(extraction_file("M4")))

    def test_extract_default_mode_from_config(self, cli_run, capsys):
        config, config_path, _ = cli_run
        assert main(["extract", "--config", config_path]) == 0
        assert "mode M1" in capsys.readouterr().out
        assert os.path.exists(config.path(extraction_file("M1")))

    def test_extract_before_mine_fails_with_category(self, small_bundle,
                                                     tmp_path, capsys):
        code = main(["extract",
                     "--corpus", small_bundle.corpus_path,
                     "--positive-list", small_bundle.positives_path,
                     "--workdir", str(tmp_path / "nothing")])
        assert code == 2
        err = capsys.readouterr().err
        assert "error[pipeline]:" in err
        assert "run mine first" in err

    def test_missing_input_file_fails_with_category(self, tmp_path, capsys):
        code = main(["mine", "--corpus", str(tmp_path / "absent.jsonl"),
                     "--positive-list", "x",
                     "--workdir", str(tmp_path / "w")])
        assert code == 2
        assert "error[general]:" in capsys.readouterr().err


class TestEvaluate:
    def test_extraction_scoring_with_report(self, cli_run, tmp_path, capsys):
        config, config_path, bundle = cli_run
        extraction = config.path(extraction_file("M4"))
        report_path = tmp_path / "report.json"
        code = main(["evaluate", "--gold", bundle.gold_path,
                     "--extraction", extraction,
                     "--report", str(report_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "full" in out and "partial" in out
        assert report_path.exists()
        payload = json.loads(report_path.read_text(encoding="utf-8"))
        assert payload["format"] == "skillex.eval-report"

    def test_gold_as_predictions_scores_one(self, cli_run, tmp_path, capsys):
        _, _, bundle = cli_run
        preds = [PredictionSet(doc_id=g.doc_id,
                               pred_spans=list(g.gold_spans))
                 for g in bundle.gold]
        pred_path = tmp_path / "preds.jsonl"
        save_predictions_jsonl(preds, pred_path)
        code = main(["evaluate", "--gold", bundle.gold_path,
                     "--predictions", str(pred_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "P=1.0000 R=1.0000 F1=1.0000" in out

    def test_extraction_and_predictions_mutually_exclusive(self, cli_run):
        _, _, bundle = cli_run
        with pytest.raises(SystemExit):
            build_parser().parse_args(
                ["evaluate", "--gold", bundle.gold_path,
                 "--extraction", "a.jsonl", "--predictions", "b.jsonl"])

    def test_malformed_gold_fails_with_category(self, tmp_path, capsys):
        bad = tmp_path / "gold.jsonl"
        bad.write_text("{}\n", encoding="utf-8")
        code = main(["evaluate", "--gold", str(bad),
                     "--predictions", str(bad)])
        assert code == 2
        assert "error[evaluation]:" in capsys.readouterr().err


class TestEmbedText:
    def test_plain_output(self, cli_run, capsys):
        _, _, bundle = cli_run
        code = main(["embed-text", "--vectors", bundle.vectors_path,
                     "--text", "skill00 and tool00"])
        assert code == 0
        values = capsys.readouterr().out.split()
        assert len(values) == 16
        float(values[0])

    def test_json_output(self, cli_run, capsys):
        _, _, bundle = cli_run
        code = main(["embed-text", "--vectors", bundle.vectors_path,
                     "--text", "skill00 tool00", "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["dimension"] == 16
        assert len(payload["values"]) == 16

    def test_oov_text_fails_with_category(self, cli_run, capsys):
        _, _, bundle = cli_run
        code = main(["embed-text", "--vectors", bundle.vectors_path,
                     "--text", "zzz qqq"])
        assert code == 2
        assert "error[embedding]:" in capsys.readouterr().err

    def test_missing_vector_file_is_io_error(self, tmp_path, capsys):
        code = main(["embed-text", "--vectors", str(tmp_path / "no.txt"),
                     "--text", "x"])
        assert code == 2
        assert "error[io]:" in capsys.readouterr().err


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_unknown_mode_rejected_by_argparse(self, cli_run):
        _, config_path, _ = cli_run
        with pytest.raises(SystemExit):
            build_parser().parse_args(["extract", "--config", config_path,
                                       "--mode", "M9"])
