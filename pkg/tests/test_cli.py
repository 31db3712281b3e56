import json
import shlex
import subprocess
import sys

import pytest

from procsec.cli import main

PIPELINE = [
    "lm train --bundled --alpha 0.0001 --out lm.json",
    "simgen corpora --lm lm.json --seed 0 --n-ai 10 --n-human 10 --words 100:150 --out essays.tsv "
    "--labels-out essay_labels.csv",
    "lm score --model lm.json --essays essays.tsv --out ppl.csv",
    "lm curve --model lm.json --essays essays.tsv --n-end 100 --aggregate --out curve.csv",
    "detect aitext score --model lm.json --essays essays.tsv --operating-point eer --labels essay_labels.csv "
    "--out ai.jsonl",
    "eval roc --scores ai.jsonl --labels essay_labels.csv --out ai_roc.csv",
    "simgen sessions --seed 0 --n-writers 12 --pool-words 40 --out rep.jsonl",
    "features extract --sessions rep.jsonl --out rep_feats.csv",
    "detect pairs fit --features rep_feats.csv --seed 0 --n-same 8 --n-diff 16 --n-rounds 20 --out pair_model.json",
    "detect pairs score --model pair_model.json --features rep_feats.csv --seed 1 --n-same 6 --n-diff 6 "
    "--out pairs.jsonl --labels-out pair_labels.csv",
    "eval report --scores pairs.jsonl --labels pair_labels.csv --out pair_report.json",
    "simgen sessions --seed 0 --kind copytype --n-draft 12 --n-transcribe 12 --pool-words 40 --out ct.jsonl "
    "--labels-out ct_labels.csv",
    "features extract --sessions ct.jsonl --out ct_feats.csv",
    "detect copytype fit --features ct_feats.csv --labels ct_labels.csv --seed 0 --n-rounds 20 --out ct_model.json",
    "detect copytype score --model ct_model.json --features ct_feats.csv --threshold 0 --out ct_det.jsonl",
    "eval report --scores ct_det.jsonl --labels ct_labels.csv --out ct_report.json",
]


def run_pipeline(directory, monkeypatch):
    monkeypatch.chdir(directory)
    for cmd in PIPELINE:
        assert main(shlex.split(cmd)) == 0, cmd
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 1


def test_unknown_flag_is_usage_error(capsys):
    assert main(["lm", "score", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_input_is_data_error(tmp_path, capsys):
    code = main(["features", "extract", "--sessions", str(tmp_path / "none.jsonl"), "--out", str(tmp_path / "f.csv")])
    assert code == 2
    assert "none.jsonl" in capsys.readouterr().err


def test_malformed_log_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"session_id": "s"}\n')
    assert main(["features", "extract", "--sessions", str(bad), "--out", str(tmp_path / "f.csv")]) == 2
    assert "line 1" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "procsec", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("procsec ")


def test_eval_roc_in_file_labels(tmp_path, capsys):
    scores = tmp_path / "s.csv"
    scores.write_text("id,score,label\na,0.8,1\nb,0.3,1\nc,0.5,0\nd,0.1,0\n")
    roc_out = tmp_path / "roc.csv"
    assert main(["eval", "roc", "--scores", str(scores), "--labels", "in-file", "--out", str(roc_out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["auc"] == 0.75
    assert roc_out.read_text().splitlines()[0] == "threshold,fpr,tpr"


def test_eval_report_threshold(tmp_path, capsys):
    scores = tmp_path / "s.csv"
    scores.write_text("id,score,label\na,0.8,1\nb,0.3,1\nc,0.5,0\nd,0.1,0\n")
    out = tmp_path / "r.json"
    assert main(["eval", "report", "--scores", str(scores), "--labels", "in-file", "--threshold", "0.4",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["confusion"] == {"tp": 1, "fp": 1, "tn": 1, "fn": 1}
    assert rep["threshold"] == 0.4


def test_lm_score_byte_identical_with_manifest(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "c.txt").write_text("the cat sat on the mat.\nthe dog sat on the log.\n")
    (tmp_path / "e.tsv").write_text("x\tthe cat sat.\ny\tthe dog ran off.\n")
    assert main(["lm", "train", "--corpus", "c.txt", "--out", "m.json"]) == 0
    assert main(["lm", "score", "--model", "m.json", "--essays", "e.tsv", "--out", "a.csv"]) == 0
    assert main(["lm", "score", "--model", "m.json", "--essays", "e.tsv", "--out", "b.csv"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "id,n_tokens,ppl"
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert set(man["inputs"]) == {"m.json", "e.tsv"}
    assert man["command"][:2] == ["lm", "score"]
    assert "time" not in json.dumps(man)


def test_pipeline_reproducible_across_directories(tmp_path, monkeypatch):
    one, two = tmp_path / "one", tmp_path / "two"
    one.mkdir()
    two.mkdir()
    a = run_pipeline(one, monkeypatch)
    b = run_pipeline(two, monkeypatch)
    assert a.keys() == b.keys()
    assert len([n for n in a if n.endswith(".manifest.json")]) == len(PIPELINE)
    for name in a:
        assert a[name] == b[name], name


def test_copytype_labels_required(tmp_path):
    code = main(["simgen", "sessions", "--seed", "0", "--kind", "copytype", "--out", str(tmp_path / "x.jsonl")])
    assert code == 1
    assert not (tmp_path / "x.jsonl").exists()


@pytest.mark.parametrize("op", ["youden", "fpr:2", "fpr:x"])
def test_bad_operating_point(tmp_path, monkeypatch, op):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "s.csv").write_text("id,score,label\na,0.8,1\nb,0.3,0\n")
    argv = ["eval", "report", "--scores", "s.csv", "--labels", "in-file", "--operating-point", op, "--out", "r.json"]
    assert main(argv) == 1
    assert not (tmp_path / "r.json").exists()
