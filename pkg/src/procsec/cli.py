"""``procsec`` command line: generate data, train models, extract features,
run detectors and evaluate them, one file-based step at a time.

Every run writes ``<out>.manifest.json`` beside its main output recording the
command, effective settings, SHA-256 of each input, the seed, tool version
and outputs. Exit status: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict
from typing import Optional

from . import __version__, detectors, evaluation, simgen
from .corpus import split_corpus
from .event_log import DataError, parse_session_log, serialize_sessions, validate
from .features import CATALOG_FEATURES, extract_features, format_feature_table, pair_distance, parse_feature_table
from .learner import GbmModel, TrainConfig
from .lm import (NGramModel, aggregate_curves, essay_perplexity, prefix_perplexity_curve,
                 sentence_perplexities, split_sentences, train_ngram)

LM_DEFAULTS = {"order": 3, "alpha": 0.1, "min_count": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class Run:
    """Collects inputs, outputs and settings for the manifest."""

    def __init__(self, argv, args):
        self.argv = list(argv)
        self.args = args
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.settings: dict = {}
        self.seed = getattr(args, "seed", None)

    def read_bytes(self, path: str) -> bytes:
        with open(path, "rb") as fh:
            data = fh.read()
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        return data

    def read_text(self, path: str) -> str:
        try:
            return self.read_bytes(path).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"{path}: not UTF-8 ({exc})") from None

    def write(self, path: str, text: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.outputs.append(path)

    def finish(self, primary: str) -> None:
        manifest = {
            "format": "procsec-manifest",
            "command": self.argv,
            "config": self.settings,
            "inputs": self.inputs,
            "seed": self.seed,
            "version": __version__,
            "outputs": self.outputs,
        }
        with open(primary + ".manifest.json", "w", encoding="utf-8", newline="") as fh:
            fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# -- file formats ----------------------------------------------------------

def read_essays(text: str) -> list[tuple[str, str]]:
    """One essay per line, optionally ``id<TAB>text``; blank lines skipped."""
    out = []
    for k, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        if "\t" in line:
            eid, body = line.split("\t", 1)
        else:
            eid, body = f"e{k}", line
        out.append((eid, body))
    return out


def format_essays(items) -> str:
    return "".join(f"{eid}\t{' '.join(body.split())}\n" for eid, body in items)


def read_labels(text: str) -> dict[str, str]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0][:2]] != ["id", "label"]:
        raise DataError("labels file must start with the header 'id,label'")
    out = {}
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) < 2:
            raise DataError(f"labels line {n}: expected id,label")
        out[row[0]] = row[1].strip()
    return out


def _binary(v: str, where: str) -> int:
    if v in ("0", "1"):
        return int(v)
    key = v.strip().lower()
    if key in detectors.TRANSCRIBE_LABELS:
        return detectors.TRANSCRIBE_LABELS[key]
    raise DataError(f"{where}: label must be 0/1 or draft/transcribe, got {v!r}")


def format_labels(items) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "label"])
    w.writerows(items)
    return buf.getvalue()


def read_scores(text: str) -> list[tuple[str, float, Optional[str]]]:
    """Detection records (JSON lines) or CSV with ``id``/``subject_id``, ``score`` and optional ``label``."""
    out = []
    if text.lstrip().startswith("{"):
        for n, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                lab = rec.get("label")
                out.append((str(rec["subject_id"]), float(rec["score"]), None if lab is None else str(lab)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"scores line {n}: {exc}") from None
        return out
    reader = csv.DictReader(io.StringIO(text))
    key = "id" if reader.fieldnames and "id" in reader.fieldnames else "subject_id"
    if not reader.fieldnames or key not in reader.fieldnames or "score" not in reader.fieldnames:
        raise DataError("scores CSV needs 'id' (or 'subject_id') and 'score' columns")
    for n, rec in enumerate(reader, start=2):
        try:
            out.append((rec[key], float(rec["score"]), rec.get("label")))
        except ValueError as exc:
            raise DataError(f"scores line {n}: {exc}") from None
    return out


def _scores_and_labels(run: Run, scores_path: str, labels_arg: str):
    recs = read_scores(run.read_text(scores_path))
    if not recs:
        raise DataError(f"{scores_path}: no scores")
    if labels_arg == "in-file":
        if any(lab is None or lab == "" for _, _, lab in recs):
            raise DataError("--labels in-file but the scores file lacks a label for some rows")
        labels = [_binary(lab, scores_path) for _, _, lab in recs]
    else:
        table = read_labels(run.read_text(labels_arg))
        missing = [i for i, _, _ in recs if i not in table]
        if missing:
            raise DataError(f"{len(missing)} scored ids have no label, first {missing[0]!r}")
        labels = [_binary(table[i], labels_arg) for i, _, _ in recs]
    return [i for i, _, _ in recs], [s for _, s, _ in recs], labels


# -- settings ----------------------------------------------------------------

def _load_config(run: Run, path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        cfg = json.loads(run.read_text(path))
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise DataError(f"config {path}: top level must be an object")
    return cfg


def _pick(args, cfg_section: dict, name: str, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg_section.get(name, default)


def _train_config(args, cfg: dict) -> TrainConfig:
    sect = cfg.get("gbm", {})
    base = TrainConfig()
    return TrainConfig(
        n_rounds=_pick(args, sect, "n_rounds", base.n_rounds),
        learning_rate=_pick(args, sect, "learning_rate", base.learning_rate),
        max_depth=_pick(args, sect, "max_depth", base.max_depth),
        min_leaf=_pick(args, sect, "min_leaf", base.min_leaf),
        seed=args.seed,
        subsample=sect.get("subsample", base.subsample),
    )


def _threshold(run: Run, args, ids, scores) -> Optional[float]:
    if args.threshold is not None:
        return args.threshold
    if args.operating_point is None:
        return None
    if not args.labels:
        raise UsageError("--operating-point needs --labels to calibrate on")
    table = read_labels(run.read_text(args.labels))
    missing = [i for i in ids if i not in table]
    if missing:
        raise DataError(f"{len(missing)} ids have no calibration label, first {missing[0]!r}")
    labels = [_binary(table[i], args.labels) for i in ids]
    return evaluation.select_threshold(scores, labels, args.operating_point)


def _attach(results, thr):
    if thr is None:
        return results
    return [detectors._result(r.subject_id, r.score, thr, r.detector) for r in results]


def _load_gbm(run: Run, path: str) -> GbmModel:
    try:
        return GbmModel.loads(run.read_text(path))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: bad model file ({exc})") from None


def _load_lm(run: Run, path: str) -> NGramModel:
    try:
        return NGramModel.loads(run.read_text(path))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: bad model file ({exc})") from None


def _feature_table(run: Run, path: str):
    table = parse_feature_table(run.read_text(path))
    if not table:
        raise DataError(f"{path}: empty feature table")
    return table


# -- commands ----------------------------------------------------------------

def cmd_simgen_sessions(run: Run, args, cfg):
    sim_cfg = simgen.load_config(cfg.get("simgen"))
    pool = simgen.default_text_pool(args.pool_words, sim_cfg)
    run.settings = {"kind": args.kind, "simgen": sim_cfg}
    if args.kind == "repeater":
        if args.labels_out:
            raise UsageError("--labels-out only applies to --kind copytype")
        run.settings.update(n_writers=args.n_writers, sessions_per_writer=args.sessions_per_writer)
        sessions = simgen.gen_repeater_dataset(args.n_writers, args.sessions_per_writer, pool, args.seed, sim_cfg)
        run.write(args.out, serialize_sessions(sessions).decode("utf-8"))
    else:
        if not args.labels_out:
            raise UsageError("--kind copytype needs --labels-out")
        run.settings.update(n_draft=args.n_draft, n_transcribe=args.n_transcribe)
        data = simgen.gen_mode_dataset(args.n_draft, args.n_transcribe, pool, args.seed, sim_cfg)
        run.write(args.out, serialize_sessions([s for s, _ in data]).decode("utf-8"))
        run.write(args.labels_out, format_labels((s.session_id, m.value.lower()) for s, m in data))
    return args.out


def _word_range(spec: str):
    try:
        if ":" in spec:
            lo, hi = (int(x) for x in spec.split(":", 1))
            return lo, hi
        n = int(spec)
        return n, n
    except ValueError:
        raise UsageError(f"--words must be N or LO:HI, got {spec!r}") from None


def cmd_simgen_corpora(run: Run, args, cfg):
    lm = _load_lm(run, args.lm)
    sim_cfg = simgen.load_config(cfg.get("simgen"))
    words = _word_range(args.words)
    rate = args.perturb_rate if args.perturb_rate is not None else sim_cfg["corpora"]["perturb_rate"]
    run.settings = {"n_ai": args.n_ai, "n_human": args.n_human, "words": list(words), "perturb_rate": rate}
    items, labels = [], []
    if args.n_ai:
        for k, t in enumerate(simgen.gen_corpora(lm, args.n_ai, words, simgen.CorpusMode.LM_SAMPLED, args.seed,
                                                 config=sim_cfg)):
            items.append((f"ai-{k:04d}", t))
            labels.append((f"ai-{k:04d}", 1))
    if args.n_human:
        for k, t in enumerate(simgen.gen_corpora(lm, args.n_human, words, simgen.CorpusMode.PERTURBED_HUMAN,
                                                 args.seed + 1, perturb_rate=rate, config=sim_cfg)):
            items.append((f"human-{k:04d}", t))
            labels.append((f"human-{k:04d}", 0))
    if not items:
        raise UsageError("nothing to generate (--n-ai and --n-human are both 0)")
    run.write(args.out, format_essays(items))
    if args.labels_out:
        run.write(args.labels_out, format_labels(labels))
    return args.out


def cmd_lm_train(run: Run, args, cfg):
    sect = cfg.get("lm", {})
    params = {k: _pick(args, sect, k, v) for k, v in LM_DEFAULTS.items()}
    if args.bundled:
        docs = list(split_corpus().train)
        source = "bundled:train"
    else:
        docs = [line for line in run.read_text(args.corpus).splitlines() if line.strip()]
        source = args.corpus
    sents = [s for d in docs for s in split_sentences(d)]
    if not sents:
        raise DataError("training corpus is empty")
    run.settings = {**params, "corpus": source, "unit": "sentence"}
    model = train_ngram(sents, params["order"], params["alpha"], params["min_count"])
    run.write(args.out, model.dumps())
    return args.out


def cmd_lm_score(run: Run, args, cfg):
    lm = _load_lm(run, args.model)
    essays = read_essays(run.read_text(args.essays))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "n_tokens", "ppl"])
    for eid, text in essays:
        if args.sentences:
            for k, rep in enumerate(sentence_perplexities(lm, text)):
                w.writerow([f"{eid}:{k}", rep.n_tokens, repr(rep.ppl)])
        else:
            try:
                rep = essay_perplexity(lm, text)
            except ValueError as exc:
                raise DataError(f"essay {eid!r}: {exc}") from None
            w.writerow([eid, rep.n_tokens, repr(rep.ppl)])
    run.settings = {"sentences": args.sentences}
    run.write(args.out, buf.getvalue())
    return args.out


def cmd_lm_curve(run: Run, args, cfg):
    lm = _load_lm(run, args.model)
    essays = read_essays(run.read_text(args.essays))
    curves = [(eid, prefix_perplexity_curve(lm, t, args.n_start, args.n_end, args.step)) for eid, t in essays]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.aggregate:
        w.writerow(["n_words", "count", "mean", "std"])
        for s in aggregate_curves(c for _, c in curves):
            w.writerow([s.n_words, s.count, repr(s.mean), repr(s.std)])
    else:
        w.writerow(["id", "n_words", "ppl"])
        for eid, c in curves:
            for n, p in c.points:
                w.writerow([eid, n, repr(p)])
    run.settings = {"n_start": args.n_start, "n_end": args.n_end, "step": args.step, "aggregate": args.aggregate}
    run.write(args.out, buf.getvalue())
    return args.out


def cmd_features_extract(run: Run, args, cfg):
    sessions = parse_session_log(run.read_bytes(args.sessions), derive_jumps=args.derive_jumps)
    kept, skipped = [], []
    for s in sessions:
        bad = validate(s)
        if bad and not args.include_invalid:
            skipped.append(s.session_id)
            print(f"skipping session {s.session_id!r}: event {bad[0].index}: {bad[0].message}", file=sys.stderr)
            continue
        kept.append((s, extract_features(s)))
    run.settings = {"include_invalid": args.include_invalid, "derive_jumps": args.derive_jumps,
                    "skipped_sessions": skipped}
    run.write(args.out, format_feature_table(kept))
    return args.out


def cmd_detect_aitext_score(run: Run, args, cfg):
    lm = _load_lm(run, args.model)
    essays = read_essays(run.read_text(args.essays))
    results = []
    for eid, text in essays:
        try:
            results.append(detectors.ai_text_score(lm, text, subject_id=eid))
        except ValueError as exc:
            raise DataError(f"essay {eid!r}: {exc}") from None
    thr = _threshold(run, args, [r.subject_id for r in results], [r.score for r in results])
    run.settings = {"threshold": thr, "operating_point": args.operating_point}
    run.write(args.out, detectors.format_detections(_attach(results, thr)))
    return args.out


def _refs(table):
    return [detectors.SessionRef(ids["session_id"], ids["writer_id"], ids["task_id"]) for ids, _ in table]


def cmd_detect_pairs_fit(run: Run, args, cfg):
    table = _feature_table(run, args.features)
    pairs = detectors.build_pair_dataset(_refs(table), args.n_same, args.n_diff, args.seed,
                                         features=[fv for _, fv in table])
    tc = _train_config(args, cfg)
    run.settings = {"n_same": args.n_same, "n_diff": args.n_diff, "gbm": asdict(tc)}
    model = detectors.fit_biometric_verifier(pairs, tc)
    run.write(args.out, model.dumps())
    return args.out


def cmd_detect_pairs_score(run: Run, args, cfg):
    model = _load_gbm(run, args.model)
    table = _feature_table(run, args.features)
    by_id = {ids["session_id"]: fv for ids, fv in table}
    if args.pairs:
        rows = list(csv.DictReader(io.StringIO(run.read_text(args.pairs))))
        if rows and not {"session_a", "session_b"} <= set(rows[0]):
            raise DataError("pairs file needs 'session_a' and 'session_b' columns")
        todo = []
        for n, r in enumerate(rows, start=2):
            for key in ("session_a", "session_b"):
                if r[key] not in by_id:
                    raise DataError(f"pairs line {n}: unknown session {r[key]!r}")
            todo.append((r["session_a"], r["session_b"], r.get("label")))
    else:
        if args.n_same is None or args.n_diff is None or args.seed is None:
            raise UsageError("give --pairs, or --n-same, --n-diff and --seed to sample pairs")
        ds = detectors.build_pair_dataset(_refs(table), args.n_same, args.n_diff, args.seed,
                                          features=[fv for _, fv in table])
        todo = [(r.session_a, r.session_b, str(r.label)) for r in ds.rows]
    results, labels = [], []
    for a, b, lab in todo:
        res = detectors.score_distance(model, pair_distance(by_id[a], by_id[b], CATALOG_FEATURES),
                                       subject_id=f"{a}|{b}")
        if args.impostor:
            res = detectors.as_impostor(res)
            lab = None if lab in (None, "") else str(1 - int(lab))
        results.append(res)
        labels.append((res.subject_id, lab))
    thr = _threshold(run, args, [r.subject_id for r in results], [r.score for r in results])
    run.settings = {"impostor": args.impostor, "threshold": thr, "operating_point": args.operating_point,
                    "n_same": args.n_same, "n_diff": args.n_diff}
    run.write(args.out, detectors.format_detections(_attach(results, thr)))
    if args.labels_out:
        if any(lab in (None, "") for _, lab in labels):
            raise DataError("--labels-out needs labelled pairs")
        run.write(args.labels_out, format_labels(labels))
    return args.out


def cmd_detect_copytype_fit(run: Run, args, cfg):
    table = _feature_table(run, args.features)
    lab = read_labels(run.read_text(args.labels))
    missing = [ids["session_id"] for ids, _ in table if ids["session_id"] not in lab]
    if missing:
        raise DataError(f"{len(missing)} sessions have no label, first {missing[0]!r}")
    tc = _train_config(args, cfg)
    run.settings = {"gbm": asdict(tc)}
    model = detectors.fit_copy_typing_detector(
        _refs(table), [lab[ids["session_id"]] for ids, _ in table], tc, features=[fv for _, fv in table])
    run.write(args.out, model.dumps())
    return args.out


def cmd_detect_copytype_score(run: Run, args, cfg):
    model = _load_gbm(run, args.model)
    table = _feature_table(run, args.features)
    results = [detectors.score_features(model, fv, subject_id=ids["session_id"]) for ids, fv in table]
    thr = _threshold(run, args, [r.subject_id for r in results], [r.score for r in results])
    run.settings = {"threshold": thr, "operating_point": args.operating_point}
    run.write(args.out, detectors.format_detections(_attach(results, thr)))
    return args.out


def cmd_eval_roc(run: Run, args, cfg):
    _, scores, labels = _scores_and_labels(run, args.scores, args.labels)
    curve = evaluation.roc(scores, labels)
    summary = evaluation.roc_summary(curve)
    run.write(args.out, evaluation.format_roc_csv(curve))
    if args.summary_out:
        run.write(args.summary_out, json.dumps(summary, sort_keys=True) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return args.out


def cmd_eval_report(run: Run, args, cfg):
    _, scores, labels = _scores_and_labels(run, args.scores, args.labels)
    curve = evaluation.roc(scores, labels)
    if args.threshold is not None:
        thr, op = args.threshold, None
    else:
        op = args.operating_point or "eer"
        thr = evaluation.select_threshold(scores, labels, op)
    m = evaluation.confusion(labels, [int(s >= thr) for s in scores])
    report = {
        "operating_point": op,
        "threshold": thr,
        "confusion": asdict(m),
        "rates": asdict(evaluation.rates(m)),
        **evaluation.roc_summary(curve),
        "reference_eer": evaluation.REFERENCE_EER,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    run.write(args.out, text)
    sys.stdout.write(text)
    return args.out


# -- parser --------------------------------------------------------------------

def _add_gbm_flags(p):
    p.add_argument("--n-rounds", dest="n_rounds", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--min-leaf", dest="min_leaf", type=int)


def _add_threshold_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--threshold", type=float, help="attach decisions at this score threshold")
    g.add_argument("--operating-point", type=_operating_point, help="'eer' or 'fpr:<x>', calibrated on --labels")
    p.add_argument("--labels", help="id,label CSV used to calibrate --operating-point")


def _operating_point(v: str) -> str:
    if v == "eer":
        return v
    if v.startswith("fpr:"):
        try:
            x = float(v[4:])
        except ValueError:
            x = -1.0
        if 0.0 <= x <= 1.0:
            return v
    raise argparse.ArgumentTypeError(f"unknown operating point {v!r} (use 'eer' or 'fpr:<x>' with x in [0, 1])")


def _sub(parent, name):
    sp = parent.add_subparsers(dest=f"{name}_cmd", metavar="VERB", parser_class=_Parser)
    sp.required = True
    return sp


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="procsec", description="Test-security detectors for writing-process data.")
    p.add_argument("--version", action="version", version=f"procsec {__version__}")
    p.add_argument("--config", help="JSON file with 'lm', 'gbm' and 'simgen' sections overriding defaults")
    top = p.add_subparsers(dest="group", metavar="COMMAND", parser_class=_Parser)
    top.required = True

    g = top.add_parser("simgen", help="generate synthetic sessions or essay corpora")
    sg = _sub(g, "simgen")
    q = sg.add_parser("sessions", help="keystroke session log")
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--kind", choices=("repeater", "copytype"), default="repeater")
    q.add_argument("--n-writers", type=int, default=200)
    q.add_argument("--sessions-per-writer", type=int, default=2)
    q.add_argument("--n-draft", type=int, default=500)
    q.add_argument("--n-transcribe", type=int, default=500)
    q.add_argument("--pool-words", type=int, help="words per source text")
    q.add_argument("--out", required=True)
    q.add_argument("--labels-out", help="id,label CSV of session modes (copytype)")
    q.set_defaults(func=cmd_simgen_sessions)
    q = sg.add_parser("corpora", help="LM-sampled and perturbed-human essays")
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--lm", required=True, help="n-gram model file")
    q.add_argument("--n-ai", type=int, default=200)
    q.add_argument("--n-human", type=int, default=200)
    q.add_argument("--words", default="400:600", help="N or LO:HI words per essay")
    q.add_argument("--perturb-rate", type=float)
    q.add_argument("--out", required=True)
    q.add_argument("--labels-out", help="id,label CSV (1 = LM-sampled)")
    q.set_defaults(func=cmd_simgen_corpora)

    g = top.add_parser("lm", help="train and apply the n-gram language model")
    sg = _sub(g, "lm")
    q = sg.add_parser("train")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="UTF-8 text, one document per line")
    src.add_argument("--bundled", action="store_true", help="train on the bundled corpus's training slice")
    q.add_argument("--order", type=int)
    q.add_argument("--alpha", type=float)
    q.add_argument("--min-count", dest="min_count", type=int)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_lm_train)
    q = sg.add_parser("score")
    q.add_argument("--model", required=True)
    q.add_argument("--essays", required=True)
    q.add_argument("--sentences", action="store_true", help="one row per sentence")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_lm_score)
    q = sg.add_parser("curve")
    q.add_argument("--model", required=True)
    q.add_argument("--essays", required=True)
    q.add_argument("--n-start", type=int, default=10)
    q.add_argument("--n-end", type=int, default=400)
    q.add_argument("--step", type=int, default=10)
    q.add_argument("--aggregate", action="store_true", help="mean and std per length")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_lm_curve)

    g = top.add_parser("features", help="keystroke feature extraction")
    sg = _sub(g, "features")
    q = sg.add_parser("extract")
    q.add_argument("--sessions", required=True)
    q.add_argument("--include-invalid", action="store_true")
    q.add_argument("--derive-jumps", action="store_true")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_features_extract)

    g = top.add_parser("detect", help="fit and apply detectors")
    sg = _sub(g, "detect")
    a = sg.add_parser("aitext")
    av = _sub(a, "aitext")
    q = av.add_parser("score")
    q.add_argument("--model", required=True)
    q.add_argument("--essays", required=True)
    _add_threshold_flags(q)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_detect_aitext_score)

    a = sg.add_parser("pairs")
    av = _sub(a, "pairs")
    q = av.add_parser("fit")
    q.add_argument("--features", required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--n-same", type=int, required=True)
    q.add_argument("--n-diff", type=int, required=True)
    _add_gbm_flags(q)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_detect_pairs_fit)
    q = av.add_parser("score")
    q.add_argument("--model", required=True)
    q.add_argument("--features", required=True)
    q.add_argument("--pairs", help="CSV with session_a,session_b[,label]")
    q.add_argument("--seed", type=int)
    q.add_argument("--n-same", type=int)
    q.add_argument("--n-diff", type=int)
    q.add_argument("--impostor", action="store_true", help="report impostor orientation (score negated)")
    q.add_argument("--labels-out")
    _add_threshold_flags(q)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_detect_pairs_score)

    a = sg.add_parser("copytype")
    av = _sub(a, "copytype")
    q = av.add_parser("fit")
    q.add_argument("--features", required=True)
    q.add_argument("--labels", required=True, help="id,label CSV (draft/transcribe or 0/1)")
    q.add_argument("--seed", type=int, required=True)
    _add_gbm_flags(q)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_detect_copytype_fit)
    q = av.add_parser("score")
    q.add_argument("--model", required=True)
    q.add_argument("--features", required=True)
    _add_threshold_flags(q)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_detect_copytype_score)

    g = top.add_parser("eval", help="ROC, AUC, EER and operating-point reports")
    sg = _sub(g, "eval")
    q = sg.add_parser("roc")
    q.add_argument("--scores", required=True)
    q.add_argument("--labels", required=True, help="'in-file' or an id,label CSV")
    q.add_argument("--summary-out")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_eval_roc)
    q = sg.add_parser("report")
    q.add_argument("--scores", required=True)
    q.add_argument("--labels", required=True, help="'in-file' or an id,label CSV")
    th = q.add_mutually_exclusive_group()
    th.add_argument("--operating-point", type=_operating_point, help="'eer' (default) or 'fpr:<x>'")
    th.add_argument("--threshold", type=float)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_eval_report)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = Run(argv, args)
    try:
        cfg = _load_config(run, args.config)
        primary = args.func(run, args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"procsec: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError, KeyError, OSError) as exc:
        print(f"procsec: data error: {exc}", file=sys.stderr)
        return 2
    run.finish(primary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
