"""Command line interface.

One binary, one subcommand per pipeline stage. Exit codes: 0 on success,
1 when input data is unusable, 2 for usage errors (argparse's default).
Progress and warnings go to stderr; artifact paths are the only stdout.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .aggregation import AggregationError, aggregate, content_token_mask
from .evaluation import (
    DegenerateLabelsError,
    EvalReport,
    cohen_kappa,
    evaluate_scores,
    hallucination_stats,
)
from .io import (
    DataError,
    RowError,
    read_annotations,
    read_claim_scores,
    read_partitions,
    read_rows,
    read_token_scores,
    write_claim_scores,
    write_partitions,
    write_samples,
    write_token_scores,
)
from .model import (
    AggregatorKind,
    AnnotationSet,
    ExternalScoreMeta,
    Sample,
    ScorerConfig,
    validate_sample,
)
from .pipeline import (
    apply_filters,
    dataset_composition,
    load_dataset,
    persist_results,
)
from .scorers import (
    IngestError,
    ingest_external_scores,
    max_likelihood,
    token_entropy,
    token_likelihood,
)
from .segmenter import segment
from .stops import StopSet, load_default_stops
from .words import tokenize_words

log = logging.getLogger("claimuq")

_NATIVE_SCORERS = ("token_likelihood", "max_likelihood", "token_entropy")


@dataclass(frozen=True)
class RunConfig:
    """Every CLI flag, normalized. One field per flag across subcommands."""

    command: str
    input: str | None = None
    output: str | None = None
    out_dir: str | None = None
    stopwords: str | None = None
    scorer: str | None = None
    entropy_top_k: int = 24
    external: str | None = None
    scorer_name: str | None = None
    orientation: str | None = None
    scores: str | None = None
    partitions: str | None = None
    masks: str | None = None
    agg: str = "product"
    claim_scores: tuple[str, ...] = ()
    annotations: str | None = None
    annotator: str | None = None
    annotator_a: str | None = None
    annotator_b: str | None = None
    agreement_with: str | None = None
    group_by: tuple[str, ...] = ()
    fpr_cap: float = 0.1
    prec_floor: float = 0.8
    curves: bool = False
    logit_mode: str = "raw"
    generation_seconds: float | None = None
    strict: bool = False


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimuq",
        description="claim segmentation and token-uncertainty evaluation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="partition generations into claims")
    p.add_argument("--input", required=True, help="samples JSONL")
    p.add_argument("--output", required=True, help="partitions JSONL")
    p.add_argument("--stopwords", help="replacement stop list file or directory")
    p.add_argument("--strict", action="store_true",
                   help="fail on any validation violation, not just offsets")

    p = sub.add_parser("score", help="compute or ingest token scores")
    p.add_argument("--input", required=True, help="samples JSONL")
    p.add_argument("--output", required=True, help="token scores JSONL")
    p.add_argument("--scorer", choices=_NATIVE_SCORERS)
    p.add_argument("--entropy-top-k", type=int, default=24,
                   help="candidates kept for token_entropy (5, 10 or 24)")
    p.add_argument("--external", help="precomputed scores JSONL to ingest")
    p.add_argument("--scorer-name", help="name recorded for external scores")
    p.add_argument("--orientation", choices=("uncertainty", "confidence"),
                   help="orientation of external scores")
    p.add_argument("--logit-mode", choices=("raw", "log_softmax"), default="raw")

    p = sub.add_parser("aggregate", help="reduce token scores to claim scores")
    p.add_argument("--scores", required=True, help="token scores JSONL")
    p.add_argument("--partitions", required=True, help="partitions JSONL")
    p.add_argument("--output", required=True, help="claim scores JSONL")
    p.add_argument("--agg", choices=[k.value for k in AggregatorKind],
                   default="product")
    p.add_argument("--input", help="samples JSONL (for stopword masks)")
    p.add_argument("--masks", help="precomputed mask JSONL overriding --input")
    p.add_argument("--stopwords", help="replacement stop list file or directory")

    p = sub.add_parser("evaluate", help="detection metrics or annotator agreement")
    p.add_argument("--claim-scores", action="append", default=[],
                   dest="claim_scores", help="claim scores JSONL (repeatable)")
    p.add_argument("--annotations", required=True, help="annotations JSONL")
    p.add_argument("--annotator", help="annotator whose labels to evaluate against")
    p.add_argument("--agreement-with", help="second annotations JSONL: report kappa")
    p.add_argument("--annotator-b", help="annotator to read from --agreement-with")
    p.add_argument("--input", help="samples JSONL (metadata for --group-by)")
    p.add_argument("--group-by", default="",
                   help="comma list of language,model,scorer,aggregator")
    p.add_argument("--fpr-cap", type=float, default=0.1)
    p.add_argument("--prec-floor", type=float, default=0.8)
    p.add_argument("--curves", action="store_true",
                   help="include curve points in persisted artifacts")
    p.add_argument("--out-dir", help="persist reports and curves here")
    p.add_argument("--output", help="write the report JSON here (default stdout)")

    p = sub.add_parser("stats", help="hallucination and composition tables")
    p.add_argument("--input", required=True, help="samples JSONL or dataset dir")
    p.add_argument("--annotations", help="annotations JSONL")
    p.add_argument("--annotator", help="annotator to read labels from")
    p.add_argument("--output", help="write the stats JSON here (default stdout)")

    p = sub.add_parser("filter", help="apply agreement and wellformedness filters")
    p.add_argument("--input", required=True, help="samples JSONL or dataset dir")
    p.add_argument("--annotations", help="annotations JSONL")
    p.add_argument("--annotator-a", help="first annotator name")
    p.add_argument("--annotator-b", help="second annotator name")
    p.add_argument("--out-dir", required=True, help="kept samples + report")

    p = sub.add_parser("audit-tokenizer",
                       help="flag spans where tokenizer conventions may differ")
    p.add_argument("--input", required=True, help="samples JSONL")
    p.add_argument("--output", help="write the audit JSON here (default stdout)")

    p = sub.add_parser("bench", help="time segmentation over a corpus")
    p.add_argument("--input", required=True, help="samples JSONL")
    p.add_argument("--generation-seconds", type=float,
                   help="wall-clock cost of generating the corpus, for the ratio")
    p.add_argument("--stopwords", help="replacement stop list file or directory")

    return parser


def _to_config(args: argparse.Namespace) -> RunConfig:
    values = vars(args).copy()
    values.pop("version", None)
    if "group_by" in values:
        raw = values["group_by"] or ""
        values["group_by"] = tuple(g for g in raw.split(",") if g)
    if "claim_scores" in values:
        values["claim_scores"] = tuple(values["claim_scores"])
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in values.items() if k in known})


def _fail_rows(errors: list[RowError]) -> None:
    if errors:
        raise DataError(errors)


def _load_stops(cfg: RunConfig) -> StopSet:
    if cfg.stopwords:
        return StopSet.from_paths(cfg.stopwords)
    return load_default_stops()


def _load_samples(path: str, logit_mode: str = "raw") -> list[Sample]:
    result = load_dataset(path, logit_mode)
    _fail_rows(list(result.errors))
    return list(result.samples)


_OFFSET_CODES = {"contiguity", "surface-mismatch", "eos-offset", "eos-not-last",
                 "multiple-eos"}


def _cmd_segment(cfg: RunConfig) -> int:
    stops = _load_stops(cfg)
    samples = _load_samples(cfg.input)
    bad: list[RowError] = []
    for s in samples:
        violations = validate_sample(s)
        if not cfg.strict:
            violations = [v for v in violations if v.code in _OFFSET_CODES]
        bad.extend(RowError(cfg.input, 0, f"{s.id}: {v.message}")
                   for v in violations)
    _fail_rows(bad)
    items = [(s.id, segment(s, stops)) for s in samples]
    write_partitions(cfg.output, items)
    n_claims = sum(p.n_scored_claims for _, p in items)
    log.info("segmented %d samples into %d claims", len(items), n_claims)
    print(cfg.output)
    return 0


def _cmd_score(cfg: RunConfig) -> int:
    samples = _load_samples(cfg.input, cfg.logit_mode)
    if (cfg.scorer is None) == (cfg.external is None):
        raise UsageError("pass exactly one of --scorer or --external")
    if cfg.external is not None:
        meta = _external_meta(cfg)
        counts = {s.id: len(s.tokens) for s in samples}
        vectors = ingest_external_scores(cfg.external, meta, counts)
        ordered = [vectors[s.id] for s in samples if s.id in vectors]
        if len(ordered) < len(samples):
            missing = [s.id for s in samples if s.id not in vectors]
            log.warning("external file covers %d/%d samples (first missing: %s)",
                        len(ordered), len(samples), missing[0])
    else:
        bad: list[RowError] = []
        for s in samples:
            bad.extend(RowError(cfg.input, 0, f"{s.id}: {v.message}")
                       for v in validate_sample(s))
        _fail_rows(bad)
        if cfg.scorer == "token_likelihood":
            ordered = [token_likelihood(s) for s in samples]
        elif cfg.scorer == "max_likelihood":
            ordered = [max_likelihood(s) for s in samples]
        else:
            config = ScorerConfig(entropy_top_k=cfg.entropy_top_k)
            ordered = [token_entropy(s, config) for s in samples]
    write_token_scores(cfg.output, ordered)
    print(cfg.output)
    return 0


def _external_meta(cfg: RunConfig) -> ExternalScoreMeta:
    sidecar = Path(cfg.external + ".meta.json")
    name = cfg.scorer_name
    orientation = cfg.orientation
    hyperparams: dict = {}
    if sidecar.exists():
        meta_raw = json.loads(sidecar.read_text(encoding="utf-8"))
        name = name or meta_raw.get("scorer_name")
        if orientation is None and "higher_is_more_uncertain" in meta_raw:
            orientation = ("uncertainty" if meta_raw["higher_is_more_uncertain"]
                           else "confidence")
        hyperparams = meta_raw.get("hyperparams", {})
    if not name or orientation is None:
        raise UsageError(
            "external scores need --scorer-name and --orientation "
            "(or a .meta.json sidecar)")
    return ExternalScoreMeta(
        scorer_name=name,
        higher_is_more_uncertain=orientation == "uncertainty",
        hyperparams=hyperparams,
    )


def _cmd_aggregate(cfg: RunConfig) -> int:
    vectors, errors = read_token_scores(cfg.scores)
    partitions, perrors = read_partitions(cfg.partitions)
    _fail_rows(errors + perrors)
    if (cfg.input is None) == (cfg.masks is None):
        raise UsageError("pass exactly one of --input or --masks")

    masks: dict[str, list[bool]] = {}
    if cfg.masks is not None:
        mask_errors: list[RowError] = []
        for lineno, row, err in read_rows(cfg.masks):
            if err is not None:
                mask_errors.append(RowError(cfg.masks, lineno, err))
                continue
            try:
                masks[row["sample_id"]] = [bool(b) for b in row["mask"]]
            except (KeyError, TypeError):
                mask_errors.append(RowError(cfg.masks, lineno, "malformed mask row"))
        _fail_rows(mask_errors)
    else:
        stops = _load_stops(cfg)
        for s in _load_samples(cfg.input):
            part = partitions.get(s.id)
            if part is not None:
                masks[s.id] = content_token_mask(s, part, stops)

    kind = AggregatorKind(cfg.agg)
    out = []
    missing: list[RowError] = []
    for vec in vectors:
        part = partitions.get(vec.sample_id)
        mask = masks.get(vec.sample_id)
        if part is None or mask is None:
            missing.append(RowError(
                cfg.scores, 0,
                f"{vec.sample_id}: no partition or mask for this sample"))
            continue
        out.append(aggregate(vec, part, mask, kind))
    _fail_rows(missing)
    write_claim_scores(cfg.output, out)
    print(cfg.output)
    return 0


def _read_annotation_map(
    path: str, annotator: str | None
) -> dict[str, AnnotationSet]:
    anns, errors = read_annotations(path)
    _fail_rows(errors)
    names = sorted({a.annotator for a in anns})
    if annotator is None:
        if len(names) > 1:
            raise UsageError(
                f"{path} has annotators {names}; pick one with --annotator")
        annotator = names[0] if names else ""
    picked = {a.sample_id: a for a in anns if a.annotator == annotator}
    if not picked:
        raise DataError([RowError(path, 0, f"no annotations by {annotator!r}")])
    return picked


def _cmd_evaluate(cfg: RunConfig) -> int:
    if cfg.agreement_with is not None:
        a = _read_annotation_map(cfg.annotations, cfg.annotator)
        b = _read_annotation_map(cfg.agreement_with, cfg.annotator_b)
        shared = sorted(set(a) & set(b))
        if not shared:
            raise DataError([RowError(cfg.agreement_with, 0,
                                      "no overlapping sample ids")])
        labels_a: list[int] = []
        labels_b: list[int] = []
        mismatched = [sid for sid in shared
                      if len(a[sid].labels) != len(b[sid].labels)]
        if mismatched:
            raise DataError([RowError(
                cfg.agreement_with, 0,
                f"claim counts differ for {len(mismatched)} samples "
                f"(first: {mismatched[0]})")])
        for sid in shared:
            labels_a.extend(a[sid].labels)
            labels_b.extend(b[sid].labels)
        report = cohen_kappa(labels_a, labels_b)
        _emit_json(cfg.output, report.to_dict())
        return 0

    if not cfg.claim_scores:
        raise UsageError("pass --claim-scores at least once")
    annotations = _read_annotation_map(cfg.annotations, cfg.annotator)
    meta: dict[str, tuple[str, str]] = {}
    if cfg.input:
        meta = {s.id: (s.language, s.model) for s in _load_samples(cfg.input)}
    for key in cfg.group_by:
        if key not in ("language", "model", "scorer", "aggregator"):
            raise UsageError(f"cannot group by {key!r}")
        if key in ("language", "model") and not meta:
            raise UsageError(f"--group-by {key} needs --input for metadata")

    rows = []  # (scorer, aggregator, language, model, score, label, orientation)
    errors: list[RowError] = []
    for path in cfg.claim_scores:
        sets, errs = read_claim_scores(path)
        errors.extend(errs)
        for cs in sets:
            ann = annotations.get(cs.sample_id)
            if ann is None:
                continue
            if len(ann.labels) != len(cs.values):
                errors.append(RowError(
                    path, 0,
                    f"{cs.sample_id}: {len(cs.values)} claim scores vs "
                    f"{len(ann.labels)} labels"))
                continue
            lang, model = meta.get(cs.sample_id, ("", ""))
            for value, label in zip(cs.values, ann.labels):
                rows.append((cs.scorer, cs.aggregator.value, lang, model,
                             value, label, cs.higher_is_more_uncertain))
    _fail_rows(errors)
    if not rows:
        raise DataError([RowError(cfg.annotations, 0,
                                  "no claim scores matched the annotations")])

    reports = []
    for scorer, agg in sorted({(r[0], r[1]) for r in rows}):
        pool = [r for r in rows if r[0] == scorer and r[1] == agg]
        reports.append(_pool_report(pool, scorer, agg, cfg))
    payload = (reports[0].to_dict() if len(reports) == 1
               else {"reports": [r.to_dict() for r in reports]})
    if cfg.out_dir:
        persist_results(cfg.out_dir, reports=reports)
    _emit_json(cfg.output, payload)
    return 0


def _pool_report(rows, scorer: str, agg: str, cfg: RunConfig) -> EvalReport:
    scores = [r[4] for r in rows]
    labels = [r[5] for r in rows]
    orientation = rows[0][6]
    report = evaluate_scores(
        scores, labels, orientation,
        scorer=scorer, aggregator=agg,
        fpr_cap=cfg.fpr_cap, prec_floor=cfg.prec_floor,
        with_curves=cfg.curves or bool(cfg.out_dir),
    )
    breakdowns: dict[str, dict[str, EvalReport | str]] = {}
    for key, col in (("language", 2), ("model", 3)):
        if key not in cfg.group_by:
            continue
        groups: dict[str, EvalReport | str] = {}
        for g in sorted({r[col] for r in rows}):
            sub = [r for r in rows if r[col] == g]
            try:
                groups[g] = evaluate_scores(
                    [r[4] for r in sub], [r[5] for r in sub], orientation,
                    scorer=scorer, aggregator=agg,
                    fpr_cap=cfg.fpr_cap, prec_floor=cfg.prec_floor,
                )
            except DegenerateLabelsError as exc:
                groups[g] = f"undefined: {exc}"
        breakdowns[key] = groups
    if breakdowns:
        report = EvalReport(
            **{**_report_kwargs(report), "breakdowns": breakdowns})
    return report


def _report_kwargs(report: EvalReport) -> dict:
    return {
        "scorer": report.scorer,
        "aggregator": report.aggregator,
        "roc_auc": report.roc_auc,
        "pr_auc": report.pr_auc,
        "tpr_at_fpr_cap": report.tpr_at_fpr_cap,
        "rec_at_prec_floor": report.rec_at_prec_floor,
        "fpr_cap": report.fpr_cap,
        "prec_floor": report.prec_floor,
        "n_pos": report.n_pos,
        "n_neg": report.n_neg,
        "roc_curve": report.roc_curve,
        "pr_curve": report.pr_curve,
    }


def _cmd_stats(cfg: RunConfig) -> int:
    result = load_dataset(cfg.input)
    _fail_rows(list(result.errors))
    samples = list(result.samples)
    payload: dict = {"composition": dataset_composition(samples)}
    annotations: dict[str, AnnotationSet] = {}
    if cfg.annotations:
        annotations = _read_annotation_map(cfg.annotations, cfg.annotator)
    elif result.annotations:
        names = result.annotators()
        chosen = cfg.annotator or names[0]
        annotations = dict(result.annotations.get(chosen, {}))
    if annotations:
        pairs = [(s, annotations[s.id]) for s in samples if s.id in annotations]
        if pairs:
            payload["hallucination"] = hallucination_stats(pairs).to_dict()
            payload["n_annotated"] = len(pairs)
            payload["n_claims"] = sum(len(a.labels) for _, a in pairs)
    _emit_json(cfg.output, payload)
    return 0


def _cmd_filter(cfg: RunConfig) -> int:
    result = load_dataset(cfg.input)
    _fail_rows(list(result.errors))
    samples = list(result.samples)
    ann_a = ann_b = None
    if cfg.annotations:
        if not cfg.annotator_a or not cfg.annotator_b:
            raise UsageError("--annotations needs --annotator-a and --annotator-b")
        ann_a = _read_annotation_map(cfg.annotations, cfg.annotator_a)
        ann_b = _read_annotation_map(cfg.annotations, cfg.annotator_b)
    elif cfg.annotator_a and cfg.annotator_b and result.annotations:
        ann_a = dict(result.annotations.get(cfg.annotator_a, {}))
        ann_b = dict(result.annotations.get(cfg.annotator_b, {}))
    outcome = apply_filters(samples, ann_a, ann_b)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kept_ids = set(outcome.kept)
    write_samples(out / "samples.jsonl", (s for s in samples if s.id in kept_ids))
    report = outcome.to_dict()
    report["n_input"] = len(samples)
    with open(out / "filter_report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")
    log.info("kept %d of %d samples (%s)", len(outcome.kept), len(samples),
             outcome.drop_counts)
    print(str(out / "samples.jsonl"))
    return 0


def _cmd_audit_tokenizer(cfg: RunConfig) -> int:
    samples = _load_samples(cfg.input)
    findings: dict[str, list[str]] = {
        "internal_period": [], "digit_comma": [], "curly_apostrophe": [],
        "fused_split": [], "long_punct_run": [],
    }
    for s in samples:
        for w in tokenize_words(s.generation_text):
            t = w.text
            if "." in t[:-1] and any(c.isalnum() for c in t):
                findings["internal_period"].append(t)
            if any(c in ",:" for c in t) and any(c.isdigit() for c in t):
                findings["digit_comma"].append(t)
            if "’" in t or "‘" in t:
                findings["curly_apostrophe"].append(t)
            if t.casefold() in ("can", "gon", "wan", "lem", "gim", "got") :
                findings["fused_split"].append(t)
            if len(t) > 3 and not any(c.isalnum() for c in t):
                findings["long_punct_run"].append(t)
    payload = {
        kind: {"count": len(hits), "examples": sorted(set(hits))[:20]}
        for kind, hits in findings.items()
    }
    _emit_json(cfg.output, payload)
    return 0


def _cmd_bench(cfg: RunConfig) -> int:
    stops = _load_stops(cfg)
    samples = _load_samples(cfg.input)
    start = time.perf_counter()
    n_claims = sum(segment(s, stops).n_scored_claims for s in samples)
    elapsed = time.perf_counter() - start
    payload = {
        "n_samples": len(samples),
        "n_claims": n_claims,
        "seconds": elapsed,
        "samples_per_second": len(samples) / elapsed if elapsed > 0 else None,
    }
    if cfg.generation_seconds:
        payload["fraction_of_generation"] = elapsed / cfg.generation_seconds
    _emit_json(None, payload)
    return 0


def _emit_json(path: str | None, payload: dict) -> None:
    blob = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(blob)
            fh.write("\n")
        print(path)
    else:
        print(blob)


class UsageError(ValueError):
    pass


_COMMANDS = {
    "segment": _cmd_segment,
    "score": _cmd_score,
    "aggregate": _cmd_aggregate,
    "evaluate": _cmd_evaluate,
    "stats": _cmd_stats,
    "filter": _cmd_filter,
    "audit-tokenizer": _cmd_audit_tokenizer,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _to_config(args)
    try:
        return _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
        return 2
    except (DataError, IngestError, AggregationError,
            DegenerateLabelsError, FileNotFoundError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
