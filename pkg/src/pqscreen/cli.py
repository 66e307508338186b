"""Command-line interface.

Subcommands: synth, cv, train, score, importance, compare, correlate,
serve. Every randomized command takes an explicit --seed, every run writes
its fully resolved configuration next to its outputs, and failures exit
nonzero with a single machine-parsable error line.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .artifacts import (
    ArtifactError,
    data_fingerprint,
    load_artifact,
    model_from_artifact,
    model_to_artifact,
    save_artifact,
)
from .cohort import (
    FEATURE_NAMES,
    PQ_ITEM_NAMES,
    REFERENCE_MOMENTS,
    REFERENCE_VISITS_NORMAL,
    REFERENCE_VISITS_PD,
    group_moments_of,
    load_cohort,
    synthesize_cohort,
    write_cohort,
)
from .evaluation import (
    CVReport,
    MODELS,
    SELECTORS,
    _fit_model,
    _fit_selector,
    _tune_hyperparameters,
    compare_classifiers,
    correlation_with_hy,
    run_nested_cv,
)
from .learn import ForestModel, permutation_importance
from .serve import DEFAULT_PORT, ScoringService, serve as _serve

_EXIT_USAGE = 2
_EXIT_FAILURE = 1


def _resolved_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["toolkit_version"] = __version__
    return cfg


def _write_run_config(out_path: str, args: argparse.Namespace) -> None:
    with open(str(out_path) + ".run.json", "w", encoding="utf-8") as fh:
        json.dump(_resolved_config(args), fh, indent=2, default=str)


def cmd_synth(args) -> int:
    cohort = synthesize_cohort(
        REFERENCE_MOMENTS,
        n_normal_subjects=args.normals,
        n_pd_subjects=args.pd,
        visits_normal=args.visits_normal,
        visits_pd=args.visits_pd,
        seed=args.seed,
    )
    write_cohort(cohort, args.out)
    _write_run_config(args.out, args)
    moments_out = args.moments_out or str(args.out) + ".moments.csv"
    achieved = group_moments_of(cohort)
    with open(moments_out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["feature", "class", "target_mean", "achieved_mean", "target_sd", "achieved_sd"]
        )
        for label, name in ((0, "normal"), (1, "pd")):
            t_mean, t_sd = REFERENCE_MOMENTS.for_class(label)
            a_mean, a_sd = achieved.for_class(label)
            for j, feat in enumerate(FEATURE_NAMES):
                w.writerow([feat, name, t_mean[j], repr(a_mean[j]), t_sd[j], repr(a_sd[j])])
    n_n, n_p = cohort.class_counts()
    print(f"wrote {args.out}: {len(cohort)} observations ({n_n} normal, {n_p} PD)")
    print(f"wrote {moments_out}")
    return 0


def cmd_cv(args) -> int:
    cohort = load_cohort(args.data)
    selectors = list(SELECTORS) if args.selector == "all" else [args.selector]
    models = list(MODELS) if args.model == "all" else [args.model]
    reports = []
    for selector in selectors:
        for model in models:
            report = run_nested_cv(
                cohort,
                scheme=args.scheme,
                selector=selector,
                model=model,
                k=args.k,
                repetitions=args.reps,
                seed=args.seed,
                tune_budget=args.tune_budget,
                jobs=args.jobs,
            )
            reports.append(report)
            suffix = f".{selector}.{model}" if len(selectors) * len(models) > 1 else ""
            base = f"{args.out_prefix}{suffix}"
            report.to_json(base + ".json")
            report.write_records_csv(base + ".records.csv")
            agg = report.aggregates
            cells = "  ".join(
                f"{m}={agg[m]['mean']:.4f} [{agg[m]['ci_low']:.4f}, {agg[m]['ci_high']:.4f}]"
                for m in ("accuracy", "sensitivity", "specificity", "auc")
            )
            print(f"{selector}+{model} ({args.scheme}): {cells}")
    _write_run_config(args.out_prefix + ".cv", args)
    print(f"wrote {len(reports)} report(s) with prefix {args.out_prefix}")
    return 0


def cmd_train(args) -> int:
    cohort = load_cohort(args.data)
    selector = None
    feature_names = FEATURE_NAMES
    X = cohort.X
    if args.selector != "none":
        selector = _fit_selector(cohort, args.selector, args.seed, {})
        X = selector.transform(X)
        if hasattr(selector, "names"):
            feature_names = selector.names()
        else:
            feature_names = tuple(f"PC{i + 1}" for i in range(X.shape[1]))
    units = cohort.subject_ids.astype(str)
    hp = _tune_hyperparameters(
        args.model, X, cohort.y, units, "record_wise", args.tune_budget, args.seed
    )
    model = _fit_model(args.model, X, cohort.y, hp, args.seed)
    artifact = model_to_artifact(
        model,
        selector=selector,
        feature_names=feature_names,
        model_id=os.path.splitext(os.path.basename(args.out))[0],
        metadata={
            "seed": args.seed,
            "hyperparameters": {k: v for k, v in hp.items() if v is not None},
            "data_fingerprint": data_fingerprint(cohort.X, cohort.y),
            "selector_kind": args.selector,
            "data_path": str(args.data),
        },
    )
    save_artifact(artifact, args.out)
    _write_run_config(args.out, args)
    print(f"wrote {args.out} ({args.model} model, {X.shape[1]} inputs)")
    return 0


def _parse_item_settings(pairs) -> dict:
    features = {name: 0 for name in PQ_ITEM_NAMES}
    for pair in pairs or []:
        if "=" not in pair:
            raise ArtifactError(f"--set expects ITEM=VALUE, got {pair!r}")
        name, _, raw = pair.partition("=")
        name = name.strip()
        if name not in PQ_ITEM_NAMES:
            raise ArtifactError(f"unknown questionnaire item {name!r}")
        features[name] = int(raw)
    return features


def cmd_score(args) -> int:
    artifact = load_artifact(args.model)
    service = ScoringService(artifact)
    if args.json:
        with open(args.json, encoding="utf-8") as fh:
            body = json.load(fh)
        status, payload = service.handle_score_body(json.dumps(body).encode())
        if status != 200:
            raise ArtifactError(f"invalid score request: {payload['errors']}")
    else:
        features = _parse_item_settings(args.set)
        status, payload = service.handle_score_body(
            json.dumps({"features": features, "age": args.age, "gender": args.gender}).encode()
        )
        if status != 200:
            raise ArtifactError(f"invalid score request: {payload['errors']}")
    print(f"model: {payload['model_id']}")
    print(f"probability: {payload['probability']!r}")
    if payload["linear_score"] is not None:
        print(f"linear_score: {payload['linear_score']!r}")
        print(f"intercept: {payload['intercept']!r}")
        for c in sorted(payload["contributions"], key=lambda c: -abs(c["contribution"])):
            print(f"contribution {c['feature']}={c['value']:g}: {c['contribution']!r}")
    return 0


def cmd_importance(args) -> int:
    artifact = load_artifact(args.model)
    model, selector, feature_names = model_from_artifact(artifact)
    if not isinstance(model, ForestModel):
        raise ArtifactError("importance requires a forest artifact")
    if not args.data:
        raise ArtifactError(
            "the artifact stores no training data; rerun with --data pointing "
            "at the training cohort"
        )
    cohort = load_cohort(args.data)
    fingerprint = artifact.get("metadata", {}).get("data_fingerprint")
    if fingerprint and fingerprint != data_fingerprint(cohort.X, cohort.y):
        raise ArtifactError("--data does not match the cohort this artifact was trained on")
    X = selector.transform(cohort.X) if selector is not None else cohort.X
    scores = permutation_importance(model, X, cohort.y, seed=args.seed)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["feature", "importance"])
        for name, s in zip(feature_names, scores.scores):
            w.writerow([name, repr(float(s))])
    _write_run_config(args.out, args)
    print(f"wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    reports = [CVReport.from_json(p) for p in args.reports]
    table = compare_classifiers(reports, metric=args.metric, alpha=args.alpha)
    table.write_csv(args.out)
    _write_run_config(args.out, args)
    print(f"anova F={table.anova.statistic:.4f} p={table.anova.p_value:.3e}")
    for row in table.rows:
        marks = ("best" if row.is_best else "") + (
            " differs" if row.differs_from_best else ""
        )
        print(
            f"{row.label}: {row.mean:.4f} [{row.ci_low:.4f}, {row.ci_high:.4f}] {marks}".rstrip()
        )
    print(f"wrote {args.out}")
    return 0


def cmd_correlate(args) -> int:
    cohort = load_cohort(args.data)
    table = correlation_with_hy(cohort)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["feature", "spearman_rho", "p_value"])
        for name, res in table.items():
            w.writerow([name, repr(res.statistic), repr(res.p_value)])
    _write_run_config(args.out, args)
    print(f"wrote {args.out} ({len(table)} correlations)")
    return 0


def cmd_serve(args) -> int:
    _serve(args.model, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqscreen",
        description="Early-PD screening toolkit: synthetic cohorts, nested CV, scoring.",
    )
    parser.add_argument("--version", action="version", version=f"pqscreen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a calibrated synthetic cohort CSV")
    p.add_argument("--normals", type=int, required=True, help="healthy-normal subject count")
    p.add_argument("--pd", type=int, required=True, help="early-PD subject count")
    p.add_argument("--visits-normal", type=float, default=REFERENCE_VISITS_NORMAL)
    p.add_argument("--visits-pd", type=float, default=REFERENCE_VISITS_PD)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--moments-out", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cv", help="run repeated nested cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--scheme", choices=["subject", "record"], required=True)
    p.add_argument("--selector", choices=list(SELECTORS) + ["all"], required=True)
    p.add_argument("--model", choices=list(MODELS) + ["all"], required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tune-budget", type=int, default=0)
    p.add_argument("--jobs", type=int, default=int(os.environ.get("PQSCREEN_JOBS", "1")))
    p.add_argument("--out-prefix", default="cvreport")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("train", help="fit a model on the full cohort and save an artifact")
    p.add_argument("--data", required=True)
    p.add_argument("--selector", choices=list(SELECTORS) + ["none"], default="none")
    p.add_argument("--model", choices=list(MODELS), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tune-budget", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score one observation with a model artifact")
    p.add_argument("--model", default="paper-eq1")
    p.add_argument("--set", action="append", metavar="ITEM=VALUE")
    p.add_argument("--age", type=float, default=0.0)
    p.add_argument("--gender", type=int, choices=[0, 1], default=0)
    p.add_argument("--json", default=None, help="read a full score request from a JSON file")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("importance", help="permutation importance of a forest artifact")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("compare", help="ANOVA + Tukey-Kramer over CV reports")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--metric", choices=["accuracy", "sensitivity", "specificity", "auc"],
                   default="auc")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("correlate", help="Spearman correlation of features with HY stage")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("serve", help="run the HTTP scoring service")
    p.add_argument("--model", default="paper-eq1")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return _EXIT_FAILURE
    except Exception as e:  # single-line machine-parsable failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return _EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
