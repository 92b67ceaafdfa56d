"""Command-line pipeline: ``signed-ego <stage> [options]``.

Stages hand off through files in a working directory.  Every artifact is
written next to ``<artifact>.manifest.json`` recording its hash, the hashes
of the artifacts it consumed, the configuration and library versions.

Exit status: 0 ok, 1 bad configuration, 2 input error, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .analytics import (
    METRICS,
    TARGETS,
    all_negativity_metrics,
    bin_and_test,
    circle_report,
    composition_report,
    correlate,
    negativity_full_vs_active,
)
from .egonet import build_ego_network, compute_frequencies, read_egonets_json, write_egonets_json
from .errors import ConfigError, DegenerateDataError, InputError
from .ingest import FilterRules, dump_timelines, filter_egos, parse_interactions, read_verdicts_csv, write_verdicts_csv
from .sentiment import classify_interaction, load_lexicon
from .signing import (
    GOLDEN_THRESHOLD,
    MIN_RELIABLE,
    build_profiles,
    compare_classifiers,
    group_by_ego,
    label_map,
    read_profiles_csv,
    write_profiles_csv,
)
from .triads import COLLAPSE_RULES, build_signed_graph, null_model_surprise, read_edgelist, write_edgelist

log = logging.getLogger("signed_ego")

TIMELINES = "timelines.jsonl"
VERDICTS = "verdicts.csv"
PROFILES = "profiles.csv"
EGONETS = "egonets.json"
TRIADS = "triads.json"
GRAPH = "graph.txt"
METRICS_FILE = "metrics.json"
REPORT = "report.json"
REPORT_CSV = "report.csv"
AGREEMENT = "agreement.json"

ALL_TABLES = (5, 6, 7, 8, 9, 10, 11, 12)


# --- helpers -------------------------------------------------------------------


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions() -> dict:
    return {"signed_ego": __version__, "numpy": np.__version__, "python": platform.python_version(),
            "kernels": "numba" if _kernels.USE_NUMBA else "numpy"}


def write_artifact(workdir: Path, name: str, content: str, stage: str, inputs: dict[str, Path],
                   config: dict) -> Path:
    path = workdir / name
    path.write_text(content, encoding="utf-8", newline="\n")
    manifest = {
        "stage": stage,
        "artifact": name,
        "sha256": sha256_file(path),
        "inputs": {k: sha256_file(p) for k, p in sorted(inputs.items())},
        "config": config,
        "versions": _versions(),
    }
    mpath = workdir / (name + ".manifest.json")
    mpath.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    return path


def read_manifest(workdir: Path, name: str) -> dict:
    return json.loads((workdir / (name + ".manifest.json")).read_text(encoding="utf-8"))


def verify_chain(workdir: Path) -> list[str]:
    """Check every manifest's recorded hashes against the files present.

    Returns a list of problems (empty when the chain validates).
    """
    problems = []
    for mpath in sorted(workdir.glob("*.manifest.json")):
        m = json.loads(mpath.read_text(encoding="utf-8"))
        art = workdir / m["artifact"]
        if not art.exists() or sha256_file(art) != m["sha256"]:
            problems.append(f"{m['artifact']}: hash mismatch")
        for name, digest in m["inputs"].items():
            p = Path(name) if Path(name).is_absolute() else workdir / name
            if p.exists() and sha256_file(p) != digest:
                problems.append(f"{m['artifact']}: input {name} changed")
            elif not p.exists():
                problems.append(f"{m['artifact']}: input {name} missing")
    return problems


def _require(workdir: Path, name: str) -> Path:
    p = workdir / name
    if not p.exists():
        raise InputError(f"missing input artifact {p}; run the earlier stage first")
    return p


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    return obj


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def _load_timelines(workdir: Path):
    with open(_require(workdir, TIMELINES), "rb") as fh:
        return parse_interactions(fh).timelines


def _profile_config(workdir: Path) -> tuple[Fraction, int, dict]:
    cfg = read_manifest(workdir, PROFILES)["config"]
    return Fraction(cfg["neg_threshold"]), int(cfg["min_reliable"]), cfg


def _load_profiles(workdir: Path):
    threshold, min_rel, _ = _profile_config(workdir)
    with open(_require(workdir, PROFILES), encoding="utf-8", newline="") as fh:
        return read_profiles_csv(fh, threshold, min_rel)


def _fraction_arg(text: str) -> Fraction:
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 <= f < 1:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 1)")
    return f


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


# --- stages ----------------------------------------------------------------------


def stage_ingest(args) -> None:
    src = Path(args.input)
    if not src.exists():
        raise InputError(f"no such file: {src}")
    with open(src, "rb") as fh:
        result = parse_interactions(fh)
    for lineno, name, msg in result.malformed:
        log.warning("line %d: %s: %s", lineno, name, msg)
    buf = io.StringIO()
    dump_timelines(result.timelines, buf)
    cfg = {"input": src.name, "lines": result.n_lines, "malformed": result.n_malformed}
    write_artifact(args.workdir, TIMELINES, buf.getvalue(), "ingest", {}, cfg | {"input_sha256": sha256_file(src)})
    log.info("ingested %d egos, %d malformed of %d lines", len(result.timelines), result.n_malformed, result.n_lines)


def stage_filter(args) -> None:
    rules = FilterRules(args.min_tweets, args.min_span_months, args.days_per_tweet)
    verdicts = filter_egos(_load_timelines(args.workdir), rules)
    buf = io.StringIO()
    write_verdicts_csv(verdicts, buf)
    cfg = {"min_tweets": rules.min_tweets, "min_span_months": rules.min_span_months,
           "days_per_tweet": rules.days_per_tweet, "max_irregular_share": rules.max_irregular_share}
    write_artifact(args.workdir, VERDICTS, buf.getvalue(), "filter", {TIMELINES: args.workdir / TIMELINES}, cfg)
    log.info("kept %d of %d egos", sum(v.kept for v in verdicts), len(verdicts))


def stage_sign(args) -> None:
    timelines = _load_timelines(args.workdir)
    inputs = {TIMELINES: args.workdir / TIMELINES}
    if not args.no_filter:
        with open(_require(args.workdir, VERDICTS), encoding="utf-8", newline="") as fh:
            kept = {v.ego_id for v in read_verdicts_csv(fh) if v.kept}
        timelines = [t for t in timelines if t.ego_id in kept]
        inputs[VERDICTS] = args.workdir / VERDICTS
    lexicon = load_lexicon(args.lexicon)
    labels = label_map(timelines, lambda r: classify_interaction(r, lexicon, args.labels_from))
    profiles = build_profiles(timelines, labels, args.neg_threshold, args.min_reliable)
    buf = io.StringIO()
    write_profiles_csv(profiles, buf)
    cfg = {"neg_threshold": str(args.neg_threshold), "min_reliable": args.min_reliable,
           "labels_from": args.labels_from, "lexicon_sha256": lexicon.sha256,
           "filtered": not args.no_filter}
    write_artifact(args.workdir, PROFILES, buf.getvalue(), "sign", inputs, cfg)
    log.info("signed %d relationships over %d egos", len(profiles), len(timelines))


def stage_egonet(args) -> None:
    timelines = {t.ego_id: t for t in _load_timelines(args.workdir)}
    profiles = group_by_ego(_load_profiles(args.workdir))
    if args.bandwidth is not None and not args.bandwidth > 0:
        raise ConfigError("--bandwidth must be positive")

    def one(ego):
        tl = timelines[ego]
        freqs = compute_frequencies(profiles[ego], (tl.first_tweet, tl.last_tweet), args.active_per_year)
        return build_ego_network(ego, freqs, args.bandwidth, args.bandwidth_quantile, args.log_space)

    egos = sorted(profiles)
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as ex:
            nets = list(ex.map(one, egos))
    else:
        nets = [one(e) for e in egos]
    _, _, pcfg = _profile_config(args.workdir)
    cfg = {"bandwidth": args.bandwidth, "bandwidth_quantile": args.bandwidth_quantile,
           "log_space": args.log_space, "active_per_year": args.active_per_year,
           "neg_threshold": pcfg["neg_threshold"], "min_reliable": pcfg["min_reliable"]}
    buf = io.StringIO()
    write_egonets_json(nets, buf, cfg)
    write_artifact(args.workdir, EGONETS, buf.getvalue(), "egonet",
                   {PROFILES: args.workdir / PROFILES, TIMELINES: args.workdir / TIMELINES}, cfg)
    log.info("built %d ego networks", len(nets))


def stage_triads(args) -> None:
    if args.graph:
        gpath = Path(args.graph)
        if not gpath.exists():
            raise InputError(f"no such file: {gpath}")
        with open(gpath, encoding="utf-8") as fh:
            graph = read_edgelist(fh)
        inputs = {}
        cfg = {"graph": gpath.name, "graph_sha256": sha256_file(gpath)}
    else:
        graph = build_signed_graph(_load_profiles(args.workdir), args.collapse)
        buf = io.StringIO()
        write_edgelist(graph, buf)
        _, _, pcfg = _profile_config(args.workdir)
        cfg = {"collapse": args.collapse, "neg_threshold": pcfg["neg_threshold"],
               "min_reliable": pcfg["min_reliable"]}
        write_artifact(args.workdir, GRAPH, buf.getvalue(), "triads", {PROFILES: args.workdir / PROFILES}, cfg)
        inputs = {GRAPH: args.workdir / GRAPH}
    report = null_model_surprise(graph, args.shuffles, args.seed, args.jobs)
    cfg = cfg | {"shuffles": args.shuffles, "seed": args.seed}
    write_artifact(args.workdir, TRIADS, _dump({"config": cfg, **report.to_json()}), "triads", inputs, cfg)
    s = report.surprise
    log.info("triads %s surprise T0..T3 = %.2f %.2f %.2f %.2f", report.observed, *s)


def stage_metrics(args) -> None:
    nets = _read_nets(args.workdir)
    profiles = _load_profiles(args.workdir)
    vectors = all_negativity_metrics(nets, profiles, n_circles=args.circles)
    if not vectors:
        raise DegenerateDataError(f"no egos with exactly {args.circles} circles")
    bins = {m: bin_and_test(vectors, m).to_json() for m in METRICS}
    corr = [correlate(vectors, m, t).__dict__ for m in METRICS for t in TARGETS]
    _, _, pcfg = _profile_config(args.workdir)
    cfg = {"circles": args.circles, "neg_threshold": pcfg["neg_threshold"], "min_reliable": pcfg["min_reliable"]}
    doc = {"config": cfg, "vectors": [v.__dict__ for v in vectors], "bins": bins, "correlations": corr}
    write_artifact(args.workdir, METRICS_FILE, _dump(doc), "metrics",
                   {EGONETS: args.workdir / EGONETS, PROFILES: args.workdir / PROFILES}, cfg)
    log.info("metrics for %d egos", len(vectors))


def _read_nets(workdir: Path):
    with open(_require(workdir, EGONETS), encoding="utf-8") as fh:
        return read_egonets_json(fh)


def stage_report(args) -> None:
    wd = args.workdir
    tables = _parse_tables(args.tables)
    nets = _read_nets(wd)
    profiles = _load_profiles(wd)
    kept = {n.ego_id for n in nets}
    timelines = [t for t in _load_timelines(wd) if t.ego_id in kept]
    with open(_require(wd, METRICS_FILE), encoding="utf-8") as fh:
        metrics = json.load(fh)
    with open(_require(wd, TRIADS), encoding="utf-8") as fh:
        triads = json.load(fh)

    _, _, pcfg = _profile_config(wd)
    out: dict = {"config": {"tables": list(tables), "neg_threshold": pcfg["neg_threshold"],
                            "min_reliable": pcfg["min_reliable"],
                            "egonet": read_manifest(wd, EGONETS)["config"],
                            "triads": triads["config"]}}
    share = negativity_full_vs_active(profiles, nets)
    out["ci_methods"] = {"proportions": "normal approximation, 95%, percentage points",
                         "means": "Student t, 95%"}
    out["negativity_full_vs_active"] = share.__dict__
    out["triads"] = {k: triads[k] for k in ("triads", "delta", "weak_balance")}
    if set(tables) & {5, 6, 7, 8, 9}:
        cr = circle_report(nets, profiles)
        out["mean_n_circles"] = cr.mean_n_circles
        if 5 in tables:
            out["circle_sizes"] = {"n_egos": cr.n_egos, "mean_size": cr.mean_size, "ci95": cr.size_ci}
        if 6 in tables:
            out["size_ratios"] = {"ratios": cr.size_ratios, "mean": cr.mean_size_ratio}
        if 7 in tables:
            out["interactions_per_alter"] = cr.interactions_per_alter
        if 8 in tables:
            out["negative_per_circle"] = {"mean_count": cr.mean_negative, "mean_pct": cr.mean_negative_pct,
                                      "difference_pp": cr.mean_negative_pct[-1] - cr.mean_negative_pct[0]}
        if 9 in tables:
            out["negative_ratios"] = {"ratios": cr.negative_ratios, "mean": cr.mean_negative_ratio}
    for tab, target in ((10, "active_size"), (11, "total_interactions")):
        if tab in tables:
            out[f"p_values_{target}"] = {
                m: {row["pair"]: row["p"] for row in metrics["bins"][m]["tests"][target]} for m in METRICS}
    if 12 in tables:
        out["composition"] = composition_report(timelines).to_json()
    inputs = {n: wd / n for n in (EGONETS, PROFILES, TIMELINES, METRICS_FILE, TRIADS)}
    write_artifact(wd, REPORT, _dump(out), "report", inputs, out["config"])
    write_artifact(wd, REPORT_CSV, _flatten_csv(_jsonable(out)), "report", {REPORT: wd / REPORT}, out["config"])
    log.info("report written with tables %s", ",".join(map(str, tables)))


def _flatten_csv(doc: dict) -> str:
    """Long-format ``section,key,value`` rows; nested keys joined with ``.``."""
    rows = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else str(k), obj[k])
        elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
            for i, v in enumerate(obj):
                walk(f"{prefix}.{i}", v)
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                rows.append((prefix, str(i + 1), v))
        else:
            rows.append((prefix, "", obj))

    for section in sorted(k for k in doc if k != "config"):
        walk(section, doc[section])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("key", "index", "value"))
    for key, idx, val in rows:
        w.writerow((key, idx, "" if val is None else (repr(val) if isinstance(val, float) else val)))
    return buf.getvalue()


def _parse_tables(text: str) -> tuple[int, ...]:
    if text == "all":
        return ALL_TABLES
    try:
        tabs = tuple(sorted({int(t) for t in text.split(",") if t.strip()}))
    except ValueError:
        raise ConfigError(f"bad --tables value {text!r}") from None
    bad = [t for t in tabs if t not in ALL_TABLES]
    if bad or not tabs:
        raise ConfigError(f"--tables must be drawn from {ALL_TABLES}")
    return tabs


def stage_agree(args) -> None:
    models = {}
    for spec in args.model:
        name, sep, path = spec.partition("=")
        if not sep or not name:
            raise ConfigError(f"--model expects NAME=PATH, got {spec!r}")
        models[name] = Path(path)
    if len(models) < 2:
        raise ConfigError("need at least two --model entries")
    lexicon = load_lexicon(args.lexicon)
    base = None
    label_sets = {}
    for name, path in models.items():
        if not path.exists():
            raise InputError(f"no such file: {path}")
        with open(path, "rb") as fh:
            tls = parse_interactions(fh).timelines
        if base is None:
            base = tls
        label_sets[name] = label_map(tls, lambda r: classify_interaction(r, lexicon, args.labels_from))
    report = compare_classifiers(base, label_sets, args.neg_threshold, args.min_reliable)
    cfg = {"models": {k: sha256_file(p) for k, p in models.items()},
           "neg_threshold": str(args.neg_threshold), "min_reliable": args.min_reliable}
    write_artifact(args.workdir, AGREEMENT, _dump({"config": cfg, **report.to_json()}), "agree", {}, cfg)


def stage_pipeline(args) -> None:
    for stage in (stage_ingest, stage_filter, stage_sign, stage_egonet, stage_triads, stage_metrics, stage_report):
        stage(args)
    problems = verify_chain(args.workdir)
    if problems:
        raise InputError("manifest chain broken: " + "; ".join(problems))


# --- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_sign_opts(p):
    p.add_argument("--lexicon", default=None,
                   help="valence lexicon TSV (default: bundled ~7.5k-entry lexicon)")
    p.add_argument("--labels-from", choices=("precomputed", "text"), default="precomputed",
                   help="use records' own labels when present, or always score text "
                        "(default: precomputed; retweets are always neutral)")
    p.add_argument("--neg-threshold", type=_fraction_arg, default=GOLDEN_THRESHOLD,
                   help="a relationship is negative when its negative share exceeds this "
                        "(default: 0.17, the 1:5 golden interaction ratio)")
    p.add_argument("--min-reliable", type=int, default=MIN_RELIABLE,
                   help="interactions needed for a reliable sign (default: 6)")


def _add_filter_opts(p):
    p.add_argument("--min-tweets", type=int, default=2000, help="minimum timeline tweets (default: 2000)")
    p.add_argument("--min-span-months", type=float, default=6.0,
                   help="minimum first-to-last tweet span in months (default: 6)")
    p.add_argument("--days-per-tweet", type=int, default=3,
                   help="a month is regular with at least one tweet per this many days "
                        "(default: 3); egos irregular in more than half their months are dropped")


def _add_egonet_opts(p):
    p.add_argument("--bandwidth", type=float, default=None,
                   help="mean-shift bandwidth in clustering space (default: estimated)")
    p.add_argument("--bandwidth-quantile", type=float, default=0.3,
                   help="pairwise-distance quantile for the estimated bandwidth (default: 0.3)")
    p.add_argument("--log-space", type=_on_off, default=True, metavar="{on,off}",
                   help="cluster log frequencies (default: on)")
    p.add_argument("--active-per-year", type=float, default=1.0,
                   help="minimum contacts per year for an active alter (default: 1)")


def _add_triad_opts(p):
    p.add_argument("--shuffles", type=int, default=10, help="sign shuffles in the null model (default: 10)")
    p.add_argument("--seed", type=int, default=0, help="null-model RNG seed (default: 0)")
    p.add_argument("--collapse", choices=COLLAPSE_RULES, default="any-negative",
                   help="directed-to-undirected sign rule (default: any-negative)")


def _add_report_opts(p):
    p.add_argument("--tables", default="all", help="comma-separated report sections among 5-12, or 'all' (see README)")
    p.add_argument("--circles", type=int, default=5,
                   help="negativity metrics use egos with exactly this many circles (default: 5)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="signed-ego", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def stage(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-w", "--workdir", type=Path, default=Path("out"),
                       help="directory holding stage artifacts (default: out)")
        p.add_argument("--jobs", type=int, default=1, help="worker threads (default: 1)")
        p.set_defaults(func=func)
        return p

    p = stage("ingest", stage_ingest, "parse a JSON Lines interaction log")
    p.add_argument("input")
    _add_filter_opts(stage("filter", stage_filter, "apply ego activity filters"))
    p = stage("sign", stage_sign, "label interactions and sign relationships")
    _add_sign_opts(p)
    p.add_argument("--no-filter", action="store_true", help="ignore verdicts.csv and keep every ego")
    _add_egonet_opts(stage("egonet", stage_egonet, "cluster alters into ego circles"))
    p = stage("triads", stage_triads, "triad census with the sign-shuffle null model")
    _add_triad_opts(p)
    p.add_argument("--graph", default=None, help="read an edge list 'u v sign' instead of profiles.csv")
    p = stage("metrics", stage_metrics, "negativity metrics, bins, t-tests and correlations")
    p.add_argument("--circles", type=int, default=5,
                   help="use egos with exactly this many circles (default: 5)")
    p = stage("report", stage_report, "summary tables (sections 5-12)")
    p.add_argument("--tables", default="all", help="comma-separated report sections among 5-12, or 'all' (see README)")
    p = stage("agree", stage_agree, "agreement between label sets of several classifiers")
    p.add_argument("--model", action="append", default=[], help="NAME=PATH of a labelled log (repeatable)")
    _add_sign_opts(p)
    p = stage("pipeline", stage_pipeline, "run ingest through report")
    p.add_argument("input")
    p.add_argument("--no-filter", action="store_true")
    _add_filter_opts(p)
    _add_sign_opts(p)
    _add_egonet_opts(p)
    _add_triad_opts(p)
    _add_report_opts(p)
    p.set_defaults(graph=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, --help exits 0
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.jobs < 1 or getattr(args, "shuffles", 1) < 1:
        print("signed-ego: configuration error: --jobs and --shuffles must be >= 1", file=sys.stderr)
        return 1
    try:
        args.workdir.mkdir(parents=True, exist_ok=True)
        args.func(args)
    except ConfigError as exc:
        print(f"signed-ego: configuration error: {exc}", file=sys.stderr)
        return 1
    except DegenerateDataError as exc:
        print(f"signed-ego: degenerate data: {exc}", file=sys.stderr)
        return 3
    except (InputError, OSError, json.JSONDecodeError, KeyError, csv.Error) as exc:
        print(f"signed-ego: input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
