"""Acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import io
import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from scipy import special

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import FIXTURE, random_signed_graph  # noqa: E402
from signed_ego.analytics import negativity_metrics  # noqa: E402
from signed_ego.cli import main, verify_chain  # noqa: E402
from signed_ego.egonet import Circle, ContactFrequency, EgoNetwork, build_ego_network, scaling_ratios  # noqa: E402
from signed_ego.ingest import Timeline, filter_egos, write_verdicts_csv, Reason  # noqa: E402
from signed_ego.signing import RelationshipProfile, Sign, sign_relationship  # noqa: E402
from signed_ego.stats import pearson_r, welch_ttest  # noqa: E402
from signed_ego.synthetic import make_corpus, dunbar_frequencies, T0  # noqa: E402
from signed_ego.triads import brute_force_census, census_triads, null_model_surprise, surprise  # noqa: E402

RESULTS: list[str] = []

# per classifier: (triad, count, expected fraction, reported surprise)
REFERENCE_TRIADS = {
    "VADER": [("T3", 16734, 0.212, 33.4), ("T2", 19018, 0.431, -64.1),
              ("T1", 16934, 0.287, -12.0), ("T0", 10020, 0.064, 94.9)],
    "BERTweet": [("T3", 21439, 0.232, 65.5), ("T2", 15771, 0.437, -93.8),
                 ("T1", 15057, 0.274, -18.8), ("T0", 10439, 0.057, 117.7)],
    "XLM-T": [("T3", 15873, 0.122, 100.1), ("T2", 12715, 0.372, -87.7),
              ("T1", 15946, 0.377, -63.6), ("T0", 18172, 0.128, 120.9)],
    "BERT-C": [("T3", 20683, 0.222, 64.8), ("T2", 15623, 0.435, -93.8),
               ("T1", 15366, 0.281, -20.2), ("T0", 11034, 0.062, 119.2)],
}


def record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


# --- 1 ------------------------------------------------------------------------


def check_1():
    def run():
        rows = []
        for model, block in REFERENCE_TRIADS.items():
            delta = sum(c for _, c, _, _ in block)
            assert delta == 62706
            for tri, count, p0, reported in block:
                s = surprise(count, delta * p0, delta, p0)
                rows.append((model, tri, s, reported, abs(s - reported) / abs(reported)))
        return rows

    rows, secs = timed(run)
    worst = max(rows, key=lambda r: r[4])
    bad = [f"{m} {t}: {s:.2f} vs {r}" for m, t, s, r, e in rows if e > 0.05]
    ok = not bad and secs < 1.0
    detail = f"worst {worst[0]} {worst[1]} rel err {worst[4]:.3f}; {secs:.3f}s"
    if bad:
        detail += "; outside 5%: " + ", ".join(bad)
    return ok, detail


# --- 2 ------------------------------------------------------------------------


def check_2():
    def run():
        cases = [(p, u, n) for p in range(13) for u in range(13) for n in range(13) if p + u + n <= 12]
        mismatches = 0
        for p, u, n in cases:
            if p + u + n == 0:
                continue  # no interactions: a documented error, not a sign
            want = Sign.NEGATIVE if 100 * n > 17 * (p + u + n) else Sign.POSITIVE
            mismatches += sign_relationship(p, u, n) is not want
        boundary = (sign_relationship(5, 0, 1) is Sign.POSITIVE and sign_relationship(4, 0, 1) is Sign.NEGATIVE)
        return len(cases), mismatches, boundary

    (n_cases, mismatches, boundary), secs = timed(run)
    ok = n_cases == 455 and mismatches == 0 and boundary and secs < 1.0
    return ok, f"{n_cases} triples, {mismatches} mismatches, 1/6 and 1/5 boundary {'ok' if boundary else 'wrong'}; {secs:.3f}s"


# --- 3 ------------------------------------------------------------------------


def check_3():
    def run():
        bad = 0
        for seed in range(50):
            g = random_signed_graph(seed, n=5 + seed % 26, p=0.3, p_neg=0.4)
            bad += census_triads(g).counts != brute_force_census(g.nodes, g.edges)
        return bad

    bad, secs = timed(run)
    return bad == 0 and secs < 5.0, f"{50 - bad}/50 graphs match brute force; {secs:.2f}s"


# --- 4 ------------------------------------------------------------------------


def check_4():
    within = 0
    totals_kept = True
    for trial in range(100):
        g = random_signed_graph(10_000 + trial, n=30, p=0.3, p_neg=0.4)
        rng = np.random.default_rng(trial)
        keys = sorted(g.edges)
        signs = [g.edges[k] for k in keys]
        g.edges = {k: signs[i] for k, i in zip(keys, rng.permutation(len(keys)))}
        rep = null_model_surprise(g, shuffles=10, seed=trial)
        totals_kept &= all(sum(c) == rep.delta for c in rep.shuffle_censuses)
        totals_kept &= (rep.n_positive, rep.n_negative) == (g.n_positive, g.n_negative)
        within += all(abs(s) < 4 for s in rep.surprise)
    # sign totals are also asserted inside every shuffle
    return within >= 95 and totals_kept, f"{within}/100 self-shuffled graphs with all |s| < 4; sign totals preserved: {totals_kept}"


# --- 5 ------------------------------------------------------------------------


def classifier_variant(corpus, seed, flip=0.1):
    """A second opinion on the same corpus: each label re-drawn with probability ``flip``."""
    rng = np.random.default_rng(seed)
    out = []
    for obj in corpus.lines:
        if "label" in obj and rng.random() < flip:
            obj = dict(obj, label=("pos", "neu", "neg")[int(rng.integers(3))])
        out.append(obj)
    return "".join(json.dumps(o, sort_keys=True) + "\n" for o in out)


def check_5():
    def run():
        corpus = make_corpus(7)
        verdicts = []
        with tempfile.TemporaryDirectory() as tmp:
            for k in range(4):
                src = Path(tmp) / f"model{k}.jsonl"
                src.write_text(corpus.dumps() if k == 0 else classifier_variant(corpus, k))
                wd = Path(tmp) / f"run{k}"
                code = main(["pipeline", str(src), "-w", str(wd), "--bandwidth", "0.5", "--seed", str(k)])
                if code != 0:
                    verdicts.append((k, math.nan, math.nan))
                    continue
                tri = json.loads((wd / "triads.json").read_text())["triads"]
                verdicts.append((k, tri["T3"]["surprise"], tri["T2"]["surprise"]))
        return verdicts

    verdicts, secs = timed(run)
    ok = all(s3 > 0 and s2 < 0 for _, s3, s2 in verdicts) and secs < 30.0
    detail = "; ".join(f"label set {k}: s(T3)={s3:+.1f} s(T2)={s2:+.1f}" for k, s3, s2 in verdicts)
    return ok, f"{detail}; {secs:.1f}s"


# --- 6 ------------------------------------------------------------------------


def check_6():
    target = np.array([2, 5, 15, 50, 150])

    def run():
        rows = []
        for seed in range(5):
            freqs, _ = dunbar_frequencies(seed)
            fs = [ContactFrequency("e", f"a{i:03d}", int(f), 1.0, float(f), True) for i, f in enumerate(freqs)]
            net = build_ego_network("e", fs)
            sizes = [c.size for c in net.circles]
            rows.append((seed, sizes, float(np.mean(scaling_ratios(sizes))) if len(sizes) > 1 else math.nan))
        return rows

    rows, secs = timed(run)
    ok = secs < 10.0
    for _, sizes, ratio in rows:
        ok &= len(sizes) == 5 and bool(np.all(np.abs(np.array(sizes) - target) <= 0.1 * target))
        ok &= 2.5 <= ratio <= 3.5
    detail = "; ".join(f"seed {s}: {sizes} ratio {r:.2f}" for s, sizes, r in rows[:2])
    return ok, f"{detail} (5 seeds); {secs:.2f}s"


# --- 7 ------------------------------------------------------------------------


def check_7():
    rng = np.random.default_rng(2024)
    worst = 0.0
    in_bounds = True
    for k in range(1000):
        n = int(rng.integers(1, 80))
        profs = [RelationshipProfile(f"e{k}", f"a{i:03d}", int(rng.integers(0, 40)), int(rng.integers(0, 6)),
                                     int(rng.integers(0, 12))) for i in range(n)]
        profs = [p for p in profs if p.n_total] or [RelationshipProfile(f"e{k}", "a000", 1)]
        names = [p.alter_id for p in profs]
        m = int(rng.integers(1, len(names) + 1))
        net = EgoNetwork(f"e{k}", [Circle(m, 1.0, names[:m])])
        v = negativity_metrics(net, profs)
        act = profs[:m]
        neg = [p for p in act if 100 * p.n_neg > 17 * p.n_total]
        tot = sum(p.n_total for p in act)
        want = (len(neg) / m, sum(p.n_neg for p in act) / tot, sum(p.n_total for p in neg) / tot)
        got = (v.l1, v.l2, v.l3)
        worst = max(worst, *(abs(a - b) for a, b in zip(got, want)))
        in_bounds &= all(0.0 <= g <= 1.0 for g in got)
    return worst <= 1e-12 and in_bounds, f"1000 egos, max |diff| {worst:.1e}, bounds held: {in_bounds}"


# --- 8 ------------------------------------------------------------------------


def check_8():
    rng = np.random.default_rng(8)
    worst_r = worst_t = worst_p = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 60))
        x = rng.normal(size=n)
        y = -0.5 * x + rng.normal(size=n)
        mx, my = x.sum() / n, y.sum() / n
        cov = ((x - mx) * (y - my)).sum()
        r_oracle = cov / math.sqrt(((x - mx) ** 2).sum() * ((y - my) ** 2).sum())
        worst_r = max(worst_r, abs(pearson_r(x, y) - r_oracle))

        a = rng.normal(0, rng.uniform(0.5, 3), int(rng.integers(2, 40)))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 3), int(rng.integers(2, 40)))
        n1, n2 = len(a), len(b)
        v1, v2 = a.var(ddof=1) / n1, b.var(ddof=1) / n2
        t = (a.mean() - b.mean()) / math.sqrt(v1 + v2)
        df = (v1 + v2) ** 2 / (v1 ** 2 / (n1 - 1) + v2 ** 2 / (n2 - 1))
        p = special.betainc(df / 2, 0.5, df / (df + t * t))
        res = welch_ttest(a, b)
        worst_t = max(worst_t, abs(res.t - t) / max(1.0, abs(t)))
        worst_p = max(worst_p, abs(res.p - p) / max(p, 1e-300) if p > 1e-300 else abs(res.p - p))
    same = welch_ttest([10, 10, 10, 10], [10, 10, 10, 10])
    same2 = welch_ttest([1.0, 4.0, 2.5], [1.0, 4.0, 2.5])
    null_ok = same.t == 0.0 and same.p == 1.0 and same2.t == 0.0 and same2.p == 1.0
    ok = worst_r <= 1e-9 and worst_t <= 1e-8 and worst_p <= 1e-8 and null_ok
    return ok, (f"pearson max err {worst_r:.1e}; welch t rel err {worst_t:.1e}, p rel err {worst_p:.1e}; "
                f"identical bins t=0 p=1: {null_ok}")


# --- 9 ------------------------------------------------------------------------


def months(n, per_month):
    out = {}
    y, m = 2020, 1
    for _ in range(n):
        out[f"{y:04d}-{m:02d}"] = per_month
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return out


def check_9():
    day = 86400
    compliant = [Timeline(f"ok{k}", (), 2000 + 500 * k, T0, T0 + (190 + 40 * k) * day,
                          months(7 + k, 11)) for k in range(5)]
    targeted = {
        Reason.TOO_FEW_TWEETS: Timeline("few", (), 1500, T0, T0 + 360 * day, months(12, 11)),
        Reason.SPAN_TOO_SHORT: Timeline("short", (), 2500, T0, T0 + 150 * day, months(5, 11)),
        Reason.IRREGULAR: Timeline("bursty", (), 2500, T0, T0 + 360 * day, {**months(12, 0), **months(3, 200)}),
    }
    ok = all(v.kept and not v.reasons for v in filter_egos(compliant))
    for reason, tl in targeted.items():
        (v,) = filter_egos([tl])
        ok &= (not v.kept) and v.reasons == (reason,)
    outputs = []
    for order in (compliant + list(targeted.values()), list(targeted.values())[::-1] + compliant[::-1]):
        buf = io.StringIO()
        write_verdicts_csv(filter_egos(order), buf)
        outputs.append(buf.getvalue().encode())
    deterministic = outputs[0] == outputs[1]
    return ok and deterministic, f"each rule triggers alone, compliant egos kept: {ok}; byte-identical verdicts: {deterministic}"


# --- 10 -----------------------------------------------------------------------


def check_10():
    def run():
        with tempfile.TemporaryDirectory() as tmp:
            dirs = [Path(tmp) / "a", Path(tmp) / "b", Path(tmp) / "c"]
            codes = [main(["pipeline", str(FIXTURE), "-w", str(d), "--bandwidth", "0.5", "--seed", "42", *extra])
                     for d, extra in zip(dirs, ([], [], ["--collapse", "both-negative"]))]
            files = sorted(p.name for p in dirs[0].iterdir())
            identical = all((dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes() for f in files)
            chain = verify_chain(dirs[0]) == []

            def edges(d):
                return {tuple(l.split()[:2]): l.split()[2] for l in (d / "graph.txt").read_text().splitlines()}

            ea, eb = edges(dirs[0]), edges(dirs[2])
            diff = {e for e in ea if ea[e] != eb[e]}
            ca = json.loads((dirs[0] / "triads.json").read_text())["triads"]
            cb = json.loads((dirs[2] / "triads.json").read_text())["triads"]
            censuses_differ = [ca[t]["count"] for t in sorted(ca)] != [cb[t]["count"] for t in sorted(cb)]
            return codes, len(files), identical, chain, diff, censuses_differ

    (codes, n_files, identical, chain, diff, censuses_differ), secs = timed(run)
    planted = set(make_corpus(0).mixed_pairs)
    ok = codes == [0, 0, 0] and identical and chain and diff == planted and censuses_differ
    return ok, (f"{n_files} files byte-identical: {identical}; manifest chain valid: {chain}; "
                f"collapse variants differ on {len(diff)} edges, planted {len(planted)}, match: {diff == planted}; {secs:.1f}s")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10]


def _run(n):
    ok, detail = CHECKS[n - 1]()
    assert record(n, ok, detail), RESULTS[-1]


def test_criterion_01_surprise_reproduction():
    _run(1)


def test_criterion_02_threshold_oracle():
    _run(2)


def test_criterion_03_triad_census_oracle():
    _run(3)


def test_criterion_04_null_model_sanity():
    _run(4)


def test_criterion_05_weak_balance_end_to_end():
    _run(5)


def test_criterion_06_circle_recovery():
    _run(6)


def test_criterion_07_negativity_metric_oracle():
    _run(7)


def test_criterion_08_statistics_oracles():
    _run(8)


def test_criterion_09_filtering():
    _run(9)


def test_criterion_10_pipeline_determinism():
    _run(10)


if __name__ == "__main__":
    failed = 0
    for n, check in enumerate(CHECKS, start=1):
        ok, detail = check()
        failed += not record(n, ok, detail)
    sys.exit(1 if failed else 0)
