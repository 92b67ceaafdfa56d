"""Dataset-level statistics over signed ego networks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .egonet import EgoNetwork, scaling_ratios
from .errors import EmptyActiveNetwork, EmptyDataset, NoFiveCircleEgos, TooFewEgos
from .ingest import Kind, Timeline
from .signing import RelationshipProfile, Sign, group_by_ego, nearest_rank
from .stats import box_stats, mean_ci, pearson_lower_p, pearson_r, proportion_ci, welch_ttest

METRICS = ("l1", "l2", "l3")
TARGETS = ("active_size", "total_interactions")
N_BINS = 4
BIN_PAIRS = tuple(combinations(range(N_BINS), 2))


def _index(profiles: Iterable[RelationshipProfile]) -> dict[tuple[str, str], RelationshipProfile]:
    return {(p.ego_id, p.alter_id): p for p in profiles}


# --- full vs active negativity -------------------------------------------


@dataclass
class NegativityShare:
    full_pct: float
    full_ci: float
    n_full: int
    active_pct: float
    active_ci: float
    n_active: int


def negativity_full_vs_active(profiles: Iterable[RelationshipProfile],
                              egonets: Iterable[EgoNetwork]) -> NegativityShare:
    """Percentage of negative relationships over all vs active relationships.

    Only egos present in ``egonets`` count.  CIs are 95% normal-approximation
    half-widths in percentage points.
    """
    nets = {n.ego_id: n for n in egonets}
    full = [p for p in profiles if p.ego_id in nets]
    if not full:
        raise EmptyDataset("no relationships for the given egos")
    active_sets = {e: set(n.active_alters) for e, n in nets.items()}
    active = [p for p in full if p.alter_id in active_sets[p.ego_id]]
    k_full = sum(p.sign is Sign.NEGATIVE for p in full)
    k_act = sum(p.sign is Sign.NEGATIVE for p in active)
    return NegativityShare(
        100.0 * k_full / len(full), 100.0 * proportion_ci(k_full, len(full)), len(full),
        100.0 * k_act / len(active) if active else math.nan,
        100.0 * proportion_ci(k_act, len(active)) if active else math.nan, len(active))


# --- circle report -----------------------------------------------------------


@dataclass
class CircleReport:
    n_egos: int
    mean_size: list[float]
    size_ci: list[float]
    interactions_per_alter: list[float]
    mean_negative: list[float]
    mean_negative_pct: list[float]
    size_ratios: list[float]
    negative_ratios: list[float]
    mean_n_circles: float = math.nan

    @property
    def mean_size_ratio(self) -> float:
        return math.fsum(self.size_ratios) / len(self.size_ratios)

    @property
    def mean_negative_ratio(self) -> float:
        r = [v for v in self.negative_ratios if math.isfinite(v)]
        return math.fsum(r) / len(r) if r else math.nan

    def to_json(self) -> dict:
        d = asdict(self)
        d["mean_size_ratio"] = self.mean_size_ratio
        d["mean_negative_ratio"] = self.mean_negative_ratio
        return d


def circle_report(egonets: Iterable[EgoNetwork], profiles: Iterable[RelationshipProfile],
                  n_circles: int = 5) -> CircleReport:
    """Per-circle means over egos with exactly ``n_circles`` circles.

    Circles are cumulative.  Interactions per alter is the mean over egos of
    (interactions with the circle's alters) / (circle size).  Scaling ratios
    are taken between consecutive circle means.
    """
    nets = list(egonets)
    index = _index(profiles)
    chosen = [n for n in nets if n.n_circles == n_circles]
    if not chosen:
        raise NoFiveCircleEgos(f"no egos with exactly {n_circles} circles")
    sizes = [[] for _ in range(n_circles)]
    per_alter = [[] for _ in range(n_circles)]
    neg = [[] for _ in range(n_circles)]
    neg_pct = [[] for _ in range(n_circles)]
    for net in chosen:
        for k, c in enumerate(net.circles):
            profs = [index[(net.ego_id, a)] for a in c.alters]
            n_neg = sum(p.sign is Sign.NEGATIVE for p in profs)
            sizes[k].append(c.size)
            per_alter[k].append(sum(p.n_total for p in profs) / c.size)
            neg[k].append(n_neg)
            neg_pct[k].append(100.0 * n_neg / c.size)

    def mean(v):
        return math.fsum(v) / len(v)

    mean_size = [mean(v) for v in sizes]
    mean_neg = [mean(v) for v in neg]
    neg_ratios = [b / a if a > 0 else math.nan for a, b in zip(mean_neg, mean_neg[1:])]
    return CircleReport(
        n_egos=len(chosen),
        mean_size=mean_size,
        size_ci=[mean_ci(v) for v in sizes],
        interactions_per_alter=[mean(v) for v in per_alter],
        mean_negative=mean_neg,
        mean_negative_pct=[mean(v) for v in neg_pct],
        size_ratios=scaling_ratios(mean_size),
        negative_ratios=neg_ratios,
        mean_n_circles=mean([n.n_circles for n in nets]) if nets else math.nan,
    )


# --- negativity metrics -----------------------------------------------------


@dataclass(frozen=True)
class NegativityVector:
    ego_id: str
    l1: float
    l2: float
    l3: float
    active_size: int
    total_interactions: int

    def metric(self, name: str) -> float:
        return getattr(self, name)


def negativity_metrics(net: EgoNetwork, profiles: Iterable[RelationshipProfile]) -> NegativityVector:
    """Negative-alter share, negative-interaction share and share of
    interactions spent in negative relationships, over the active network."""
    index = {p.alter_id: p for p in profiles if p.ego_id == net.ego_id}
    active = [index[a] for a in net.active_alters]
    if not active:
        raise EmptyActiveNetwork(f"ego {net.ego_id!r} has no active alters")
    total = sum(p.n_total for p in active)
    if total == 0:
        raise EmptyActiveNetwork(f"ego {net.ego_id!r} has no active interactions")
    negative = [p for p in active if p.sign is Sign.NEGATIVE]
    return NegativityVector(
        net.ego_id,
        len(negative) / len(active),
        sum(p.n_neg for p in active) / total,
        sum(p.n_total for p in negative) / total,
        len(active),
        total,
    )


def all_negativity_metrics(egonets: Iterable[EgoNetwork], profiles: Iterable[RelationshipProfile],
                           n_circles: int | None = 5) -> list[NegativityVector]:
    by_ego = group_by_ego(profiles)
    out = []
    for net in sorted(egonets, key=lambda n: n.ego_id):
        if n_circles is not None and net.n_circles != n_circles:
            continue
        out.append(negativity_metrics(net, by_ego.get(net.ego_id, [])))
    return out


# --- binning and tests -------------------------------------------------------


@dataclass
class BinReport:
    metric: str
    edges: list[float]
    bins: list[list[str]]  # ego ids per bin
    summaries: dict[str, list[dict]]  # target -> per-bin box stats
    tests: dict[str, list[dict]] = field(default_factory=dict)  # target -> per pair t/df/p

    def to_json(self) -> dict:
        return asdict(self)


def quantile_bins(values: Sequence[float], n_bins: int = N_BINS) -> tuple[list[float], list[int]]:
    """Nearest-rank quantile edges; a value equal to an edge goes to the lower bin."""
    edges = [nearest_rank(list(values), k / n_bins) for k in range(1, n_bins)]
    out = []
    for v in values:
        b = 0
        while b < len(edges) and v > edges[b]:
            b += 1
        out.append(b)
    return edges, out


def bin_and_test(vectors: Sequence[NegativityVector], metric: str) -> BinReport:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if len(vectors) < 8:
        raise TooFewEgos(f"binning needs at least 8 egos, got {len(vectors)}")
    vecs = sorted(vectors, key=lambda v: v.ego_id)
    edges, assign = quantile_bins([v.metric(metric) for v in vecs])
    bins = [[v for v, b in zip(vecs, assign) if b == k] for k in range(N_BINS)]
    summaries = {}
    tests = {}
    for target in TARGETS:
        samples = [[getattr(v, target) for v in b] for b in bins]
        summaries[target] = [box_stats(s) for s in samples]
        rows = []
        for i, j in BIN_PAIRS:
            r = welch_ttest(samples[i], samples[j])
            rows.append({"pair": f"{i + 1}-{j + 1}", "t": r.t, "df": r.df, "p": r.p})
        tests[target] = rows
    return BinReport(metric, edges, [[v.ego_id for v in b] for b in bins], summaries, tests)


@dataclass(frozen=True)
class Correlation:
    metric: str
    target: str
    n: int
    r: float
    p_one_tailed: float


def correlate(vectors: Sequence[NegativityVector], metric: str, target: str) -> Correlation:
    """Pearson r with one-tailed p for the alternative r < 0."""
    if metric not in METRICS or target not in TARGETS:
        raise ValueError("unknown metric or target")
    x = [v.metric(metric) for v in vectors]
    y = [float(getattr(v, target)) for v in vectors]
    r = pearson_r(x, y)
    return Correlation(metric, target, len(x), r, pearson_lower_p(r, len(x)))


# --- composition ---------------------------------------------------------------


@dataclass
class CompositionReport:
    n_egos: int
    mean_tweets: float
    pct_interactions: float
    pct_mentions: float
    pct_retweets: float
    pct_replies: float
    pct_quotes: float
    mean_timeline_days: float

    def to_json(self) -> dict:
        return asdict(self)


def composition_report(timelines: Iterable[Timeline]) -> CompositionReport:
    """Tweet-type shares averaged over egos.

    Records sharing a ``tweet_id`` are one tweet; a tweet counts towards
    every kind among its records, so type shares may overlap.
    """
    rows = []
    for tl in timelines:
        total = tl.total_tweets
        if total == 0:
            continue
        tweets: dict[object, set[Kind]] = {}
        for i, rec in enumerate(tl.records):
            key = rec.tweet_id if rec.tweet_id is not None else ("#", i)
            tweets.setdefault(key, set()).add(rec.kind)
        kinds = {k: sum(k in s for s in tweets.values()) for k in Kind}
        days = tl.span_seconds / 86400.0
        rows.append((total, len(tweets) / total, kinds[Kind.MENTION] / total,
                     kinds[Kind.RETWEET] / total, kinds[Kind.REPLY] / total,
                     kinds[Kind.QUOTE] / total, days))
    if not rows:
        return CompositionReport(0, *([math.nan] * 7))

    def mean(i, scale=1.0):
        return scale * math.fsum(r[i] for r in rows) / len(rows)

    return CompositionReport(len(rows), mean(0), mean(1, 100), mean(2, 100), mean(3, 100),
                             mean(4, 100), mean(5, 100), mean(6))


def metrics_by_ego(vectors: Iterable[NegativityVector]) -> Mapping[str, NegativityVector]:
    return {v.ego_id: v for v in vectors}
