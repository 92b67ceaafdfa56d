"""Signed graph construction, triad census and the sign-shuffle null model."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateSigns, InputError, NoTriangles
from .signing import RelationshipProfile, Sign

COLLAPSE_RULES = ("any-negative", "both-negative")
TRIADS = ("T0", "T1", "T2", "T3")


@dataclass
class SignedGraph:
    nodes: list[str]
    edges: dict[tuple[str, str], Sign] = field(default_factory=dict)

    @property
    def n_positive(self) -> int:
        return sum(s is Sign.POSITIVE for s in self.edges.values())

    @property
    def n_negative(self) -> int:
        return len(self.edges) - self.n_positive

    def add_edge(self, u: str, v: str, sign: Sign) -> None:
        if u == v:
            raise InputError(f"self-loop on {u!r}")
        key = (u, v) if u < v else (v, u)
        if key in self.edges:
            raise InputError(f"duplicate edge {key}")
        self.edges[key] = sign

    def to_arrays(self):
        """Forward CSR over id-sorted nodes plus the positive-sign vector.

        Edge ids follow the sorted edge order.
        """
        index = {n: i for i, n in enumerate(self.nodes)}
        pairs = sorted((index[u], index[v]) if index[u] < index[v] else (index[v], index[u])
                       for u, v in self.edges)
        n = len(self.nodes)
        src = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
        dst = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        edge_ids = np.arange(len(pairs), dtype=np.int64)
        nodes = self.nodes
        positive = np.fromiter(
            (self.edges[(nodes[a], nodes[b])] is Sign.POSITIVE for a, b in pairs),
            dtype=np.int8, count=len(pairs))
        return indptr, dst, edge_ids, positive


def build_signed_graph(profiles: Iterable[RelationshipProfile], collapse: str = "any-negative") -> SignedGraph:
    """Collapse directed relationship signs into undirected edges.

    ``any-negative``: an edge is negative when any present direction is.
    ``both-negative``: an edge is negative only when every present direction
    is; the two rules differ only on edges whose directions disagree.
    """
    if collapse not in COLLAPSE_RULES:
        raise ValueError(f"collapse must be one of {COLLAPSE_RULES}")
    seen: dict[tuple[str, str], list[Sign]] = {}
    for p in profiles:
        if p.ego_id == p.alter_id:
            continue
        key = (p.ego_id, p.alter_id) if p.ego_id < p.alter_id else (p.alter_id, p.ego_id)
        seen.setdefault(key, []).append(p.sign)
    g = SignedGraph(sorted({x for k in seen for x in k}))
    for key in sorted(seen):
        signs = seen[key]
        if collapse == "any-negative":
            neg = any(s is Sign.NEGATIVE for s in signs)
        else:
            neg = all(s is Sign.NEGATIVE for s in signs)
        g.edges[key] = Sign.NEGATIVE if neg else Sign.POSITIVE
    return g


@dataclass(frozen=True)
class TriadCensus:
    counts: tuple[int, int, int, int]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(TRIADS, self.counts))


def census_from_triangles(triangles: np.ndarray, positive: np.ndarray) -> TriadCensus:
    if len(triangles) == 0:
        return TriadCensus((0, 0, 0, 0))
    k = positive[triangles].sum(axis=1)
    return TriadCensus(tuple(int(c) for c in np.bincount(k, minlength=4)))


def census_triads(g: SignedGraph) -> TriadCensus:
    """Count triangles by number of positive edges (T0..T3)."""
    indptr, indices, edge_ids, positive = g.to_arrays()
    return census_from_triangles(_kernels.triangle_edges(indptr, indices, edge_ids), positive)


def expected_fractions(p: float) -> tuple[float, float, float, float]:
    """Binomial triad-type fractions (T0..T3) for positive-edge probability ``p``."""
    q = 1.0 - p
    return (q ** 3, 3 * p * q * q, 3 * p * p * q, p ** 3)


def surprise(observed: float, expected: float, delta: float, p0: float) -> float:
    """Standardised departure of an observed triad count from its null expectation."""
    var = delta * p0 * (1.0 - p0)
    if not var > 0:
        return math.nan
    return (observed - expected) / math.sqrt(var)


@dataclass
class SurpriseReport:
    observed: tuple[int, int, int, int]
    p0: tuple[float, float, float, float]
    expected: tuple[float, ...]
    expected_std: tuple[float, ...]
    surprise: tuple[float, ...]
    n_positive: int
    n_negative: int
    shuffle_count: int
    rng_seed: int
    shuffle_censuses: list[tuple[int, int, int, int]]

    @property
    def delta(self) -> int:
        return sum(self.observed)

    @property
    def proportions(self) -> tuple[float, ...]:
        d = self.delta
        return tuple(c / d for c in self.observed)

    def to_json(self) -> dict:
        rows = {}
        for i, name in enumerate(TRIADS):
            rows[name] = {
                "count": self.observed[i],
                "proportion": self.proportions[i],
                "p0": self.p0[i],
                "expected_count": self.expected[i],
                "expected_std": self.expected_std[i],
                "surprise": self.surprise[i],
            }
        return {
            "triads": rows,
            "delta": self.delta,
            "edges_positive": self.n_positive,
            "edges_negative": self.n_negative,
            "shuffles": self.shuffle_count,
            "seed": self.rng_seed,
            "shuffle_censuses": [list(c) for c in self.shuffle_censuses],
            "weak_balance": check_weak_balance(self),
        }


def shuffle_signs(positive: np.ndarray, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    return rng.permutation(positive)


def null_model_surprise(g: SignedGraph, shuffles: int = 10, seed: int = 0, jobs: int = 1) -> SurpriseReport:
    """Observed census against ``shuffles`` uniform sign permutations.

    Expected counts are the mean census over shuffles; the denominator uses
    the analytic fractions from the observed positive-edge share.  Each
    shuffle draws from its own PCG64 stream spawned from ``seed``, so
    results do not depend on ``jobs``.
    """
    if shuffles < 1:
        raise ValueError("shuffles must be >= 1")
    indptr, indices, edge_ids, positive = g.to_arrays()
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateSigns("all edges carry the same sign")
    tri = _kernels.triangle_edges(indptr, indices, edge_ids)
    if len(tri) == 0:
        raise NoTriangles("graph has no triangles")
    observed = census_from_triangles(tri, positive).counts

    children = np.random.SeedSequence(seed).spawn(shuffles)

    def run(ss):
        perm = shuffle_signs(positive, ss)
        if int(perm.sum()) != n_pos or len(perm) != n_pos + n_neg:
            raise AssertionError("shuffle changed the sign totals")
        return census_from_triangles(tri, perm).counts

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            censuses = list(ex.map(run, children))
    else:
        censuses = [run(ss) for ss in children]

    arr = np.array(censuses, dtype=np.float64)
    expected = tuple(float(v) for v in arr.mean(axis=0))
    std = tuple(float(v) for v in arr.std(axis=0, ddof=1)) if shuffles > 1 else (math.nan,) * 4
    p0 = expected_fractions(n_pos / (n_pos + n_neg))
    delta = sum(observed)
    s = tuple(surprise(observed[i], expected[i], delta, p0[i]) for i in range(4))
    return SurpriseReport(observed, p0, expected, std, s, n_pos, n_neg, shuffles, seed,
                          [tuple(c) for c in censuses])


def check_weak_balance(report: SurpriseReport) -> bool:
    """True when all-positive triads are over- and two-positive triads under-represented."""
    return report.surprise[3] > 0 and report.surprise[2] < 0


# --- edge-list io ----------------------------------------------------------


def write_edgelist(g: SignedGraph, fp: IO[str]) -> None:
    for (u, v), s in sorted(g.edges.items()):
        fp.write(f"{u} {v} {s.value}\n")


def read_edgelist(fp: IO[str]) -> SignedGraph:
    g = SignedGraph([])
    nodes = set()
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2] not in ("+", "-"):
            raise InputError(f"edge list line {lineno}: expected 'u v sign'")
        g.add_edge(parts[0], parts[1], Sign(parts[2]))
        nodes.update(parts[:2])
    g.nodes = sorted(nodes)
    return g


def write_report_json(report: SurpriseReport, fp: IO[str], header: dict | None = None) -> None:
    doc = {"config": header or {}, **report.to_json()}
    json.dump(doc, fp, indent=1, sort_keys=True)
    fp.write("\n")


def brute_force_census(nodes: Sequence[str], edges: dict[tuple[str, str], Sign]) -> tuple[int, int, int, int]:
    """All-triples census, O(n^3); reference for tests."""
    from itertools import combinations

    def sign(a, b):
        return edges.get((a, b) if a < b else (b, a))

    counts = [0, 0, 0, 0]
    for a, b, c in combinations(sorted(nodes), 3):
        s = (sign(a, b), sign(a, c), sign(b, c))
        if None in s:
            continue
        counts[sum(x is Sign.POSITIVE for x in s)] += 1
    return tuple(counts)
