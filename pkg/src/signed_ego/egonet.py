"""Contact frequencies, 1-D mean-shift clustering and concentric ego circles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateBandwidth, InputError, ZeroSpan
from .signing import RelationshipProfile

SECONDS_PER_JULIAN_YEAR = 365.25 * 86400.0
ACTIVE_PER_YEAR = 1.0
DEFAULT_BANDWIDTH_QUANTILE = 0.3
TOLERANCE = 1e-7
MAX_ITER = 500


@dataclass(frozen=True)
class ContactFrequency:
    ego_id: str
    alter_id: str
    interactions: int
    duration_years: float
    freq_per_year: float
    active: bool


def compute_frequencies(profiles: Iterable[RelationshipProfile], ego_span: tuple[float, float],
                        active_per_year: float = ACTIVE_PER_YEAR) -> list[ContactFrequency]:
    """Interactions per (Julian) year over the ego's timeline span.

    Alters below ``active_per_year`` are flagged inactive; the boundary is
    inclusive.
    """
    first, last = ego_span
    seconds = float(last) - float(first)
    if not seconds > 0:
        raise ZeroSpan(f"ego timeline span must be positive, got {seconds}")
    years = seconds / SECONDS_PER_JULIAN_YEAR
    out = []
    for p in profiles:
        f = p.n_total / years
        out.append(ContactFrequency(p.ego_id, p.alter_id, p.n_total, years, f, f >= active_per_year))
    return out


@dataclass
class MeanShiftResult:
    cluster_centers: np.ndarray  # descending
    assignments: np.ndarray  # index into cluster_centers, aligned with the input
    bandwidth: float

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_centers)

    def cluster_sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.n_clusters).tolist()


def estimate_bandwidth(values: Sequence[float], quantile: float = DEFAULT_BANDWIDTH_QUANTILE) -> float:
    """``quantile`` of all pairwise distances.

    Falls back to the smallest positive distance when that quantile is zero,
    and to 1.0 when all values coincide.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    if len(x) < 2:
        return 1.0
    i, j = np.triu_indices(len(x), k=1)
    d = x[j] - x[i]
    bw = float(np.quantile(d, quantile))
    if bw > 0:
        return bw
    pos = d[d > 0]
    return float(pos.min()) if len(pos) else 1.0


def mean_shift_1d(values: Sequence[float], bandwidth: float | None = None,
                  quantile: float = DEFAULT_BANDWIDTH_QUANTILE,
                  tol: float = TOLERANCE, max_iter: int = MAX_ITER) -> MeanShiftResult:
    """Flat-kernel mean shift on the real line.

    Every distinct value is a seed.  Converged modes are merged by single
    linkage when within ``bandwidth`` of each other; a cluster's centre is
    the point-weighted mean of its modes.  Results do not depend on input
    order.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or len(x) == 0:
        raise InputError("mean_shift_1d needs a non-empty 1-D sequence")
    if not np.all(np.isfinite(x)):
        raise InputError("values must be finite")
    if bandwidth is None:
        bandwidth = estimate_bandwidth(x, quantile)
    elif not bandwidth > 0 or not math.isfinite(bandwidth):
        raise DegenerateBandwidth(f"bandwidth must be positive, got {bandwidth}")

    sorted_x = np.sort(x)
    seeds, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    modes = _kernels.mean_shift_modes(sorted_x, seeds, bandwidth, tol, max_iter)

    order = np.argsort(modes, kind="stable")
    group = np.empty(len(modes), dtype=np.int64)
    g = 0
    for k, idx in enumerate(order):
        if k and modes[idx] - modes[order[k - 1]] > bandwidth:
            g += 1
        group[idx] = g
    n_groups = g + 1
    weight = np.bincount(group, weights=counts, minlength=n_groups)
    centers = np.bincount(group, weights=counts * modes, minlength=n_groups) / weight
    # lone modes keep their exact value
    lone = np.bincount(group, minlength=n_groups) == 1
    for gi in np.flatnonzero(lone):
        centers[gi] = modes[group == gi][0]

    # relabel so cluster 0 has the largest centre
    rank = np.empty(n_groups, dtype=np.int64)
    rank[np.argsort(-centers, kind="stable")] = np.arange(n_groups)
    return MeanShiftResult(np.sort(centers)[::-1].copy(), rank[group][inverse], float(bandwidth))


@dataclass
class Circle:
    size: int
    min_freq: float
    alters: list[str]


@dataclass
class EgoNetwork:
    ego_id: str
    circles: list[Circle]
    bandwidth: float | None = None
    # alter -> innermost circle index (0-based)
    layer: dict[str, int] = field(default_factory=dict)

    @property
    def n_circles(self) -> int:
        return len(self.circles)

    @property
    def active_size(self) -> int:
        return self.circles[-1].size if self.circles else 0

    @property
    def active_alters(self) -> list[str]:
        return self.circles[-1].alters if self.circles else []

    def to_json(self) -> dict:
        return {
            "ego_id": self.ego_id,
            "n_circles": self.n_circles,
            "bandwidth": self.bandwidth,
            "circles": [{"size": c.size, "min_freq": c.min_freq, "alters": c.alters}
                        for c in self.circles],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EgoNetwork":
        circles = [Circle(c["size"], c["min_freq"], list(c["alters"])) for c in obj["circles"]]
        layer = {}
        for k, c in enumerate(circles):
            for a in c.alters:
                layer.setdefault(a, k)
        return cls(obj["ego_id"], circles, obj.get("bandwidth"), layer)


def assemble_circles(result: MeanShiftResult, freqs: Sequence[ContactFrequency]) -> EgoNetwork:
    """Cumulative circles from clusters ordered by descending centre.

    ``freqs`` must be the active alters that were clustered, in the order
    their values were passed to :func:`mean_shift_1d`.
    """
    if len(freqs) != len(result.assignments):
        raise InputError("freqs and clustering assignments differ in length")
    if not freqs:
        return EgoNetwork("", [], result.bandwidth)
    ego = freqs[0].ego_id
    circles = []
    members: list[str] = []
    layer = {}
    for k in range(result.n_clusters):
        ring = sorted((f for f, a in zip(freqs, result.assignments) if a == k),
                      key=lambda f: (-f.freq_per_year, f.alter_id))
        members = members + [f.alter_id for f in ring]
        for f in ring:
            layer[f.alter_id] = k
        circles.append(Circle(len(members), min(f.freq_per_year for f in ring), members))
    return EgoNetwork(ego, circles, result.bandwidth, layer)


def build_ego_network(ego_id: str, freqs: Sequence[ContactFrequency], bandwidth: float | None = None,
                      quantile: float = DEFAULT_BANDWIDTH_QUANTILE, log_space: bool = True) -> EgoNetwork:
    """Cluster an ego's active alters into circles.

    Fewer than two active alters give a single trivial circle (or none).
    """
    active = sorted((f for f in freqs if f.active), key=lambda f: f.alter_id)
    if len(active) < 2:
        circles = [Circle(1, active[0].freq_per_year, [active[0].alter_id])] if active else []
        return EgoNetwork(ego_id, circles, None, {f.alter_id: 0 for f in active})
    vals = np.array([f.freq_per_year for f in active])
    if log_space:
        vals = np.log(vals)
    result = mean_shift_1d(vals, bandwidth, quantile)
    net = assemble_circles(result, active)
    net.ego_id = ego_id
    return net


def scaling_ratios(sizes: Sequence[float]) -> list[float]:
    return [b / a for a, b in zip(sizes, sizes[1:])]


def write_egonets_json(nets: Iterable[EgoNetwork], fp: IO[str], header: dict | None = None) -> None:
    doc = {"config": header or {}, "egos": [n.to_json() for n in nets]}
    json.dump(doc, fp, indent=1, sort_keys=True)
    fp.write("\n")


def read_egonets_json(fp: IO[str]) -> list[EgoNetwork]:
    return [EgoNetwork.from_json(o) for o in json.load(fp)["egos"]]
