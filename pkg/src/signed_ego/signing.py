"""Relationship signing with the golden interaction threshold, and classifier agreement."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import IO, Iterable, Mapping, Union

from .errors import KeyMismatch, NoInteractions
from .ingest import Label, Timeline
from .sentiment import SentimentLabel

GOLDEN_THRESHOLD = Fraction(17, 100)
MIN_RELIABLE = 6

InteractionKey = tuple[str, int]
LabelLike = Union[Label, SentimentLabel]


class Sign(enum.Enum):
    POSITIVE = "+"
    NEGATIVE = "-"


def as_fraction(threshold) -> Fraction:
    """Exact rational form of a threshold; ``0.17`` becomes ``17/100``."""
    if isinstance(threshold, Fraction):
        return threshold
    if isinstance(threshold, float):
        return Fraction(repr(threshold))
    return Fraction(threshold)


def sign_relationship(n_pos: int, n_neu: int, n_neg: int,
                      threshold: Fraction = GOLDEN_THRESHOLD) -> Sign:
    """Negative iff the negative share strictly exceeds ``threshold``.

    Neutral interactions only enlarge the denominator.  The comparison is
    exact: ``n_neg * den > num * n_total``.
    """
    if min(n_pos, n_neu, n_neg) < 0:
        raise ValueError("interaction counts must be non-negative")
    total = n_pos + n_neu + n_neg
    if total == 0:
        raise NoInteractions("cannot sign a relationship without interactions")
    t = as_fraction(threshold)
    return Sign.NEGATIVE if n_neg * t.denominator > t.numerator * total else Sign.POSITIVE


@dataclass
class RelationshipProfile:
    ego_id: str
    alter_id: str
    n_pos: int = 0
    n_neu: int = 0
    n_neg: int = 0
    first_ts: float | None = None
    last_ts: float | None = None
    threshold: Fraction = field(default=GOLDEN_THRESHOLD, repr=False)
    min_reliable: int = field(default=MIN_RELIABLE, repr=False)

    @property
    def n_total(self) -> int:
        return self.n_pos + self.n_neu + self.n_neg

    @property
    def neg_fraction(self) -> float:
        return self.n_neg / self.n_total

    @property
    def sign(self) -> Sign:
        return sign_relationship(self.n_pos, self.n_neu, self.n_neg, self.threshold)

    @property
    def reliable(self) -> bool:
        return self.n_total >= self.min_reliable

    def add(self, label: Label, ts: float) -> None:
        if label is Label.POSITIVE:
            self.n_pos += 1
        elif label is Label.NEGATIVE:
            self.n_neg += 1
        else:
            self.n_neu += 1
        self.first_ts = ts if self.first_ts is None else min(self.first_ts, ts)
        self.last_ts = ts if self.last_ts is None else max(self.last_ts, ts)


def _label_value(label: LabelLike) -> Label:
    return label.value if isinstance(label, SentimentLabel) else label


def interaction_keys(timelines: Iterable[Timeline]) -> list[InteractionKey]:
    return [(tl.ego_id, i) for tl in timelines for i in range(len(tl.records))]


def build_profiles(timelines: Iterable[Timeline], labels: Mapping[InteractionKey, LabelLike],
                   threshold: Fraction = GOLDEN_THRESHOLD,
                   min_reliable: int = MIN_RELIABLE) -> list[RelationshipProfile]:
    """Aggregate labelled interactions into one profile per directed (ego, alter) pair.

    ``labels`` is keyed by ``(ego_id, position in timeline.records)``.
    Output is sorted by ``(ego_id, alter_id)``.
    """
    profiles: dict[tuple[str, str], RelationshipProfile] = {}
    for tl in timelines:
        for i, rec in enumerate(tl.records):
            key = (rec.ego_id, rec.alter_id)
            prof = profiles.get(key)
            if prof is None:
                prof = profiles[key] = RelationshipProfile(
                    rec.ego_id, rec.alter_id, threshold=as_fraction(threshold),
                    min_reliable=min_reliable)
            prof.add(_label_value(labels[(tl.ego_id, i)]), rec.timestamp)
    return [profiles[k] for k in sorted(profiles)]


PROFILE_COLUMNS = ("ego_id", "alter_id", "n_pos", "n_neu", "n_neg",
                   "neg_fraction", "sign", "reliable", "first_ts", "last_ts")


def write_profiles_csv(profiles: Iterable[RelationshipProfile], fp: IO[str]) -> None:
    import csv

    w = csv.writer(fp, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS)
    for p in profiles:
        w.writerow([p.ego_id, p.alter_id, p.n_pos, p.n_neu, p.n_neg,
                    f"{p.neg_fraction:.6f}", p.sign.value, str(p.reliable).lower(),
                    _ts(p.first_ts), _ts(p.last_ts)])


def read_profiles_csv(fp: IO[str], threshold: Fraction = GOLDEN_THRESHOLD,
                      min_reliable: int = MIN_RELIABLE) -> list[RelationshipProfile]:
    import csv

    out = []
    for row in csv.DictReader(fp):
        out.append(RelationshipProfile(
            row["ego_id"], row["alter_id"], int(row["n_pos"]), int(row["n_neu"]),
            int(row["n_neg"]), _parse_ts(row["first_ts"]), _parse_ts(row["last_ts"]),
            as_fraction(threshold), min_reliable))
    return out


def _ts(v):
    if v is None:
        return ""
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _parse_ts(s: str):
    if not s:
        return None
    v = float(s)
    return int(v) if v.is_integer() else v


# --- classifier agreement ------------------------------------------------


def nearest_rank(values: list[float], q: float) -> float:
    """Nearest-rank quantile: the ``ceil(q * n)``-th smallest value."""
    if not values:
        return math.nan
    xs = sorted(values)
    rank = max(1, math.ceil(q * len(xs) - 1e-12))
    return xs[rank - 1]


@dataclass
class AgreementReport:
    models: list[str]
    interaction_agreement: list[list[float]]
    relationship_agreement: list[list[float]]
    n_interactions: int
    n_reliable_relationships: int
    # (positive model, negative model) -> {"n": .., "Q1": .., "Q2": .., "Q3": ..}
    disagreement_quantiles: dict[tuple[str, str], dict] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "models": self.models,
            "n_interactions": self.n_interactions,
            "n_reliable_relationships": self.n_reliable_relationships,
            "interaction_agreement": self.interaction_agreement,
            "relationship_agreement": self.relationship_agreement,
            "disagreement_quantiles": [
                {"positive_model": a, "negative_model": b, **q}
                for (a, b), q in sorted(self.disagreement_quantiles.items())
            ],
        }


def compare_classifiers(timelines: list[Timeline],
                        label_sets: Mapping[str, Mapping[InteractionKey, LabelLike]],
                        threshold: Fraction = GOLDEN_THRESHOLD,
                        min_reliable: int = MIN_RELIABLE) -> AgreementReport:
    """Pairwise label agreement between classifiers over the same interactions.

    Relationship agreement and disagreement quantiles use only relationships
    with at least ``min_reliable`` interactions.  For every ordered pair
    (X, Y), the quantiles summarise Y's negative percentage over
    relationships X signs positive and Y signs negative.
    """
    models = list(label_sets)
    keys = set(interaction_keys(timelines))
    for name in models:
        if set(label_sets[name]) != keys:
            raise KeyMismatch(f"labels for {name!r} do not cover exactly the timeline interactions")
    labels = {m: {k: _label_value(v) for k, v in label_sets[m].items()} for m in models}
    profiles = {m: build_profiles(timelines, labels[m], threshold, min_reliable) for m in models}
    reliable = [i for i, p in enumerate(profiles[models[0]] if models else []) if p.reliable]

    n = len(models)
    inter = [[1.0] * n for _ in range(n)]
    rel = [[1.0] * n for _ in range(n)]
    ordered_keys = sorted(keys)
    for a, b in combinations(range(n), 2):
        la, lb = labels[models[a]], labels[models[b]]
        same = sum(la[k] is lb[k] for k in ordered_keys)
        inter[a][b] = inter[b][a] = same / len(ordered_keys) if ordered_keys else 1.0
        pa, pb = profiles[models[a]], profiles[models[b]]
        same_rel = sum(pa[i].sign is pb[i].sign for i in reliable)
        rel[a][b] = rel[b][a] = same_rel / len(reliable) if reliable else 1.0

    quantiles = {}
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            px, py = profiles[models[x]], profiles[models[y]]
            gammas = [100.0 * py[i].neg_fraction for i in reliable
                      if px[i].sign is Sign.POSITIVE and py[i].sign is Sign.NEGATIVE]
            quantiles[(models[x], models[y])] = {
                "n": len(gammas),
                "Q1": nearest_rank(gammas, 0.25),
                "Q2": nearest_rank(gammas, 0.50),
                "Q3": nearest_rank(gammas, 0.75),
            }
    return AgreementReport(models, inter, rel, len(keys), len(reliable), quantiles)


def label_map(timelines: Iterable[Timeline], classify) -> dict[InteractionKey, SentimentLabel]:
    """Apply ``classify(record)`` to every interaction."""
    return {(tl.ego_id, i): classify(rec) for tl in timelines for i, rec in enumerate(tl.records)}


def group_by_ego(profiles: Iterable[RelationshipProfile]) -> dict[str, list[RelationshipProfile]]:
    out: dict[str, list[RelationshipProfile]] = defaultdict(list)
    for p in profiles:
        out[p.ego_id].append(p)
    return dict(out)
