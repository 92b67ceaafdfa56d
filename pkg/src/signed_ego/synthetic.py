"""Seeded synthetic data: Dunbar-banded frequencies and interconnected corpora.

Used by the test suite, the acceptance checks and ``scripts/make_fixture.py``.
"""

from __future__ import annotations

import gzip
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ingest import month_key

BAND_SIZES = (2, 3, 10, 35, 100)
BAND_CENTERS = (300.0, 100.0, 30.0, 9.0, 2.7)
# log-space band widths; the small bands are tight enough that their members
# lie within one default bandwidth of each other
BAND_WIDTHS = (0.08, 0.15, 0.3, 0.3, 0.3)
# interactions per year for the corpus generator, one rate per band
CORPUS_RATES = (120.0, 40.0, 13.5, 4.5, 1.5)
RATE_SPREAD = 1.15

YEAR = 365.25 * 86400
T0 = 1_577_836_800  # 2020-01-01T00:00:00Z

TEXTS = {
    "pos": ("love this, great point", "thanks so much, wonderful news", "happy to help :)"),
    "neu": ("see the thread", "posted at noon", "the meeting is on tuesday"),
    "neg": ("this is awful and wrong", "terrible take, you should be ashamed", "what a horrible idea"),
}


def dunbar_frequencies(seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Contact frequencies in five geometric bands of sizes 2/3/10/35/100.

    Returns ``(freqs, band)`` with ``band[i]`` the 0-based band of alter i
    (0 = most frequent).
    """
    rng = np.random.default_rng(seed)
    freqs, band = [], []
    for b, (n, c, w) in enumerate(zip(BAND_SIZES, BAND_CENTERS, BAND_WIDTHS)):
        offsets = np.linspace(-w / 2, w / 2, n) + rng.uniform(-0.005, 0.005, n)
        freqs.extend(c * np.exp(offsets))
        band.extend([b] * n)
    perm = rng.permutation(len(freqs))
    return np.asarray(freqs)[perm], np.asarray(band)[perm]


@dataclass
class Corpus:
    lines: list[dict]
    factions: dict[str, int]
    egos: list[str]
    mixed_pairs: list[tuple[str, str]] = field(default_factory=list)
    failing: dict[str, str] = field(default_factory=dict)

    def dumps(self) -> str:
        return "".join(json.dumps(o, sort_keys=True, ensure_ascii=False) + "\n" for o in self.lines)

    def to_bytes(self) -> bytes:
        return self.dumps().encode("utf-8")

    def write(self, path: str | Path) -> None:
        path = Path(path)
        data = self.to_bytes()
        if path.suffix == ".gz":
            with open(path, "wb") as fh, gzip.GzipFile(fileobj=fh, mode="wb", mtime=0) as gz:
                gz.write(data)
        else:
            path.write_bytes(data)


KIND_P = {"reply": 0.40, "mention": 0.35, "quote": 0.10, "retweet": 0.15}
# label probabilities (pos, neu, neg) for friendly and hostile directions
FRIENDLY = (0.77, 0.20, 0.03)
HOSTILE = (0.20, 0.10, 0.70)


def make_corpus(seed: int = 0, n_egos: int = 12, population: int = 300, n_factions: int = 2,
                span_years: float = 2.0, text_share: float = 0.2, n_mixed: int = 3,
                with_failing: bool = True) -> Corpus:
    """An interconnected corpus with faction-planted relationship signs.

    Egos are drawn from the population and contact every other ego, so
    ego-ego-alter triangles are plentiful.  Same-faction directions are
    friendly, cross-faction ones hostile, which over-represents all-positive
    triads and starves two-positive ones.  ``n_mixed`` ego pairs are planted
    friendly in one direction and hostile in the other; no other ego pair
    has directions of opposite sign.
    """
    rng = np.random.default_rng(seed)
    users = [f"u{i:04d}" for i in range(population)]
    factions = {u: int(rng.integers(n_factions)) for u in users}
    egos = users[:n_egos]
    lines: list[dict] = []
    tweet_counter = 0

    mixed = []
    for k in range(min(n_mixed, n_egos // 2)):
        a, b = egos[2 * k], egos[2 * k + 1]
        mixed.append((a, b))
    forced = {}
    for a, b in mixed:
        forced[(a, b)] = FRIENDLY
        forced[(b, a)] = HOSTILE

    kinds = list(KIND_P)
    kind_p = np.array(list(KIND_P.values()))
    span = span_years * YEAR

    def emit(ego, alter, n, probs, exact=False):
        """``exact`` pins the relationship sign to the one ``probs`` stands for."""
        nonlocal tweet_counter
        stamps = np.sort(rng.uniform(T0, T0 + span, n)).astype(np.int64)
        kind_draw = [kinds[int(rng.choice(4, p=kind_p))] for _ in stamps]
        labels = [("pos", "neu", "neg")[int(rng.choice(3, p=probs))] for _ in stamps]
        if exact and probs is FRIENDLY:
            labels = ["pos" if lab == "neg" else lab for lab in labels]
        elif exact:
            for i in range(n):
                if 100 * sum(k != "retweet" and lab == "neg" for k, lab in zip(kind_draw, labels)) > 17 * n:
                    break
                kind_draw[i], labels[i] = "reply", "neg"
        out = []
        for ts, kind, lab in zip(stamps, kind_draw, labels):
            rec = {"ego_id": ego, "alter_id": alter, "kind": kind, "ts": int(ts),
                   "tweet_id": f"t{tweet_counter}"}
            tweet_counter += 1
            if kind != "retweet":
                if rng.random() < text_share:
                    rec["text"] = TEXTS[lab][int(rng.integers(3))]
                else:
                    rec["label"] = lab
            out.append(rec)
        return out

    for ego in egos:
        others = [e for e in egos if e != ego]
        pool = [u for u in users if u not in egos and u != ego]
        scale = rng.uniform(0.7, 1.2)
        sizes = [n if b < 2 else int(round(n * scale)) for b, n in enumerate(BAND_SIZES)]
        picks = list(rng.permutation(pool)[: sum(sizes) - len(others)])
        alters = others + picks
        order = rng.permutation(len(alters))
        alters = [alters[i] for i in order]
        records = []
        pos = 0
        for b, n in enumerate(sizes):
            lo = CORPUS_RATES[b] / RATE_SPREAD * span_years
            hi = CORPUS_RATES[b] * RATE_SPREAD * span_years
            for alter in alters[pos:pos + n]:
                count = max(1, int(round(np.exp(rng.uniform(np.log(lo), np.log(hi))))))
                probs = forced.get((ego, alter))
                if probs is None:
                    probs = FRIENDLY if factions[alter] == factions[ego] else HOSTILE
                # ego-ego directions carry exact signs so that the only
                # edges whose directions disagree are the planted ones
                records += emit(ego, alter, count, probs, exact=alter in egos)
            pos += n
        # occasional contacts below the active threshold
        for alter in rng.permutation([u for u in pool if u not in alters])[:20]:
            records += emit(ego, str(alter), 1, FRIENDLY if factions[str(alter)] == factions[ego] else HOSTILE)
        records.sort(key=lambda r: r["ts"])
        lines += records
        lines.append(_sidecar(ego, records, rng, T0, T0 + int(span), extra=900))

    failing = {}
    if with_failing:
        # too few tweets
        ego = "f_sparse"
        recs = emit(ego, users[-1], 40, FRIENDLY)
        lines += recs
        lines.append(_sidecar(ego, recs, rng, T0, T0 + int(span), extra=400))
        failing[ego] = "TooFewTweets"
        # short span
        ego = "f_short"
        short = int(0.25 * YEAR)
        recs = [dict(r, ts=int(T0 + (r["ts"] - T0) * short / span)) for r in emit(ego, users[-2], 60, FRIENDLY)]
        lines += recs
        lines.append(_sidecar(ego, recs, rng, T0, T0 + short, extra=2400))
        failing[ego] = "SpanTooShort"
        # irregular: all activity crammed into a few months of a long span
        ego = "f_bursty"
        recs = emit(ego, users[-3], 60, HOSTILE)
        lines += recs
        side = _sidecar(ego, recs, rng, T0, T0 + int(span), extra=2400, months=3)
        lines.append(side)
        failing[ego] = "Irregular"
    return Corpus(lines, factions, egos, mixed, failing)


def _sidecar(ego, records, rng, first, last, extra, months=None) -> dict:
    """Sidecar with ``extra`` non-interaction tweets spread over the span
    (or over its first ``months`` months)."""
    monthly: dict[str, int] = defaultdict(int)
    seen = set()
    for r in records:
        if r["tweet_id"] not in seen:
            seen.add(r["tweet_id"])
            monthly[month_key(r["ts"])] += 1
    end = last if months is None else min(last, first + int(months * YEAR / 12))
    for ts in np.linspace(first, end, extra).astype(np.int64):
        monthly[month_key(int(ts))] += 1
    return {"ego_id": ego, "total_tweets": len(seen) + extra,
            "monthly_counts": dict(sorted(monthly.items())),
            "first_ts": int(first), "last_ts": int(last)}
