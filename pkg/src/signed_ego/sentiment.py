"""Lexicon-and-rule interaction sentiment.

The compound score of a text is the sum of its token valences (negators flip
the next valenced token, boosters push it away from zero), squashed into
[-1, 1] with ``s / sqrt(s**2 + 15)``.  Labels are cut at +/-0.05.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import EmptyLexicon, InputError
from .ingest import InteractionRecord, Kind, Label

POSITIVE_CUTOFF = 0.05
NEGATIVE_CUTOFF = -0.05
NORMALIZATION_ALPHA = 15.0

_SPLIT = re.compile(r"[^\w']+")


@dataclass(frozen=True)
class SentimentLabel:
    value: Label
    score: float = 0.0


@dataclass(frozen=True, eq=False)
class Lexicon:
    entries: Mapping[str, float]
    boosters: Mapping[str, float] = field(default_factory=dict)
    negators: frozenset[str] = frozenset()
    sha256: str = ""

    def __post_init__(self):
        for tok, val in self.entries.items():
            if not math.isfinite(val):
                raise InputError(f"non-finite valence for {tok!r}")
        if not self.sha256:
            object.__setattr__(self, "sha256", hashlib.sha256(self.dumps().encode()).hexdigest())

    def __len__(self):
        return len(self.entries)

    def negated(self) -> "Lexicon":
        return Lexicon({k: -v for k, v in self.entries.items()}, dict(self.boosters), self.negators)

    def dumps(self) -> str:
        lines = [f"{k}\t{v!r}" for k, v in sorted(self.entries.items())]
        lines.append("#boosters")
        lines += [f"{k}\t{v!r}" for k, v in sorted(self.boosters.items())]
        lines.append("#negators")
        lines += sorted(self.negators)
        return "\n".join(lines) + "\n"


def parse_lexicon(text: str, sha256: str = "") -> Lexicon:
    """Parse the TSV lexicon format.

    ``token<TAB>valence`` lines, then optional ``#boosters`` (``token<TAB>increment``)
    and ``#negators`` (one token per line) sections.  Lines starting with
    ``# `` are comments.
    """
    entries: dict[str, float] = {}
    boosters: dict[str, float] = {}
    negators: set[str] = set()
    section = "entries"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.strip() in ("#boosters", "#negators"):
            section = line.strip()[1:]
            continue
        if line.startswith("# "):
            continue
        if section == "negators":
            negators.add(line.strip().lower())
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise InputError(f"lexicon line {lineno}: expected token<TAB>value")
        try:
            value = float(parts[1])
        except ValueError:
            raise InputError(f"lexicon line {lineno}: bad value {parts[1]!r}") from None
        target = entries if section == "entries" else boosters
        target[parts[0].lower()] = value
    return Lexicon(entries, boosters, frozenset(negators), sha256)


def load_lexicon(path: str | Path | None = None) -> Lexicon:
    """Load a lexicon file; ``None`` loads the bundled one."""
    if path is None:
        data = resources.files("signed_ego").joinpath("data/lexicon.tsv").read_bytes()
    else:
        data = Path(path).read_bytes()
    return parse_lexicon(data.decode("utf-8"), hashlib.sha256(data).hexdigest())


def tokenize(text: str, lexicon: Lexicon | None = None) -> list[str]:
    """Lowercase, split on whitespace and punctuation.

    Whitespace-delimited chunks that are lexicon entries as a whole (emoticons
    such as ``:)``) are kept intact.
    """
    out = []
    for chunk in text.lower().split():
        if lexicon is not None and (chunk in lexicon.entries or chunk in lexicon.negators
                                    or chunk in lexicon.boosters):
            out.append(chunk)
            continue
        for piece in _SPLIT.split(chunk):
            piece = piece.strip("'_")
            if piece:
                out.append(piece)
    return out


def raw_valence(text: str, lexicon: Lexicon) -> float:
    contributions = []
    negate = False
    boost = 0.0
    for tok in tokenize(text, lexicon):
        if tok in lexicon.negators:
            negate = True
        elif tok in lexicon.entries:
            v = lexicon.entries[tok]
            if boost and v:
                v += math.copysign(boost, v)
            if negate:
                v = -v
            contributions.append(v)
            negate, boost = False, 0.0
        elif tok in lexicon.boosters:
            boost += lexicon.boosters[tok]
        else:
            negate, boost = False, 0.0
    # fsum keeps the total independent of token order
    return math.fsum(contributions)


def normalize(s: float, alpha: float = NORMALIZATION_ALPHA) -> float:
    return max(-1.0, min(1.0, s / math.sqrt(s * s + alpha)))


def score_text(text: str, lexicon: Lexicon) -> float:
    """Compound score in [-1, 1]."""
    return normalize(raw_valence(text, lexicon))


def label_for_score(score: float) -> Label:
    if score > POSITIVE_CUTOFF:
        return Label.POSITIVE
    if score < NEGATIVE_CUTOFF:
        return Label.NEGATIVE
    return Label.NEUTRAL


def classify_interaction(record: InteractionRecord, lexicon: Lexicon | None,
                         labels_from: str = "precomputed") -> SentimentLabel:
    """Label one interaction.

    Retweets are always neutral.  With ``labels_from="precomputed"`` a record's
    own label is passed through when present; otherwise (or with
    ``labels_from="text"``) the text is scored.
    """
    if record.kind is Kind.RETWEET:
        return SentimentLabel(Label.NEUTRAL, 0.0)
    if labels_from == "precomputed" and record.precomputed_label is not None:
        return SentimentLabel(record.precomputed_label, 0.0)
    if labels_from not in ("precomputed", "text"):
        raise ValueError(f"labels_from must be 'precomputed' or 'text', not {labels_from!r}")
    if lexicon is None or not lexicon.entries:
        raise EmptyLexicon("scoring requires a non-empty lexicon")
    if record.text is None:
        raise InputError("record has no text to score")
    score = score_text(record.text, lexicon)
    return SentimentLabel(label_for_score(score), score)
