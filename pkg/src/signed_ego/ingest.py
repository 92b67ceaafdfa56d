"""Interaction-log parsing, timeline assembly and ego activity filtering.

Input is JSON Lines. Two kinds of objects are accepted:

* interaction records::

    {"ego_id": "a", "alter_id": "b", "kind": "reply", "ts": 1600000000,
     "text": "...", "label": "neg", "tweet_id": "123"}

  ``text``, ``label`` and ``tweet_id`` are optional (``text`` or ``label`` is
  required unless ``kind`` is ``"retweet"``).  Records sharing a ``tweet_id``
  are one tweet addressed to several alters.

* per-ego sidecars carrying the non-interaction part of the timeline::

    {"ego_id": "a", "total_tweets": 3100, "monthly_counts": {"2020-01": 97},
     "first_ts": 1577836800, "last_ts": 1609372800}

  ``monthly_counts``, ``first_ts`` and ``last_ts`` are optional.
"""

from __future__ import annotations

import calendar
import enum
import gzip
import io
import json
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Mapping

from .errors import (
    MalformedInput,
    MalformedRecord,
    MissingField,
    NonMonotonicTimestampWarning,
    UnknownKind,
)

MAX_MALFORMED_SHARE = 0.10
SECONDS_PER_DAY = 86400.0
# mean Gregorian month
DAYS_PER_MONTH = 365.2425 / 12


class Kind(enum.Enum):
    REPLY = "reply"
    MENTION = "mention"
    QUOTE = "quote"
    RETWEET = "retweet"


class Label(enum.Enum):
    POSITIVE = "pos"
    NEUTRAL = "neu"
    NEGATIVE = "neg"


@dataclass(frozen=True)
class InteractionRecord:
    ego_id: str
    alter_id: str
    kind: Kind
    timestamp: int | float
    text: str | None = None
    precomputed_label: Label | None = None
    tweet_id: str | None = None

    def __post_init__(self):
        if self.ego_id == self.alter_id:
            raise MalformedRecord(f"self-interaction for {self.ego_id!r}")
        ts = self.timestamp
        if isinstance(ts, bool) or not isinstance(ts, (int, float)):
            raise MalformedRecord(f"timestamp must be numeric, got {ts!r}")
        if not math.isfinite(ts) or ts < 0:
            raise MalformedRecord(f"timestamp must be finite and >= 0, got {ts!r}")
        if self.kind is not Kind.RETWEET and self.text is None and self.precomputed_label is None:
            raise MissingField("text or label required for non-retweet interactions")

    def to_json(self) -> dict:
        obj = {
            "ego_id": self.ego_id,
            "alter_id": self.alter_id,
            "kind": self.kind.value,
            "ts": self.timestamp,
        }
        if self.text is not None:
            obj["text"] = self.text
        if self.precomputed_label is not None:
            obj["label"] = self.precomputed_label.value
        if self.tweet_id is not None:
            obj["tweet_id"] = self.tweet_id
        return obj


@dataclass(frozen=True)
class Timeline:
    ego_id: str
    records: tuple[InteractionRecord, ...]
    non_interaction_count: int
    first_tweet: int | float | None
    last_tweet: int | float | None
    monthly_tweet_counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def interaction_tweet_count(self) -> int:
        return count_tweets(self.records)

    @property
    def total_tweets(self) -> int:
        return self.interaction_tweet_count + self.non_interaction_count

    @property
    def span_seconds(self) -> float:
        if self.first_tweet is None or self.last_tweet is None:
            return 0.0
        return float(self.last_tweet - self.first_tweet)


@dataclass
class ParseResult:
    timelines: list[Timeline]
    n_lines: int = 0
    malformed: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def n_malformed(self) -> int:
        return len(self.malformed)

    def __iter__(self):
        return iter(self.timelines)

    def __len__(self):
        return len(self.timelines)


def count_tweets(records: Iterable[InteractionRecord]) -> int:
    """Number of distinct tweets behind ``records`` (``tweet_id`` deduplicates)."""
    ids = set()
    n = 0
    for rec in records:
        if rec.tweet_id is None:
            n += 1
        else:
            ids.add(rec.tweet_id)
    return n + len(ids)


def month_key(ts: float) -> str:
    d = datetime.fromtimestamp(ts, tz=timezone.utc)
    return f"{d.year:04d}-{d.month:02d}"


def _require(obj: dict, key: str):
    if key not in obj:
        raise MissingField(f"missing field {key!r}")
    return obj[key]


def _as_id(value, key: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise MalformedRecord(f"{key} must be a string, got {value!r}")
    value = str(value)
    if not value:
        raise MalformedRecord(f"{key} is empty")
    return value


def parse_record(obj: Mapping) -> InteractionRecord:
    """Build one :class:`InteractionRecord` from a decoded JSON object."""
    if not isinstance(obj, Mapping):
        raise MalformedRecord("record is not a JSON object")
    ego = _as_id(_require(obj, "ego_id"), "ego_id")
    alter = _as_id(_require(obj, "alter_id"), "alter_id")
    raw_kind = _require(obj, "kind")
    try:
        kind = Kind(raw_kind)
    except ValueError:
        raise UnknownKind(f"unknown kind {raw_kind!r}") from None
    ts = _require(obj, "ts")
    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        raise MalformedRecord("text must be a string")
    label = obj.get("label")
    if label is not None:
        try:
            label = Label(label)
        except ValueError:
            raise MalformedRecord(f"unknown label {label!r}") from None
    tweet_id = obj.get("tweet_id")
    if tweet_id is not None:
        tweet_id = _as_id(tweet_id, "tweet_id")
    return InteractionRecord(ego, alter, kind, ts, text, label, tweet_id)


def _parse_sidecar(obj: Mapping) -> dict:
    ego = _as_id(obj["ego_id"], "ego_id")
    total = obj["total_tweets"]
    if isinstance(total, bool) or not isinstance(total, int) or total < 0:
        raise MalformedRecord("total_tweets must be a non-negative integer")
    side = {"ego_id": ego, "total_tweets": total}
    monthly = obj.get("monthly_counts")
    if monthly is not None:
        if not isinstance(monthly, Mapping):
            raise MalformedRecord("monthly_counts must be an object")
        clean = {}
        for k, v in monthly.items():
            try:
                datetime.strptime(k, "%Y-%m")
            except (TypeError, ValueError):
                raise MalformedRecord(f"bad month key {k!r}") from None
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise MalformedRecord(f"bad month count {v!r}")
            clean[k] = v
        if sum(clean.values()) != total:
            raise MalformedRecord("monthly_counts do not sum to total_tweets")
        side["monthly_counts"] = clean
    for key in ("first_ts", "last_ts"):
        if obj.get(key) is not None:
            v = obj[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise MalformedRecord(f"{key} must be a finite non-negative number")
            side[key] = v
    return side


def _open_text(stream) -> IO[str]:
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    if hasattr(stream, "peek"):
        head = stream.peek(2)[:2]
    elif stream.seekable():
        pos = stream.tell()
        head = stream.read(2)
        stream.seek(pos)
    else:
        head = b""
    if head == b"\x1f\x8b":
        stream = gzip.GzipFile(fileobj=stream)
    return io.TextIOWrapper(stream, encoding="utf-8")


def parse_interactions(stream, format: str = "jsonl") -> ParseResult:
    """Parse a JSON Lines byte stream into per-ego timelines.

    Malformed lines are skipped and recorded in ``ParseResult.malformed`` as
    ``(line_number, error_name, message)``; if more than 10% of non-blank
    lines are malformed, :class:`MalformedInput` is raised.  Records out of
    timestamp order within an ego trigger a
    :class:`NonMonotonicTimestampWarning` and are sorted.
    """
    if format not in ("jsonl", "JsonLines"):
        raise ValueError(f"unsupported format {format!r}")
    text = _open_text(stream)
    result = ParseResult(timelines=[])
    by_ego: dict[str, list[InteractionRecord]] = defaultdict(list)
    sidecars: dict[str, dict] = {}
    disordered: set[str] = set()
    for lineno, line in enumerate(text, start=1):
        if not line.strip():
            continue
        result.n_lines += 1
        try:
            obj = json.loads(line)
            if isinstance(obj, Mapping) and "total_tweets" in obj and "alter_id" not in obj:
                if "ego_id" not in obj:
                    raise MissingField("missing field 'ego_id'")
                side = _parse_sidecar(obj)
                if side["ego_id"] in sidecars:
                    raise MalformedRecord(f"duplicate sidecar for {side['ego_id']!r}")
                sidecars[side["ego_id"]] = side | {"_line": lineno}
                continue
            rec = parse_record(obj)
        except json.JSONDecodeError as exc:
            result.malformed.append((lineno, "JSONDecodeError", str(exc)))
            continue
        except MalformedRecord as exc:
            result.malformed.append((lineno, type(exc).__name__, str(exc)))
            continue
        bucket = by_ego[rec.ego_id]
        if bucket and rec.timestamp < bucket[-1].timestamp:
            disordered.add(rec.ego_id)
        bucket.append(rec)

    for ego in sorted(disordered):
        warnings.warn(f"timestamps out of order for ego {ego!r}; records sorted",
                      NonMonotonicTimestampWarning, stacklevel=2)

    for ego in sorted(set(by_ego) | set(sidecars)):
        records = tuple(sorted(by_ego.get(ego, ()), key=lambda r: r.timestamp))
        side = sidecars.get(ego)
        n_int = count_tweets(records)
        if side is not None and side["total_tweets"] < n_int:
            result.malformed.append((side["_line"], "MalformedRecord",
                                     "total_tweets smaller than interaction count"))
            side = None
        result.timelines.append(_assemble(ego, records, side))

    if result.n_lines and result.n_malformed > MAX_MALFORMED_SHARE * result.n_lines:
        raise MalformedInput(
            f"{result.n_malformed} of {result.n_lines} lines malformed "
            f"(first: line {result.malformed[0][0]}: {result.malformed[0][2]})")
    result.malformed.sort()
    return result


def _assemble(ego: str, records: tuple[InteractionRecord, ...], side: dict | None) -> Timeline:
    n_int = count_tweets(records)
    stamps = [r.timestamp for r in records]
    if side is not None:
        stamps += [side[k] for k in ("first_ts", "last_ts") if k in side]
    first = min(stamps) if stamps else None
    last = max(stamps) if stamps else None
    if side is not None and "monthly_counts" in side:
        monthly = dict(sorted(side["monthly_counts"].items()))
    else:
        monthly = _monthly_from_records(records)
    total = side["total_tweets"] if side is not None else n_int
    return Timeline(ego, records, total - n_int, first, last, monthly)


def _monthly_from_records(records: Iterable[InteractionRecord]) -> dict[str, int]:
    counts: dict[str, int] = defaultdict(int)
    seen = set()
    for rec in records:
        if rec.tweet_id is not None:
            if rec.tweet_id in seen:
                continue
            seen.add(rec.tweet_id)
        counts[month_key(rec.timestamp)] += 1
    return dict(sorted(counts.items()))


def dump_timelines(timelines: Iterable[Timeline], fp: IO[str]) -> None:
    """Write timelines back as JSON Lines (records, then one sidecar per ego)."""
    for tl in timelines:
        for rec in tl.records:
            fp.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
        side = {"ego_id": tl.ego_id, "total_tweets": tl.total_tweets}
        # counts derived from records alone miss non-interaction tweets; leave
        # them out and let the parser derive them again
        if sum(tl.monthly_tweet_counts.values()) == tl.total_tweets:
            side["monthly_counts"] = dict(tl.monthly_tweet_counts)
        if tl.first_tweet is not None:
            side["first_ts"] = tl.first_tweet
            side["last_ts"] = tl.last_tweet
        fp.write(json.dumps(side, sort_keys=True) + "\n")


# --- activity filtering -------------------------------------------------


class Reason(enum.Enum):
    TOO_FEW_TWEETS = "TooFewTweets"
    SPAN_TOO_SHORT = "SpanTooShort"
    IRREGULAR = "Irregular"


@dataclass(frozen=True)
class FilterRules:
    min_tweets: int = 2000
    min_span_months: float = 6.0
    days_per_tweet: int = 3
    # an ego is irregular when the share of under-active months exceeds this
    max_irregular_share: float = 0.5


@dataclass(frozen=True)
class FilterVerdict:
    ego_id: str
    kept: bool
    reasons: tuple[Reason, ...]


def active_months(first: float, last: float) -> list[tuple[int, int]]:
    a = datetime.fromtimestamp(first, tz=timezone.utc)
    b = datetime.fromtimestamp(last, tz=timezone.utc)
    out = []
    y, m = a.year, a.month
    while (y, m) <= (b.year, b.month):
        out.append((y, m))
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return out


def is_irregular(tl: Timeline, rules: FilterRules = FilterRules()) -> bool:
    if tl.first_tweet is None:
        return True
    months = active_months(tl.first_tweet, tl.last_tweet)
    n_bad = 0
    for y, m in months:
        need = math.ceil(calendar.monthrange(y, m)[1] / rules.days_per_tweet)
        if tl.monthly_tweet_counts.get(f"{y:04d}-{m:02d}", 0) < need:
            n_bad += 1
    return n_bad > rules.max_irregular_share * len(months)


def filter_ego(tl: Timeline, rules: FilterRules = FilterRules()) -> FilterVerdict:
    reasons = []
    if tl.total_tweets < rules.min_tweets:
        reasons.append(Reason.TOO_FEW_TWEETS)
    span_months = tl.span_seconds / SECONDS_PER_DAY / DAYS_PER_MONTH
    if tl.first_tweet is None or span_months < rules.min_span_months:
        reasons.append(Reason.SPAN_TOO_SHORT)
    if is_irregular(tl, rules):
        reasons.append(Reason.IRREGULAR)
    return FilterVerdict(tl.ego_id, not reasons, tuple(reasons))


def filter_egos(timelines: Iterable[Timeline], rules: FilterRules = FilterRules()) -> list[FilterVerdict]:
    """One verdict per ego, ordered by ego id; every violated rule is listed."""
    return [filter_ego(tl, rules) for tl in sorted(timelines, key=lambda t: t.ego_id)]


def write_verdicts_csv(verdicts: Iterable[FilterVerdict], fp: IO[str]) -> None:
    fp.write("ego_id,kept,reasons\n")
    for v in verdicts:
        reasons = ";".join(r.value for r in v.reasons)
        fp.write(f"{_csv_field(v.ego_id)},{str(v.kept).lower()},{reasons}\n")


def read_verdicts_csv(fp: IO[str]) -> list[FilterVerdict]:
    import csv

    out = []
    for row in csv.DictReader(fp):
        reasons = tuple(Reason(r) for r in row["reasons"].split(";") if r)
        out.append(FilterVerdict(row["ego_id"], row["kept"] == "true", reasons))
    return out


def _csv_field(value: str) -> str:
    if any(c in value for c in ',"\n\r'):
        return '"' + value.replace('"', '""') + '"'
    return value
