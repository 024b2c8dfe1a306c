"""Per-word retrieval-speed statistics and control covariates.

All statistics here use raw (un-normalized) onsets and operate on records
collapsed to first word occurrences, so a word occurs at most once per
record and "paths containing the word" coincides with "occurrences".
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import IO, Mapping, Optional, Sequence, Union

from .corpus import FluencyRecord, collapse_first_occurrence
from .errors import NoEligibleOccurrence, NoRecords

PathOrFile = Union[str, os.PathLike, IO[str]]

STATS_CSV_HEADER = (
    "word",
    "frequency",
    "log_frequency",
    "avg_location",
    "dt_to",
    "dt_from",
    "n_to",
    "n_from",
)


@dataclass(frozen=True)
class RetrievalStats:
    """Covariates and retrieval times for one word.

    ``dt_to``/``dt_from`` are None (never 0) when no occurrence has the
    required neighbour; ``n_to``/``n_from`` count the eligible occurrences
    behind each mean.
    """

    word: str
    frequency: int
    log_frequency: float
    avg_location: float
    dt_to: Optional[float]
    dt_from: Optional[float]
    n_to: int
    n_from: int


def _collapsed(records: Sequence[FluencyRecord]) -> list[FluencyRecord]:
    return [collapse_first_occurrence(r) for r in records if len(r) > 0]


def dt_to(records: Sequence[FluencyRecord], word: str) -> float:
    """Mean raw time into ``word``: onset(word) - onset(previous word).

    Occurrences where the word opens a record are skipped and do not count
    toward the divisor.
    """
    total, count = _gap_sum(records, word, into=True)
    if count == 0:
        raise NoEligibleOccurrence(f"{word!r} never has a predecessor")
    return total / count


def dt_from(records: Sequence[FluencyRecord], word: str) -> float:
    """Mean raw time out of ``word``: onset(next word) - onset(word).

    Reported as a positive duration; occurrences where the word closes a
    record are skipped.
    """
    total, count = _gap_sum(records, word, into=False)
    if count == 0:
        raise NoEligibleOccurrence(f"{word!r} never has a successor")
    return total / count


def _gap_sum(
    records: Sequence[FluencyRecord], word: str, into: bool
) -> tuple[float, int]:
    total = 0.0
    count = 0
    for record in _collapsed(records):
        onsets = record.onsets
        for position, candidate in enumerate(record.words):
            if candidate != word:
                continue
            if into:
                if position >= 1:
                    total += onsets[position] - onsets[position - 1]
                    count += 1
            else:
                if position < len(onsets) - 1:
                    total += onsets[position + 1] - onsets[position]
                    count += 1
    return total, count


def covariates(records: Sequence[FluencyRecord]) -> dict[str, RetrievalStats]:
    """Frequency, log-frequency, mean 1-based position, and retrieval times.

    Returns a dict keyed by word, in sorted word order. Words lacking an
    eligible occurrence for a retrieval statistic carry None there.
    """
    if not records:
        raise NoRecords("cannot compute covariates from zero records")
    collapsed = _collapsed(records)
    frequency: dict[str, int] = {}
    position_sum: dict[str, int] = {}
    to_sum: dict[str, float] = {}
    to_count: dict[str, int] = {}
    from_sum: dict[str, float] = {}
    from_count: dict[str, int] = {}
    for record in collapsed:
        onsets = record.onsets
        words = record.words
        last = len(words) - 1
        for position, word in enumerate(words):
            frequency[word] = frequency.get(word, 0) + 1
            position_sum[word] = position_sum.get(word, 0) + position + 1
            if position >= 1:
                to_sum[word] = to_sum.get(word, 0.0) + onsets[position] - onsets[position - 1]
                to_count[word] = to_count.get(word, 0) + 1
            if position < last:
                from_sum[word] = from_sum.get(word, 0.0) + onsets[position + 1] - onsets[position]
                from_count[word] = from_count.get(word, 0) + 1

    stats: dict[str, RetrievalStats] = {}
    for word in sorted(frequency):
        freq = frequency[word]
        n_to = to_count.get(word, 0)
        n_from = from_count.get(word, 0)
        stats[word] = RetrievalStats(
            word=word,
            frequency=freq,
            log_frequency=math.log(freq),
            avg_location=position_sum[word] / freq,
            dt_to=(to_sum[word] / n_to) if n_to else None,
            dt_from=(from_sum[word] / n_from) if n_from else None,
            n_to=n_to,
            n_from=n_from,
        )
    return stats


def write_stats_csv(
    stats: Mapping[str, RetrievalStats],
    dest: PathOrFile,
    ldc_scores: Optional[Mapping[str, float]] = None,
) -> None:
    """Write the per-word stats table; missing retrieval times stay blank.

    When ``ldc_scores`` is given an ``ldc`` column is appended, producing
    the joined table the downstream regressions consume.
    """
    if hasattr(dest, "write"):
        _write_stats(stats, dest, ldc_scores)  # type: ignore[arg-type]
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            _write_stats(stats, fh, ldc_scores)


def _write_stats(
    stats: Mapping[str, RetrievalStats],
    fh: IO[str],
    ldc_scores: Optional[Mapping[str, float]],
) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    header = STATS_CSV_HEADER if ldc_scores is None else STATS_CSV_HEADER + ("ldc",)
    writer.writerow(header)
    for word in sorted(stats):
        s = stats[word]
        row = [
            s.word,
            str(s.frequency),
            format(s.log_frequency, ".12g"),
            format(s.avg_location, ".12g"),
            "" if s.dt_to is None else format(s.dt_to, ".12g"),
            "" if s.dt_from is None else format(s.dt_from, ".12g"),
            str(s.n_to),
            str(s.n_from),
        ]
        if ldc_scores is not None:
            value = ldc_scores.get(word)
            row.append("" if value is None else format(value, ".12g"))
        writer.writerow(row)
