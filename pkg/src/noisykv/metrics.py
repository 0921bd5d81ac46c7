"""Information gain, gain bands and range bucketing of experiment records."""

from __future__ import annotations

import csv
import enum
import io
import math
import statistics
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

INFINITE_GAIN = math.inf

LOW_UPPER = 0.9
HIGH_LOWER = 1.5
PATHOLOGICAL_HIGH_LOWER = 1.0


class GainBand(str, enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"

    @property
    def rank(self) -> int:
        return ("low", "medium", "high").index(self.value)


def _check_distance(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"distances must lie in [0, 1], got {x}")


def information_gain(d_a_noisy: float, d_a_learned: float) -> float:
    """``d(A, noisy) / d(A, learned)``; :data:`INFINITE_GAIN` when the learned DFA is indistinguishable from A."""
    _check_distance(d_a_noisy)
    _check_distance(d_a_learned)
    if d_a_learned == 0:
        return INFINITE_GAIN
    return d_a_noisy / d_a_learned


def pathological_gain(d_plus_learned: float, d_a_learned: float) -> float:
    return information_gain(d_plus_learned, d_a_learned)


def band(gain: float) -> GainBand:
    if gain < LOW_UPPER:
        return GainBand.LOW
    if gain < HIGH_LOWER:
        return GainBand.MEDIUM
    return GainBand.HIGH


def pathological_band(gain: float) -> GainBand:
    return GainBand.HIGH if gain >= PATHOLOGICAL_HIGH_LOWER else GainBand.LOW


@dataclass
class ExperimentRecord:
    """One (DFA, device, learned DFA) triple.

    ``d_a_noisy`` is the distance from the original DFA to the device
    (for pathological runs: to the DFA with the cone accepted), and ``gain``
    follows the matching definition.
    """

    index: int
    seed: int
    dfa_id: str
    noise_kind: str
    noise_params: str
    mu: float
    states: int
    alphabet_size: int
    d_a_noisy: float
    d_a_learned: float
    d_noisy_learned: float
    gain: float
    band: GainBand
    learned_size: int
    rounds_used: int
    stopped_by: str
    membership_queries: int
    eld: Optional[bool] = None
    reduced_size: Optional[int] = None
    reduced_gain: Optional[float] = None
    d_a_reduced: Optional[float] = None
    d_a_device: Optional[float] = None

    def row(self) -> dict:
        out = asdict(self)
        out["band"] = self.band.value
        return out


RECORD_FIELDS = list(ExperimentRecord.__dataclass_fields__)


def write_records(records: Iterable[ExperimentRecord], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: _fmt(v) for k, v in rec.row().items()})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


@dataclass
class BucketStats:
    lo: float
    hi: float
    count: int = 0
    mean_d_a_noisy: float = math.nan
    mean_d_a_learned: float = math.nan
    mean_d_noisy_learned: float = math.nan
    mean_gain: float = math.nan
    inf_gain_count: int = 0
    std_dev: float = math.nan
    band: Optional[GainBand] = None
    records: list = field(default_factory=list, repr=False)


OVERFLOW = (math.nan, math.nan)


def _check_ranges(ranges: Sequence[tuple[float, float]]) -> None:
    ordered = sorted(ranges)
    for lo, hi in ordered:
        if not lo < hi:
            raise ValueError(f"empty range [{lo}, {hi})")
    for (lo1, hi1), (lo2, hi2) in zip(ordered, ordered[1:]):
        if lo2 < hi1:
            raise ValueError(f"ranges [{lo1}, {hi1}) and [{lo2}, {hi2}) overlap")


def mean_gain(gains: Iterable[float]) -> tuple[float, int]:
    """Mean of the finite gains and the number of infinite ones."""
    gains = list(gains)
    finite = [g for g in gains if math.isfinite(g)]
    inf_count = len(gains) - len(finite)
    if finite:
        return statistics.fmean(finite), inf_count
    return (INFINITE_GAIN if inf_count else math.nan), inf_count


def aggregate(records: Sequence[ExperimentRecord], lo=math.nan, hi=math.nan, pathological=False) -> BucketStats:
    stats = BucketStats(lo, hi, count=len(records), records=list(records))
    if not records:
        return stats
    stats.mean_d_a_noisy = statistics.fmean(r.d_a_noisy for r in records)
    stats.mean_d_a_learned = statistics.fmean(r.d_a_learned for r in records)
    stats.mean_d_noisy_learned = statistics.fmean(r.d_noisy_learned for r in records)
    stats.mean_gain, stats.inf_gain_count = mean_gain(r.gain for r in records)
    if len(records) > 1:
        stats.std_dev = statistics.stdev(r.d_a_learned for r in records)
    if not math.isnan(stats.mean_gain):
        stats.band = (pathological_band if pathological else band)(stats.mean_gain)
    return stats


def bucket_by_range(
    records: Sequence[ExperimentRecord],
    ranges: Sequence[tuple[float, float]],
    pathological: bool = False,
) -> dict[tuple[float, float], BucketStats]:
    """Group records by ``d_a_noisy`` into half-open ranges ``[lo, hi)``.

    Records outside every range land in the :data:`OVERFLOW` bucket.
    """
    _check_ranges(ranges)
    groups: dict[tuple[float, float], list] = {tuple(r): [] for r in ranges}
    overflow = []
    for rec in records:
        for lo, hi in groups:
            if lo <= rec.d_a_noisy < hi:
                groups[(lo, hi)].append(rec)
                break
        else:
            overflow.append(rec)
    out = {key: aggregate(recs, *key, pathological=pathological) for key, recs in groups.items()}
    out[OVERFLOW] = aggregate(overflow, pathological=pathological)
    return out


BUCKET_FIELDS = [
    "range_lo", "range_hi", "count", "mean_d_A_noisy", "mean_d_A_learned",
    "mean_d_noisy_learned", "mean_gain", "inf_gain_count", "std_dev", "band",
]


def bucket_rows(stats: Iterable[BucketStats]) -> list[list]:
    rows = []
    for s in stats:
        rows.append([
            "overflow" if math.isnan(s.lo) else s.lo,
            "overflow" if math.isnan(s.hi) else s.hi,
            s.count, s.mean_d_a_noisy, s.mean_d_a_learned, s.mean_d_noisy_learned,
            s.mean_gain, s.inf_gain_count, s.std_dev, s.band.value if s.band else "",
        ])
    return rows


def buckets_csv(buckets: dict, header_note: str = "ranges are half-open [lo, hi)") -> str:
    buf = io.StringIO()
    buf.write(f"# {header_note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BUCKET_FIELDS)
    writer.writerows(bucket_rows(buckets.values()))
    return buf.getvalue()


def trimmed(values: Sequence[float]) -> list[float]:
    """Drop one highest and one lowest value (kept as-is below three values)."""
    if len(values) < 3:
        return list(values)
    ordered = sorted(values)
    return ordered[1:-1]
