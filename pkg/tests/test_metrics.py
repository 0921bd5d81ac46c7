import io
import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from noisykv.metrics import (
    INFINITE_GAIN,
    OVERFLOW,
    ExperimentRecord,
    GainBand,
    aggregate,
    band,
    bucket_by_range,
    buckets_csv,
    information_gain,
    mean_gain,
    pathological_band,
    pathological_gain,
    trimmed,
    write_records,
)

TABLE3_RANGES = [(0.025, 1.0), (0.005, 0.025), (0.002, 0.005), (0.001, 0.002), (0.0005, 0.001)]


def record(d_noisy, d_learned, d_between=0.0, **kw):
    gain = information_gain(d_noisy, d_learned)
    fields = dict(
        index=0, seed=1, dfa_id="dfa-0", noise_kind="noisy_output", noise_params="p=0.001",
        mu=0.01, states=30, alphabet_size=4, d_a_noisy=d_noisy, d_a_learned=d_learned,
        d_noisy_learned=d_between, gain=gain, band=band(gain), learned_size=30,
        rounds_used=100, stopped_by="maxround", membership_queries=1000,
    )
    fields.update(kw)
    return ExperimentRecord(**fields)


def test_gain_examples():
    assert information_gain(0.001, 0.001) == 1.0
    assert band(1.0) is GainBand.MEDIUM
    g = information_gain(0.003, 0.002)
    assert g == pytest.approx(1.5)
    assert band(1.5) is GainBand.HIGH
    assert information_gain(0.001, 0.0) is INFINITE_GAIN
    assert band(INFINITE_GAIN) is GainBand.HIGH


def test_band_boundaries():
    assert band(0.0) is GainBand.LOW
    assert band(math.nextafter(0.9, 0)) is GainBand.LOW
    assert band(0.9) is GainBand.MEDIUM
    assert band(math.nextafter(1.5, 0)) is GainBand.MEDIUM
    assert pathological_band(math.nextafter(1.0, 0)) is GainBand.LOW
    assert pathological_band(1.0) is GainBand.HIGH


def test_pathological_gain_examples():
    assert pathological_gain(0.00382, 0.00291) == pytest.approx(1.31271, abs=5e-6)
    assert pathological_gain(0.002, 0.002) == 1.0
    assert pathological_gain(0.002, 0.0) == INFINITE_GAIN


@pytest.mark.parametrize("args", [(-0.1, 0.1), (0.1, -0.1), (1.5, 0.1), (0.1, 2.0)])
def test_gain_rejects_bad_distances(args):
    with pytest.raises(ValueError):
        information_gain(*args)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_band_is_monotone(g1, g2):
    lo, hi = sorted((g1, g2))
    assert band(lo).rank <= band(hi).rank
    assert pathological_band(lo).rank <= pathological_band(hi).rank


@given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0), st.floats(1e-3, 1.0))
def test_gain_is_scale_consistent(a, b, c):
    g = information_gain(a, b)
    scaled = information_gain(a * c, b * c)
    assert scaled == pytest.approx(g, rel=1e-12)
    assume(all(abs(g - t) > 1e-9 * max(1, t) for t in (0.9, 1.5)))
    assert band(scaled) is band(g)


def test_bucket_assignment_example():
    buckets = bucket_by_range([record(0.003, 0.001)], TABLE3_RANGES)
    assert buckets[(0.002, 0.005)].count == 1
    assert sum(b.count for b in buckets.values()) == 1


def test_half_open_ranges():
    buckets = bucket_by_range([record(0.005, 0.001)], TABLE3_RANGES)
    assert buckets[(0.005, 0.025)].count == 1
    assert buckets[(0.002, 0.005)].count == 0


def test_empty_records():
    buckets = bucket_by_range([], TABLE3_RANGES)
    assert all(b.count == 0 for b in buckets.values())
    assert math.isnan(buckets[(0.002, 0.005)].mean_gain)


def test_records_outside_every_range_overflow():
    recs = [record(0.0001, 0.00005), record(0.003, 0.001)]
    buckets = bucket_by_range(recs, TABLE3_RANGES)
    assert buckets[OVERFLOW].count == 1
    assert buckets[OVERFLOW].records[0].d_a_noisy == 0.0001


@given(st.lists(st.floats(0, 1), max_size=30))
def test_bucketing_never_drops_records(values):
    recs = [record(v, 0.5) for v in values]
    assert sum(b.count for b in bucket_by_range(recs, TABLE3_RANGES).values()) == len(recs)


def test_overlapping_ranges_rejected():
    with pytest.raises(ValueError):
        bucket_by_range([], [(0.0, 0.5), (0.4, 1.0)])
    with pytest.raises(ValueError):
        bucket_by_range([], [(0.5, 0.5)])


def test_mean_of_identical_records():
    recs = [record(0.003, 0.002, 0.004)] * 4
    s = aggregate(recs)
    assert s.mean_d_a_noisy == pytest.approx(0.003)
    assert s.mean_d_a_learned == pytest.approx(0.002)
    assert s.mean_d_noisy_learned == pytest.approx(0.004)
    assert s.mean_gain == pytest.approx(1.5)
    assert s.std_dev == 0.0
    assert s.band is GainBand.HIGH


def test_aggregate_statistics():
    recs = [record(0.004, 0.001), record(0.004, 0.003), record(0.004, 0.0)]
    s = aggregate(recs)
    assert s.mean_gain == pytest.approx((4 + 4 / 3) / 2)
    assert s.inf_gain_count == 1
    assert s.std_dev == pytest.approx(math.sqrt(7 / 3) * 1e-3, rel=1e-12)


def test_mean_gain_handles_infinities():
    assert mean_gain([1.0, 3.0, math.inf]) == (2.0, 1)
    assert mean_gain([math.inf, math.inf]) == (math.inf, 2)
    g, n = mean_gain([])
    assert math.isnan(g) and n == 0


def test_pathological_aggregate_uses_its_band():
    rec = record(0.003, 0.0025)
    assert aggregate([rec], pathological=True).band is GainBand.HIGH
    assert aggregate([rec]).band is GainBand.MEDIUM


def test_trimmed():
    assert trimmed([3.0, 1.0, 2.0, 10.0]) == [2.0, 3.0]
    assert trimmed([1.0, 2.0]) == [1.0, 2.0]


def test_csv_outputs():
    buf = io.StringIO()
    write_records([record(0.003, 0.0)], buf)
    header, row = buf.getvalue().splitlines()
    assert header.startswith("index,seed,dfa_id,noise_kind")
    assert ",inf," in row and ",high," in row
    text = buckets_csv(bucket_by_range([record(0.003, 0.001)], TABLE3_RANGES))
    lines = text.splitlines()
    assert lines[0] == "# ranges are half-open [lo, hi)"
    assert lines[1] == "range_lo,range_hi,count,mean_d_A_noisy,mean_d_A_learned,mean_d_noisy_learned,mean_gain,inf_gain_count,std_dev,band"
    assert lines[-1].startswith("overflow,overflow,0")
