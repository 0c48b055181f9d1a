import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import const_trace
from mgsched.errors import DataError, UnsupportedSettingError
from mgsched.model import SlotInput, Trace, reference_params, total_cost
from mgsched.offline import (
    CriticalSegment,
    DeltaSeries,
    SegmentKind,
    commitment_cost,
    critical_segments,
    delta,
    delta_process,
    dp_offline,
    dp_path,
    ofa,
    ofa_commitment,
    ofa_multi,
    slot_costs,
)

S, T1, T2, E = SegmentKind.START, SegmentKind.TYPE1, SegmentKind.TYPE2, SegmentKind.END


def test_delta_values(s0):
    gen, ext = s0
    assert delta(gen, ext, SlotInput(1, 1, 2)) == pytest.approx(1.4)
    assert delta(gen, ext, SlotInput(0, 0, 1.3)) == pytest.approx(-0.1)


def test_delta_process_rise(s0):
    gen, ext = s0
    d = delta_process(const_trace(1, 1, 2, 2), gen, ext)
    assert d.values == pytest.approx([-2, -0.6, 0])
    assert d.values[-1] == 0.0  # cap hit is exact


def test_delta_process_rise_and_fall(s0):
    gen, ext = s0
    d = delta_process(const_trace(1, 1, 2, 4), gen, ext, deltas=np.array([1.4, 1.4, -1.4, -1.4]))
    assert d.values == pytest.approx([-2, -0.6, 0, -1.4, -2])
    assert d.values[-1] == -2.0


def test_delta_process_zero_steps_stays_at_floor(s0):
    gen, ext = s0
    d = delta_process(const_trace(0, 0, 1, 5), gen, ext, deltas=np.zeros(5))
    assert np.all(d.values == -2.0)


def test_segments_spec_example():
    d = DeltaSeries(values=np.array([-2, -0.6, 0, -1.4, -2]), beta=2.0)
    assert critical_segments(d) == [
        CriticalSegment(1, 2, T1, tilde=2),
        CriticalSegment(3, 4, T2, tilde=4),
    ]


def test_segments_flat_series_is_one_start():
    d = DeltaSeries(values=np.full(6, -2.0), beta=2.0)
    assert critical_segments(d) == [CriticalSegment(1, 5, S)]


def test_segments_rise_fall_rise_plateau(s0):
    gen, ext = s0
    steps = np.array([-1, -1, 1, 1.5, -1, -1.5, 3, -0.5, -0.2])
    d = delta_process(const_trace(1, 1, 2, 9), gen, ext, deltas=steps)
    segs = critical_segments(d)
    assert [s.kind for s in segs] == [S, T1, T2, T1, E]
    assert [(s.start, s.end) for s in segs] == [(1, 2), (3, 4), (5, 6), (7, 7), (8, 9)]


def test_segments_reject_malformed():
    with pytest.raises(DataError):
        critical_segments(DeltaSeries(values=np.array([-1.0, 0.0]), beta=2.0))
    with pytest.raises(DataError):
        critical_segments(DeltaSeries(values=np.array([-2.0, 0.5]), beta=2.0))
    with pytest.raises(DataError):
        critical_segments(DeltaSeries(values=np.array([0.0, 0.0]), beta=0.0))


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=40))
def test_segments_partition_horizon(steps):
    gen, ext, _ = reference_params("S0")
    T = len(steps)
    d = delta_process(const_trace(1, 1, 2, T), gen, ext, deltas=np.array(steps))
    assert np.all(d.values >= -2.0) and np.all(d.values <= 0.0)
    segs = critical_segments(d)
    assert segs[0].start == 1 and segs[-1].end == T
    for a, b in zip(segs, segs[1:]):
        assert b.start == a.end + 1
    inner = [s.kind for s in segs if s.kind in (T1, T2)]
    assert all(x != y for x, y in zip(inner, inner[1:]))
    assert [s.kind for s in segs].count(S) <= 1 and [s.kind for s in segs].count(E) <= 1


def test_ofa_on_type1_only(s0):
    gen, ext = s0
    y = ofa_commitment(const_trace(1, 1, 2, 4), gen, ext, deltas=np.array([1.4, 1.4, -1.4, -1.4]))
    assert y.tolist() == [1, 1, 0, 0]


def test_ofa_flat_trace_all_off(s0):
    gen, ext = s0
    assert ofa(const_trace(0, 0, 1, 6), gen, ext).y.sum() == 0


def test_ofa_rejects_slow_unit():
    gen, ext, _ = reference_params("P1", constrained=True)
    with pytest.raises(UnsupportedSettingError):
        ofa(const_trace(1000, 1000, 0.1, 4), gen, ext)
    with pytest.raises(UnsupportedSettingError):
        dp_offline(const_trace(1000, 1000, 0.1, 4), gen, ext)


def test_dp_single_slot_stays_off(s0):
    gen, ext = s0
    sched = dp_offline(const_trace(1, 1, 2, 1), gen, ext)
    assert sched.y[:, 0].tolist() == [0]
    assert total_cost(sched, const_trace(1, 1, 2, 1), gen, ext).total == pytest.approx(2.5)


def test_dp_three_slots_runs(s0):
    gen, ext = s0
    tr = const_trace(1, 1, 2, 3)
    sched = dp_offline(tr, gen, ext)
    assert sched.y[:, 0].tolist() == [1, 1, 1]
    assert total_cost(sched, tr, gen, ext).total == pytest.approx(5.3)


def test_dp_path_value_matches_commitment_cost(s0):
    gen, ext = s0
    rng = np.random.default_rng(0)
    tr = Trace(a=rng.uniform(0, 1.5, 60), h=rng.uniform(0, 1.5, 60), p=rng.uniform(0.01, 2, 60))
    p0, p1 = slot_costs(tr, gen, ext)
    y, c = dp_path(p0, p1, gen.startup_beta)
    assert commitment_cost(p0, p1, y, gen.startup_beta) == c


def test_dp_path_starting_on(s0):
    gen, ext = s0
    p0, p1 = slot_costs(const_trace(1, 1, 2, 1), gen, ext)
    y, c = dp_path(p0, p1, gen.startup_beta, y0=1)
    assert y.tolist() == [1] and c == pytest.approx(1.1)


def test_zero_startup_cost_is_slotwise():
    gen, ext, _ = reference_params("S0")
    from dataclasses import replace

    gen = replace(gen, startup_beta=0.0)
    tr = Trace(a=[1, 0, 1], h=[1, 0, 1], p=[2, 2, 2])
    assert ofa(tr, gen, ext).y[:, 0].tolist() == [1, 0, 1]
    assert dp_offline(tr, gen, ext).y[:, 0].tolist() == [1, 0, 1]


@given(st.integers(0, 10_000))
def test_ofa_matches_dp(seed):
    gen, ext, _ = reference_params("S0")
    rng = np.random.default_rng(seed)
    T = 40
    tr = Trace(a=rng.uniform(0, 1.5, T), h=rng.uniform(0, 1.5, T), p=rng.uniform(0.01, 2, T))
    a = total_cost(ofa(tr, gen, ext), tr, gen, ext).total
    b = total_cost(dp_offline(tr, gen, ext), tr, gen, ext).total
    assert a == pytest.approx(b, rel=1e-9)


def test_ofa_multi_single_layer_matches_ofa(s0):
    gen, ext = s0
    rng = np.random.default_rng(5)
    tr = Trace(a=rng.uniform(0, 1.8, 30), h=rng.uniform(0, 1.8, 30), p=rng.uniform(0.01, 2, 30))
    multi = ofa_multi(tr, gen, ext, 1)
    single = ofa(Trace(a=np.minimum(tr.a, 1.0), h=np.minimum(tr.h, 1.0), p=tr.p), gen, ext)
    assert np.array_equal(multi.y, single.y)
    top = (tr.p * (tr.a - np.minimum(tr.a, 1.0)) + ext.gas_heat_price_cg * (tr.h - np.minimum(tr.h, 1.0))).sum()
    single_cost = total_cost(single, Trace(a=np.minimum(tr.a, 1.0), h=np.minimum(tr.h, 1.0), p=tr.p), gen, ext).total
    assert total_cost(multi, tr, gen, ext).total == pytest.approx(single_cost + top, rel=1e-12)


def test_ofa_multi_zero_demand(s0):
    gen, ext = s0
    sched = ofa_multi(const_trace(0, 0, 1, 5), gen, ext, 3)
    assert sched.y.sum() == 0
    assert total_cost(sched, const_trace(0, 0, 1, 5), gen, ext).total == 0.0
