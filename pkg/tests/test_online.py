from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import const_trace
from mgsched.analysis import adversarial_trace, random_instance
from mgsched.errors import ConfigError, UnsupportedSettingError
from mgsched.model import (
    ExternalSupplySpec,
    GeneratorSpec,
    SlotInput,
    Trace,
    reference_params,
    total_cost,
    validate_schedule,
)
from mgsched.offline import SegmentKind, critical_segments, delta_process, dp_offline, ofa, ofa_multi
from mgsched.online import (
    ExactForecast,
    OnlineState,
    Policy,
    certainty_decisions,
    chase_gen_step,
    chase_multi_run,
    chase_s_lk_step,
    chase_s_plus_step,
    chase_s_step,
    layer_schedules,
    rhc_step,
    run_policy,
    slice_demands,
)
from mgsched.traces import NoisyForecast

RICH = SlotInput(1.0, 1.0, 2.0)  # delta = 1.4 under S0
EMPTY = SlotInput(0.0, 0.0, 1.0)  # delta = -0.1 under S0


# ---- single-slot tracker


def test_chase_s_turns_on_at_zero(s0):
    gen, ext = s0
    st0 = OnlineState(y_prev=0, delta_prev=-0.6)
    y, u, v, s, st1 = chase_s_step(st0, RICH, gen, ext)
    assert y == 1 and st1.delta_prev == 0.0
    assert (u, v, s) == pytest.approx((1.0, 0.0, 0.0))


def test_chase_s_turns_off_at_floor(s0):
    gen, ext = s0
    y, *_ , st1 = chase_s_step(OnlineState(y_prev=1, delta_prev=-1.9), EMPTY, gen, ext)
    assert y == 0 and st1.delta_prev == -2.0


def test_chase_s_holds_in_between(s0):
    gen, ext = s0
    y, *_ = chase_s_step(OnlineState(y_prev=1, delta_prev=-1.0), EMPTY, gen, ext)
    assert y == 1


def test_chase_s_rising_trace(s0):
    gen, ext = s0
    sched, _ = run_policy(Policy("chase_s"), const_trace(1, 1, 2, 4), gen, ext)
    assert sched.y[:, 0].tolist() == [0, 1, 1, 1]


def test_chase_s_state_bookkeeping(s0):
    gen, ext = s0
    st = OnlineState.initial(gen)
    assert (st.y_prev, st.delta_prev, st.u_prev, st.on_streak) == (0, -2.0, 0.0, 0)
    for sigma in (RICH, RICH, RICH):
        *_, st = chase_s_step(st, sigma, gen, ext)
    assert st.on_streak == 2 and st.off_streak == 0 and st.u_prev == 1.0


# ---- improved variant


def test_plus_delegates_under_s0(s0):
    gen, ext = s0
    from mgsched.bounds import alpha, plus_goes_external

    assert alpha(gen, ext) == pytest.approx(0.44)
    assert not plus_goes_external(gen, ext)
    st = OnlineState(y_prev=0, delta_prev=-0.6)
    assert chase_s_plus_step(st, [RICH], gen, ext)[:4] == chase_s_lk_step(st, [RICH], gen, ext)[:4]


def test_plus_goes_external_when_alpha_large():
    gen = GeneratorSpec(capacity_L=1.0, startup_beta=2.0, idle_cm=0.1, incremental_co=1.4)
    ext = ExternalSupplySpec(gas_heat_price_cg=0.5, heat_recovery_eta=1.0, price_min_Pmin=0.01, price_max_Pmax=2.0)
    from mgsched.bounds import alpha

    assert alpha(gen, ext) == pytest.approx(0.6)
    y, u, v, s, st = chase_s_plus_step(OnlineState(y_prev=0, delta_prev=-0.1), [RICH], gen, ext)
    assert (y, u, v, s) == (0, 0.0, 1.0, 1.0)
    sched, _ = run_policy(Policy("chase_s_plus"), const_trace(1, 1, 2, 30), gen, ext)
    assert sched.y.sum() == 0


def test_plus_guard_equality_at_alpha_one():
    a = 1.0
    assert 1 / a <= 3 - 2 * a


# ---- look-ahead


def test_lookahead_turns_on_a_slot_earlier(s0):
    gen, ext = s0
    y, *_ = chase_s_lk_step(OnlineState.initial(gen), const_trace(1, 1, 2, 2), gen, ext)
    assert y == 1
    sched, _ = run_policy(Policy("chase_s", 1), const_trace(1, 1, 2, 4), gen, ext)
    assert sched.y[:, 0].tolist() == [1, 1, 1, 1]


def test_lookahead_without_certainty_holds(s0):
    gen, ext = s0
    window = Trace(a=[1.0, 0.0], h=[0.0, 0.0], p=[1.2, 1.2])
    st = OnlineState(y_prev=1, delta_prev=-1.0)
    assert chase_s_lk_step(st, window, gen, ext)[0] == 1
    assert chase_s_lk_step(replace(st, y_prev=0), window, gen, ext)[0] == 0


def test_lookahead_rejects_empty_window(s0):
    gen, ext = s0
    with pytest.raises(ValueError):
        chase_s_lk_step(OnlineState.initial(gen), [], gen, ext)


@given(st.integers(0, 10_000))
def test_lookahead_zero_equals_tracker(seed):
    rng = np.random.default_rng(seed)
    gen, ext, tr = random_instance(rng, T=40)
    st_a = st_b = OnlineState.initial(gen)
    for t in range(len(tr)):
        ya, *_, st_a = chase_s_step(st_a, tr[t], gen, ext)
        yb, *_, st_b = chase_s_lk_step(st_b, tr.window(t, 0), gen, ext)
        assert ya == yb


def test_certainty_decisions_scan():
    vals = np.array([-2.0, -1.0, 0.0, -0.5, -2.0, -1.0])
    assert certainty_decisions(vals, 2.0, 0).tolist() == [-1, 1, -1, 0, -1]
    assert certainty_decisions(vals, 2.0, 1).tolist() == [1, 1, 0, 0, -1]


# ---- layering


def test_slice_single_layer():
    gen = GeneratorSpec(capacity_L=1.0, startup_beta=1.0, idle_cm=0.1, incremental_co=1.0)
    _, ext, _ = reference_params("S0")
    lt = slice_demands(Trace(a=[1.5], h=[0.4], p=[1.0]), gen, ext, 1)
    assert lt.layers[0].a.tolist() == [1.0] and lt.layers[0].h.tolist() == [0.4]
    assert lt.a_top.tolist() == [0.5] and lt.h_top.tolist() == [0.0]


def test_slice_staircase(s0):
    gen, ext = s0
    lt = slice_demands(Trace(a=[0.5, 1.2, 2.3], h=[0, 0, 0], p=[1, 1, 1]), gen, ext, 2)
    assert lt.layers[0].a.tolist() == [0.5, 1.0, 1.0]
    assert lt.layers[1].a == pytest.approx([0.0, 0.2, 1.0])
    assert lt.a_top == pytest.approx([0.0, 0.0, 0.3])


def test_slice_below_capacity(s0):
    gen, ext = s0
    tr = Trace(a=[0.2, 0.9], h=[0.5, 1.0], p=[1, 1])
    lt = slice_demands(tr, gen, ext, 3)
    assert np.array_equal(lt.layers[0].a, tr.a)
    assert all(l.a.sum() == 0 for l in lt.layers[1:]) and lt.a_top.sum() == 0


def test_slice_rejects_zero_units(s0):
    gen, ext = s0
    with pytest.raises(ConfigError):
        slice_demands(const_trace(1, 1, 1, 2), gen, ext, 0)


@given(
    st.lists(st.tuples(st.floats(0, 50), st.floats(0, 50)), min_size=1, max_size=20),
    st.integers(1, 6),
)
def test_slice_conserves_and_caps(rows, n):
    gen, ext, _ = reference_params("S0")
    a, h = map(np.array, zip(*rows))
    lt = slice_demands(Trace(a=a, h=h, p=np.ones(len(a))), gen, ext, n)
    ra, rh = lt.reassemble()
    assert np.array_equal(ra, a) and np.array_equal(rh, h)
    for i, layer in enumerate(lt.layers):
        assert np.all(layer.a <= gen.capacity_L) and np.all(layer.h <= ext.heat_recovery_eta * gen.capacity_L)
        if i:
            # a layer holds demand only where the one below is full
            below = lt.layers[i - 1]
            assert np.all((layer.a == 0) | (below.a == gen.capacity_L))


# ---- several units


def test_multi_run_single_unit_matches_single(s0):
    gen, ext = s0
    rng = np.random.default_rng(4)
    tr = Trace(a=rng.uniform(0, 1.4, 50), h=rng.uniform(0, 1.4, 50), p=rng.uniform(0.01, 2, 50))
    multi = chase_multi_run(tr, gen, ext, 1, omega=2)
    bottom = slice_demands(tr, gen, ext, 1).layers[0]
    single, _ = run_policy(Policy("chase_s_plus", 2), bottom, gen, ext)
    assert np.array_equal(multi.y, single.y)


def test_multi_run_cost_is_sum_of_layers(s0):
    gen, ext = s0
    rng = np.random.default_rng(8)
    tr = Trace(a=rng.uniform(0, 2.6, 50), h=rng.uniform(0, 2.6, 50), p=rng.uniform(0.01, 2, 50))
    sched = chase_multi_run(tr, gen, ext, 2, omega=1)
    lt = slice_demands(tr, gen, ext, 2)
    parts = sum(
        total_cost(ls, layer, gen, ext).total for ls, layer in zip(layer_schedules(sched, tr, gen, ext), lt.layers)
    )
    top = float(np.sum(tr.p * lt.a_top + ext.gas_heat_price_cg * lt.h_top))
    assert total_cost(sched, tr, gen, ext).total == pytest.approx(parts + top, rel=1e-12)


def test_multi_identical_layers_decide_alike(s0):
    gen, ext = s0
    tr = Trace(a=[2.0, 2.0, 0.0, 2.0], h=[2.0, 2.0, 0.0, 2.0], p=[2.0] * 4)
    sched = chase_multi_run(tr, gen, ext, 2)
    assert np.array_equal(sched.y[:, 0], sched.y[:, 1])


# ---- slow units


def _slow(**kw):
    base = dict(capacity_L=1.0, startup_beta=2.0, idle_cm=0.1, incremental_co=1.0)
    base.update(kw)
    return GeneratorSpec(**base)


def test_gen_holds_off_during_min_off(s0):
    _, ext = s0
    gen = _slow(min_off_Toff=2)
    st = OnlineState(y_prev=0, delta_prev=-0.6, on_streak=0, off_streak=1)
    y, u, v, s, _ = chase_gen_step(st, [RICH], gen, ext)
    assert chase_s_lk_step(st, [RICH], gen, ext)[0] == 1
    assert (y, u, v, s) == (0, 0.0, 1.0, 1.0)


def test_gen_ramp_limits_output(s0):
    _, ext = s0
    gen = _slow(ramp_up_Rup=0.4)
    st = OnlineState(y_prev=1, delta_prev=-0.5, u_prev=0.0, on_streak=3, off_streak=0)
    y, u, v, s, _ = chase_gen_step(st, [RICH], gen, ext)
    assert (y, u) == (1, 0.4)
    assert (v, s) == pytest.approx((0.6, 0.6))


def test_gen_cannot_switch_off_above_ramp_down(s0):
    _, ext = s0
    gen = _slow(ramp_down_Rdw=0.4)
    st = OnlineState(y_prev=1, delta_prev=-1.95, u_prev=1.0, on_streak=5, off_streak=0)
    y, u, *_ = chase_gen_step(st, [EMPTY], gen, ext)
    assert (y, u) == (1, pytest.approx(0.6))


@given(st.integers(0, 10_000), st.integers(0, 4))
def test_gen_unconstrained_equals_lookahead(seed, omega):
    rng = np.random.default_rng(seed)
    gen, ext, tr = random_instance(rng, T=40)
    a, _ = run_policy(Policy("chase_gen", omega), tr, gen, ext, fast=False)
    b, _ = run_policy(Policy("chase_s", omega), tr, gen, ext, fast=False)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.u, b.u)


@given(st.integers(0, 10_000))
def test_gen_schedules_always_feasible(seed):
    rng = np.random.default_rng(seed)
    gen, ext, tr = random_instance(rng, T=40, slow=True)
    sched, _ = run_policy(Policy("chase_gen", int(rng.integers(0, 4))), tr, gen, ext, n_gens=2)
    assert validate_schedule(sched, tr, gen, ext, constraints_active=True) == []


def test_fast_only_policies_refuse_slow_units():
    gen, ext, _ = reference_params("P1", constrained=True)
    with pytest.raises(UnsupportedSettingError):
        run_policy(Policy("chase_s"), const_trace(1000, 1000, 0.1, 3), gen, ext)


# ---- receding horizon


def test_rhc_full_window_matches_offline(s0):
    gen, ext = s0
    rng = np.random.default_rng(11)
    tr = Trace(a=rng.uniform(0, 1.4, 30), h=rng.uniform(0, 1.4, 30), p=rng.uniform(0.01, 2, 30))
    _, cost = run_policy(Policy("rhc", 30), tr, gen, ext)
    assert cost.total == pytest.approx(total_cost(ofa(tr, gen, ext), tr, gen, ext).total, rel=1e-12)


def test_rhc_no_window_never_starts_when_startup_dominates(s0):
    gen, ext = s0
    gen = replace(gen, startup_beta=100.0)
    sched, _ = run_policy(Policy("rhc", 0), const_trace(1, 1, 2, 50), gen, ext)
    assert sched.y.sum() == 0


def test_rhc_worse_than_offline_on_adversarial_input(s0):
    gen, ext = s0
    gen = replace(gen, startup_beta=3.0)
    tr = adversarial_trace(lambda st, w, g, e: rhc_step(st, w, g, e), gen, ext, 60)
    _, cost = run_policy(Policy("rhc", 0), tr, gen, ext)
    assert cost.total > total_cost(ofa(tr, gen, ext), tr, gen, ext).total


def test_rhc_slow_unit_step_is_feasible():
    gen = _slow(min_on_Ton=2, min_off_Toff=2, ramp_up_Rup=0.5, ramp_down_Rdw=0.5)
    _, ext, _ = reference_params("S0")
    tr = Trace(a=[1, 1, 1, 0, 0, 1, 1, 1], h=[1] * 8, p=[2.0] * 8)
    sched, _ = run_policy(Policy("rhc", 3), tr, gen, ext, fast=False)
    assert validate_schedule(sched, tr, gen, ext) == []
    assert sched.y.sum() > 0


# ---- drivers


@given(st.integers(0, 10_000), st.sampled_from(["chase_s", "chase_s_plus", "chase_gen", "rhc"]), st.integers(0, 5), st.integers(1, 3))
def test_fast_path_matches_step_path(seed, name, omega, n):
    rng = np.random.default_rng(seed)
    gen, ext, tr = random_instance(rng, T=30, n_gens=n)
    a, ca = run_policy(Policy(name, omega), tr, gen, ext, n)
    b, cb = run_policy(Policy(name, omega), tr, gen, ext, n, fast=False)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.u, b.u)
    assert ca.total == cb.total


@given(st.integers(0, 10_000), st.integers(0, 4))
def test_online_never_beats_offline(seed, omega):
    rng = np.random.default_rng(seed)
    gen, ext, tr = random_instance(rng, T=50)
    off = total_cost(ofa(tr, gen, ext), tr, gen, ext).total
    for name in ("chase_s", "chase_s_plus", "rhc"):
        assert run_policy(Policy(name, omega), tr, gen, ext)[1].total >= off * (1 - 1e-12)


@given(st.integers(0, 10_000), st.integers(0, 4), st.sampled_from(["chase_s", "chase_gen", "rhc"]))
def test_decisions_are_causal(seed, omega, name):
    rng = np.random.default_rng(seed)
    gen, ext, tr = random_instance(rng, T=30)
    full, _ = run_policy(Policy(name, omega), tr, gen, ext)
    t = int(rng.integers(0, 30))
    cut = tr[: min(t + omega + 1, 30)]
    part, _ = run_policy(Policy(name, omega), cut, gen, ext)
    assert np.array_equal(full.y[: t + 1], part.y[: t + 1])


def test_full_lookahead_follows_offline_after_first_certainty(s0):
    gen, ext = s0
    rng = np.random.default_rng(2)
    T = 60
    tr = Trace(a=rng.uniform(0, 1.4, T), h=rng.uniform(0, 1.4, T), p=rng.uniform(0.01, 2, T))
    sched, cost = run_policy(Policy("chase_s", T), tr, gen, ext)
    y_off = ofa(tr, gen, ext).y[:, 0]
    d = delta_process(tr, gen, ext).values
    first = next(t for t in range(1, T + 1) if d[t] in (0.0, -2.0))
    # from the first certainty point onward both follow the segment structure
    assert np.array_equal(sched.y[first - 1 :, 0], y_off[first - 1 :])
    from mgsched.bounds import cr_bound

    off = total_cost(ofa(tr, gen, ext), tr, gen, ext).total
    assert cost.total <= cr_bound("chase_lk", gen, ext, T).components["3-2g"] * off


def test_worst_case_overlap_counts(s0):
    gen, ext = s0
    gen = replace(gen, startup_beta=10.0)
    tr = adversarial_trace(chase_s_step, gen, ext, 400)
    y_off = ofa(tr, gen, ext).y[:, 0]
    segs = [s for s in critical_segments(delta_process(tr, gen, ext)) if s.kind is SegmentKind.TYPE1]
    assert segs
    for omega in (0, 1, 3):
        y = run_policy(Policy("chase_s", omega), tr, gen, ext)[0].y[:, 0]
        for seg in segs:
            sl = slice(seg.start - 1, seg.end)
            assert int((y[sl] * y_off[sl]).sum()) == min(omega + 1, seg.end - seg.start + 1)


def test_noisy_forecast_leaves_present_slot(s0):
    gen, ext = s0
    rng = np.random.default_rng(0)
    tr = Trace(a=rng.uniform(0, 1, 20), h=rng.uniform(0, 1, 20), p=rng.uniform(0.1, 2, 20), elec=rng.uniform(1, 2, 20), wind=rng.uniform(0, 1, 20))
    fc = NoisyForecast(0.5, 0.5, 1.0, 1.0, seed=3)
    w = fc.window(tr, 4, 3)
    assert w[0] == tr[4]
    assert not np.array_equal(w.h, tr.window(4, 3).h)
    sched, _ = run_policy(Policy("chase_s", 3), tr, gen, ext, forecast=fc)
    again, _ = run_policy(Policy("chase_s", 3), tr, gen, ext, forecast=fc)
    assert np.array_equal(sched.y, again.y)
    with pytest.raises(ConfigError):
        run_policy(Policy("chase_s", 3), tr, gen, ext, forecast=fc, fast=True)


def test_policy_validation():
    with pytest.raises(ConfigError):
        Policy("greedy")
    with pytest.raises(ConfigError):
        Policy("chase", -1)
    assert Policy("rhc", 2).label == "rhc(w=2)"
    assert ExactForecast().window(const_trace(1, 1, 1, 5), 3, 4).T == 2
