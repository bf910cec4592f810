"""Tests for the implicit gradient flow and extinction-profile extraction."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigenflow import (
    GraphTotalVariation,
    ProxSettings,
    Signal,
    TotalVariation1D,
    WeightedGraph,
    extract_profile,
    high_rayleigh_subgradients,
    rayleigh,
    run_flow,
)

STEP4 = np.array([1.0, 1.0, -1.0, -1.0])
EIGEN4 = 0.5 * STEP4  # eigenfunction at natural scale, norm 1


def step_trace(delta=0.25):
    fun = TotalVariation1D(4)
    return fun, run_flow(fun, Signal(STEP4, fun.domain_id), delta=delta)


# ---------------------------------------------------------------------------
# rayleigh quotient


def test_rayleigh_examples():
    fun = TotalVariation1D(4)
    assert rayleigh(fun, Signal(EIGEN4, fun.domain_id)) == pytest.approx(1.0)
    assert rayleigh(fun, Signal(STEP4, fun.domain_id)) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        rayleigh(fun, Signal(np.full(4, 3.0), fun.domain_id))


def test_rayleigh_scales_linearly():
    fun = TotalVariation1D(4)
    base = rayleigh(fun, Signal(EIGEN4, fun.domain_id))
    for c in (0.25, 2.0, 7.5):
        assert rayleigh(fun, Signal(c * EIGEN4, fun.domain_id)) == pytest.approx(
            c * base, rel=1e-12
        )


# ---------------------------------------------------------------------------
# run_flow basics


def test_flow_zero_input_is_extinct_immediately():
    fun = TotalVariation1D(5)
    trace = run_flow(fun, Signal(np.zeros(5), fun.domain_id))
    assert trace.extinct
    assert trace.extinct_at == 0
    assert trace.extinction_time == 0.0
    assert trace.steps == ()
    with pytest.raises(ValueError):
        extract_profile(fun, trace)


def test_flow_constant_input_is_null_and_extinct():
    fun = TotalVariation1D(5)
    trace = run_flow(fun, Signal(np.full(5, 3.0), fun.domain_id))
    assert trace.extinct_at == 0
    assert_allclose(trace.initial.values, np.zeros(5))


def test_flow_step_signal_closed_form():
    """The two-valued step decays linearly: u_k = (1 - k/8) f at delta 1/4."""
    fun, trace = step_trace(delta=0.25)
    assert trace.extinct
    assert trace.extinct_at == 8
    assert trace.extinction_time == pytest.approx(2.0, abs=0.25)
    assert len(trace.steps) == 8
    for step in trace.steps:
        assert_allclose(step.u.values, (1.0 - step.k / 8.0) * STEP4, atol=1e-12)
        assert_allclose(step.p.values, EIGEN4, atol=1e-12)
        assert step.p_norm == pytest.approx(1.0, abs=1e-12)
    assert trace.steps[0].rayleigh is None
    for step in trace.steps[1:]:
        assert step.rayleigh == pytest.approx(1.0, abs=1e-12)


def test_flow_records_null_projected_initial():
    fun = TotalVariation1D(4)
    trace = run_flow(fun, Signal([2.0, 2.0, 0.0, 0.0], fun.domain_id), delta=0.25)
    assert_allclose(trace.initial.values, STEP4)
    assert trace.extinct


def test_flow_default_threshold_from_first_subgradient():
    fun, trace = step_trace()
    assert trace.extinction_threshold == pytest.approx(1e-6)
    assert trace.gap_tol == pytest.approx(1e-8)


def test_flow_telescoping_identity():
    """u_K = f0 - delta * sum p_k holds exactly by construction."""
    fun = TotalVariation1D(16)
    rng = np.random.default_rng(2)
    f = Signal(rng.standard_normal(16), fun.domain_id)
    trace = run_flow(fun, f, delta=0.05)
    assert trace.extinct
    accum = trace.initial.values - trace.delta * sum(
        s.p.values for s in trace.steps
    )
    assert_allclose(accum, trace.steps[-1].u.values, atol=1e-12)
    # near extinction the iterate itself is negligible
    assert np.linalg.norm(trace.steps[-1].u.values) <= trace.delta * 1e-5


def test_flow_subgradient_norms_never_increase():
    fun = TotalVariation1D(12)
    rng = np.random.default_rng(4)
    f = Signal(np.repeat(rng.standard_normal(4), 3), fun.domain_id)
    trace = run_flow(fun, f)
    norms = [s.p_norm for s in trace.steps]
    for a, b in zip(norms, norms[1:]):
        assert b <= a + 1e-10


def test_flow_nested_plateaus_walk_through_phases():
    """A bump inside a wider plateau produces at least two subgradient
    plateaus with decreasing norm before extinction."""
    fun = TotalVariation1D(6)
    f = Signal([0.0, 0.0, 2.0, 2.0, 0.0, 0.0], fun.domain_id)
    trace = run_flow(fun, f, delta=0.05)
    assert trace.extinct
    groups = 1
    for prev, cur in zip(trace.steps, trace.steps[1:]):
        if np.linalg.norm(cur.p.values - prev.p.values) > 1e-9 * max(
            prev.p_norm, 1.0
        ):
            groups += 1
    assert groups >= 2
    norms = [s.p_norm for s in trace.steps]
    assert norms[0] > norms[-1]


def test_flow_max_steps_returns_warning():
    fun = TotalVariation1D(4)
    trace = run_flow(fun, Signal(STEP4, fun.domain_id), delta=0.25, max_steps=3)
    assert not trace.extinct
    assert trace.extinct_at is None
    assert trace.extinction_time is None
    assert trace.warning is not None
    assert len(trace.steps) == 3
    with pytest.raises(ValueError):
        extract_profile(fun, trace)


def test_flow_rejects_bad_parameters():
    fun = TotalVariation1D(4)
    f = Signal(STEP4, fun.domain_id)
    with pytest.raises(ValueError):
        run_flow(fun, f, delta=0.0)
    with pytest.raises(ValueError):
        run_flow(fun, f, extinction_threshold=0.0)


def test_flow_explicit_threshold_is_respected():
    fun = TotalVariation1D(4)
    f = Signal(STEP4, fun.domain_id)
    trace = run_flow(fun, f, delta=0.25, extinction_threshold=1e-3)
    assert trace.extinction_threshold == pytest.approx(1e-3)
    assert trace.extinct


def test_flow_on_graph_matches_grid_flow():
    """The unit-weight path graph reproduces the 1-D grid flow."""
    n = 8
    fun_g = GraphTotalVariation(
        WeightedGraph.from_edge_list(n, [(i, i + 1, 1.0) for i in range(n - 1)])
    )
    fun_1 = TotalVariation1D(n)
    f = np.array([2.0, 2.0, 2.0, 2.0, -2.0, -2.0, -2.0, -2.0])
    tg = run_flow(fun_g, Signal(f, fun_g.domain_id), delta=0.2)
    t1 = run_flow(fun_1, Signal(f, fun_1.domain_id), delta=0.2)
    assert tg.extinct and t1.extinct
    assert abs(tg.extinct_at - t1.extinct_at) <= 1
    for sg, s1 in zip(tg.steps, t1.steps):
        assert_allclose(sg.u.values, s1.u.values, atol=2e-5)


# ---------------------------------------------------------------------------
# extinction profile


def test_extract_profile_step_signal():
    fun, trace = step_trace()
    profile = extract_profile(fun, trace)
    assert profile.rayleigh == pytest.approx(1.0, abs=1e-12)
    assert_allclose(profile.p_star.values, EIGEN4, atol=1e-12)
    assert profile.eigenvalue == pytest.approx(1.0, abs=1e-12)
    assert 2 <= profile.source_step <= trace.extinct_at


def test_extract_profile_prefers_late_steps_on_ties():
    fun, trace = step_trace()
    profile = extract_profile(fun, trace)
    # all averaged subgradients tie at R = 1, so the last one wins
    assert profile.source_step == trace.steps[-1].k


def test_extract_profile_of_eigenfunction_is_parallel():
    fun = TotalVariation1D(4)
    f = Signal(3.0 * EIGEN4, fun.domain_id)
    trace = run_flow(fun, f)
    profile = extract_profile(fun, trace)
    cos = float(
        np.dot(profile.p_star.values, EIGEN4)
        / (np.linalg.norm(profile.p_star.values) * np.linalg.norm(EIGEN4))
    )
    assert cos == pytest.approx(1.0, abs=1e-12)
    assert profile.rayleigh == pytest.approx(1.0, abs=1e-10)


def test_extract_profile_needs_two_steps():
    fun = TotalVariation1D(4)
    # dies within a single step: nothing to average
    trace = run_flow(fun, Signal(0.05 * STEP4, fun.domain_id), delta=0.25)
    assert trace.extinct
    assert len(trace.steps) == 1
    with pytest.raises(ValueError):
        extract_profile(fun, trace)


# ---------------------------------------------------------------------------
# high-Rayleigh subgradients


def test_high_rayleigh_single_plateau():
    fun, trace = step_trace()
    entries = high_rayleigh_subgradients(fun, trace)
    assert len(entries) == 1
    k, p_hat, ray = entries[0]
    assert ray == pytest.approx(1.0, abs=1e-12)
    assert_allclose(p_hat.values, EIGEN4, atol=1e-12)


def test_high_rayleigh_threshold_above_one_is_clamped():
    fun, trace = step_trace()
    entries = high_rayleigh_subgradients(fun, trace, threshold=5.0)
    assert len(entries) == 1
    with pytest.raises(ValueError):
        high_rayleigh_subgradients(fun, trace, threshold=0.0)


def test_high_rayleigh_min_plateau_screens_short_groups():
    fun, trace = step_trace()
    assert high_rayleigh_subgradients(fun, trace, min_plateau=100) == []
    loose = high_rayleigh_subgradients(fun, trace, min_plateau=1)
    assert len(loose) >= 1


def test_high_rayleigh_empty_trace_gives_empty_list():
    fun = TotalVariation1D(4)
    trace = run_flow(fun, Signal(np.zeros(4), fun.domain_id))
    assert high_rayleigh_subgradients(fun, trace) == []


def test_high_rayleigh_orders_by_decreasing_norm():
    fun = TotalVariation1D(6)
    f = Signal([0.0, 0.0, 2.0, 2.0, 0.0, 0.0], fun.domain_id)
    trace = run_flow(fun, f, delta=0.02)
    entries = high_rayleigh_subgradients(fun, trace, threshold=0.5)
    assert len(entries) >= 1
    norms = [float(np.linalg.norm(p.values)) for _, p, _ in entries]
    assert norms == sorted(norms, reverse=True)
    for _, _, ray in entries:
        assert ray >= 0.5
