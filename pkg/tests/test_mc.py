import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tritail import mc
from tritail.dist import PowerLawDist
from tritail.graph import count_triangles, sample_graph


@given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), min_size=1, max_size=8))
def test_moments_merge_matches_numpy(chunks):
    m = mc.Moments()
    for c in chunks:
        m.push(c)
    flat = np.concatenate([np.asarray(c) for c in chunks])
    assert m.n == flat.size
    assert m.mean == pytest.approx(flat.mean(), rel=1e-9, abs=1e-9)
    if flat.size > 1:
        assert m.var == pytest.approx(flat.var(ddof=1), rel=1e-7, abs=1e-7)


def test_batch_triangles_match_sparse_counter():
    d = PowerLawDist(1.5)
    g = np.random.default_rng(0)
    W = d.quantile(1 - g.random((40, 25)))
    counts = mc._batch_triangles(W, d.mean(), np.random.default_rng(1))
    # replay the same uniforms through the sparse path
    g2 = np.random.default_rng(1)
    iu = np.triu_indices(25, 1)
    U = g2.random((40, iu[0].size))
    for b in range(40):
        p = np.minimum(W[b, iu[0]] * W[b, iu[1]] / (d.mean() * 25), 1)
        e = U[b] < p
        A = np.zeros((25, 25), bool)
        A[iu[0][e], iu[1][e]] = True
        A = A | A.T
        brute = int(np.trace(np.linalg.matrix_power(A.astype(int), 3)) // 6)
        assert counts[b] == brute


@pytest.mark.parametrize("bad", [0, -3])
def test_reps_must_be_positive(bad):
    d = PowerLawDist(1.5)
    with pytest.raises(ValueError):
        mc.estimate_mean_triangles(d, 10, bad, "crude", 0)
    with pytest.raises(ValueError):
        mc.estimate_tail_crude(d, 10, 1.0, bad, 0)


def test_mean_triangles_modes_agree_at_n3(theory):
    ctx = theory(1.5)
    exact = ctx.mean_triangles(3)[0]
    for mode in ("crude", "conditional"):
        est = mc.estimate_mean_triangles(ctx.dist, 3, 20000, mode, 4)
        assert abs(est.value - exact) <= 3 * est.stderr


def test_conditional_mode_reduces_variance():
    d = PowerLawDist(1.5)
    crude = mc.estimate_mean_triangles(d, 30, 1500, "crude", 2)
    cond = mc.estimate_mean_triangles(d, 30, 1500, "conditional", 2)
    assert cond.stderr <= crude.stderr
    assert abs(crude.value - cond.value) <= 4 * math.hypot(crude.stderr, cond.stderr)


def test_estimates_do_not_depend_on_thread_count():
    d = PowerLawDist(1.6)
    a = mc.estimate_mean_triangles(d, 80, 30, "crude", 7, threads=1)
    b = mc.estimate_mean_triangles(d, 80, 30, "crude", 7, threads=3)
    assert a.value == b.value and a.stderr == b.stderr
    a = mc.estimate_tail_crude(d, 20, 3.0, 5000, 7, threads=1)
    b = mc.estimate_tail_crude(d, 20, 3.0, 5000, 7, threads=4)
    assert np.array_equal(a.samples, b.samples)


def test_crude_path_small_and_large_n_consistent():
    # the batched (small n) and per-replication (large n) code paths estimate the same law
    d = PowerLawDist(1.5)
    t = 2.0
    small = mc.estimate_tail_crude(d, 64, t, 4000, 1)
    g = [count_triangles(sample_graph(d.sample(64, 99, r), d.mean(), 99, labels=(r,))) > t for r in range(1500)]
    p = np.mean(g)
    assert abs(small.value - p) <= 4 * math.hypot(small.stderr, math.sqrt(p * (1 - p) / 1500))


def test_single_hub_share_mode_matches_crude(theory):
    ctx = theory(1.7)
    n, a = 20, 2.0
    m = ctx.mean_triangles(n)[0]
    crude = mc.estimate_tail_crude(ctx.dist, n, (1 + a) * m, 80000, 3)
    hub = mc.estimate_tail_single_hub(ctx.dist, n, a, 3.0, 40000, 3, m, mode="share")
    assert abs(crude.value - hub.value) <= 4 * math.hypot(crude.stderr, hub.stderr)
    assert hub.diagnostics["prefactor"] == pytest.approx(n * 3.0**-1.7)


def test_single_hub_impossible_event_is_zero(theory):
    ctx = theory(1.7)
    n = 10
    est = mc.estimate_tail_single_hub(ctx.dist, n, 1e6, 5.0, 2000, 0, ctx.mean_triangles(n)[0])
    assert est.value == 0.0 and est.stderr == 0.0


def test_single_hub_rejects_bad_args(theory):
    ctx = theory(1.7)
    with pytest.raises(ValueError):
        mc.estimate_tail_single_hub(ctx.dist, 10, 1.0, 0.5, 10, 0, 1.0)
    with pytest.raises(ValueError):
        mc.estimate_tail_single_hub(ctx.dist, 10, 1.0, 2.0, 10, 0, 1.0, mode="nope")


def test_boundary_probability_and_reweighting(theory):
    ctx = theory(4 / 3)
    a = 4.0
    direct = mc.estimate_boundary_payoff_prob(ctx, a, 20000, 1)
    eta = direct.diagnostics["eta"]
    assert 0 < direct.value < 1
    shifted = mc.estimate_boundary_payoff_prob(ctx, a, 20000, 1, b=eta / 2)
    assert abs(direct.value - shifted.value) <= 4 * math.hypot(direct.stderr, shifted.stderr)
    with pytest.raises(ValueError):
        mc.estimate_boundary_payoff_prob(ctx, a, 10, 1, b=2 * eta)


def test_hub_lln_empty_and_target(theory):
    ctx = theory(1.5)
    assert mc.verify_hub_lln(ctx.dist, 100, [], 5, 0).value == 0.0
    est = mc.verify_hub_lln(ctx.dist, 2000, [1.0], 40, 0, target=ctx.hub_payoff([1.0]))
    assert est.diagnostics["abs_error"] == abs(est.value - ctx.hub_payoff([1.0]))


def test_many_hub_construction_saturates(theory):
    ctx = theory(1.2)
    est = mc.verify_many_hub_lower_bound(ctx, 150, 1.0, 4, 0)
    assert est.diagnostics["min_hub_degree"] == 149
    assert est.diagnostics["B"] == mc.many_hub_count(1.2, 150, 1.0) == math.ceil(math.sqrt(2) * 150**0.1)


def test_bound_frequencies_within_bounds():
    rows = mc.verify_bound_frequencies(mc.default_bound_checks(), 3000, 11)
    assert {r["name"] for r in rows} == {"wellner", "empirical_tail_event", "binomial", "hub_count"}
    for r in rows:
        assert 0 <= r["bound"] <= 1
        assert r["ok"], r


def test_wellner_events_match_direct_sup():
    g = np.random.default_rng(4)
    n, y, lam = 30, 0.2, 1.5
    ev = mc._wellner_events(n, y, lam, np.random.default_rng(4), 300)
    u = np.sort(g.random((300, n)), axis=1)
    ts = np.linspace(y, 1, 20001)
    for i in range(300):
        ratio = np.searchsorted(u[i], ts, side="right") / n / ts
        # the grid can only undershoot the sup, so grid hits imply events
        if ratio.max() >= lam + 1e-9:
            assert ev[i]
