import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tritail.dist import PowerLawDist
from tritail.kernel import (KernelContext, conditional_mean_triangles, edge_prob, hub_excess, hub_excess_abs,
                            triangle_kernel, triangle_sum)


def brute_gn(w, scale):
    return sum(min(w[i] * w[j] / scale, 1) * min(w[j] * w[k] / scale, 1) * min(w[i] * w[k] / scale, 1)
               for i, j, k in itertools.combinations(range(len(w)), 3))


def brute_hub(w, h, scale):
    p = lambda x, y: min(x * y / scale, 1.0)
    total = 0.0
    for hi in h:
        total += sum(p(w[i], w[j]) * p(w[i], hi) * p(w[j], hi) for i, j in itertools.combinations(range(len(w)), 2))
    for i, j in itertools.combinations(range(len(h)), 2):
        total += sum(p(h[i], h[j]) * p(x, h[i]) * p(x, h[j]) for x in w)
    return total


def test_edge_prob_examples():
    ctx = KernelContext(100, 3.0)
    assert edge_prob(ctx, 0.0, 50.0) == 0.0
    assert edge_prob(ctx, 10.0, 10.0) == pytest.approx(1 / 3)
    assert edge_prob(ctx, 15.0, 20.0) == 1.0


def test_triangle_kernel_examples():
    ctx = KernelContext(10, 3.0)
    assert triangle_kernel(ctx, 2, 3, 5) == pytest.approx(1 / 30)
    assert triangle_kernel(ctx, 2, 3, 0) == 0.0
    assert triangle_kernel(ctx, 10, 10, 10) == 1.0


@given(st.lists(st.floats(0.0, 100.0), min_size=3, max_size=3), st.integers(1, 50))
def test_triangle_kernel_symmetric(uvw, n):
    ctx = KernelContext(n, 2.5)
    vals = {triangle_kernel(ctx, *p) for p in itertools.permutations(uvw)}
    assert max(vals) - min(vals) <= 1e-15
    assert 0.0 <= min(vals) <= max(vals) <= 1.0


@given(st.lists(st.floats(0.0, 5.0), min_size=3, max_size=3))
def test_triangle_kernel_unsaturated_is_product(uvw):
    ctx = KernelContext(10, 3.0)  # scale 30, products stay below 25
    u, v, w = uvw
    assert triangle_kernel(ctx, u, v, w) == pytest.approx((u * v) * (v * w) * (u * w) / 30**3, rel=1e-12, abs=1e-300)


def test_gn_small_cases():
    ctx = KernelContext(3, 2.0)
    w = [1.0, 2.0, 3.0]
    assert conditional_mean_triangles(ctx, w) == pytest.approx(triangle_kernel(ctx, *w))
    with pytest.raises(ValueError):
        conditional_mean_triangles(KernelContext(4, 2.0), w)
    big = np.full(20, 100.0)
    assert conditional_mean_triangles(KernelContext(20, 2.0), big) == pytest.approx(math.comb(20, 3))


@pytest.mark.parametrize("seed", range(5))
def test_gn_matches_brute_force_both_paths(seed):
    d = PowerLawDist(1.5)
    wv = d.sample(30, seed)
    ctx = KernelContext.for_dist(d, 30)
    ref = brute_gn(wv.weights, ctx.scale)
    assert conditional_mean_triangles(ctx, wv) == pytest.approx(ref, rel=1e-10)
    assert conditional_mean_triangles(ctx, wv, n_exact=0) == pytest.approx(ref, rel=1e-10)


def test_sorted_path_matches_dense_at_moderate_n():
    d = PowerLawDist(1.3)
    wv = d.sample(900, 11)
    ctx = KernelContext.for_dist(d, 900)
    assert triangle_sum(wv.weights, ctx.scale, n_exact=0) == pytest.approx(
        triangle_sum(wv.weights, ctx.scale, n_exact=10**6), rel=1e-10)


def test_gn_monotone_and_permutation_invariant():
    d = PowerLawDist(1.6)
    wv = d.sample(60, 1)
    ctx = KernelContext.for_dist(d, 60)
    g0 = conditional_mean_triangles(ctx, wv)
    perm = np.random.default_rng(0).permutation(60)
    assert conditional_mean_triangles(ctx, wv.weights[perm]) == pytest.approx(g0, rel=1e-12)
    w = wv.weights.copy()
    w[5] *= 3
    assert conditional_mean_triangles(ctx, w) >= g0


def test_hub_excess_examples():
    d = PowerLawDist(1.5)
    n = 100
    wv = d.sample(n, 2)
    ctx = KernelContext.for_dist(d, n)
    assert hub_excess(ctx, wv, []) == 0.0
    ref = brute_hub(wv.weights, [n * 0.7], ctx.scale)
    assert hub_excess(ctx, wv, [0.7]) == pytest.approx(ref, rel=1e-10)
    ref2 = brute_hub(wv.weights[:40], [n * 0.3, n * 2.0], ctx.scale)
    assert hub_excess(ctx, wv.weights[:40], [0.3, 2.0]) == pytest.approx(ref2, rel=1e-10)
    with pytest.raises(ValueError):
        hub_excess(ctx, wv, [0.0])


def test_hub_excess_saturated_pair_counts_every_vertex():
    d = PowerLawDist(1.5)
    n = 50
    wv = d.sample(n, 0)
    ctx = KernelContext.for_dist(d, n)
    pair_only = hub_excess(ctx, wv, [1e6, 1e6]) - 2 * hub_excess(ctx, wv, [1e6])
    assert pair_only == pytest.approx(n, rel=1e-12)


def test_adding_a_vertex_decomposes_as_hub_excess():
    d = PowerLawDist(1.4)
    n = 40
    wv = d.sample(n, 5)
    z = 37.0
    scale = d.mean() * n
    with_extra = np.append(wv.weights, z)
    # G over n+1 vertices at the same scale = G_n + single-hub excess of weight z
    assert triangle_sum(with_extra, scale) == pytest.approx(
        triangle_sum(wv.weights, scale) + hub_excess_abs(KernelContext(n, d.mean()), wv, [z]), rel=1e-12)
