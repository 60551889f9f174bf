"""Chung-Lu connection kernel and the conditional triangle functionals.

``G_n`` is the expected triangle count given the weights and ``G_{n,l}`` is the
expected number of extra triangles created by ``l`` hubs of size ``n z_i``.
Both are computed exactly (as finite sums), never estimated.
"""

from dataclasses import dataclass

import numpy as np

N_EXACT = 1500


@dataclass(frozen=True)
class KernelContext:
    n: int
    mu: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def scale(self):
        """Saturation scale ``μ n``: an edge is certain once ``h h' ≥ μ n``."""
        return self.mu * self.n

    @classmethod
    def for_dist(cls, dist, n):
        return cls(int(n), dist.mean())


def edge_prob(ctx, h, h2):
    return np.minimum(np.multiply(h, h2) / ctx.scale, 1.0)


def triangle_kernel(ctx, u, v, w):
    """``f_n(u, v, w)``: probability that three vertices with these weights form a triangle."""
    return edge_prob(ctx, u, v) * edge_prob(ctx, v, w) * edge_prob(ctx, u, w)


def conditional_mean_triangles(ctx, wv, n_exact=N_EXACT):
    """``G_n = Σ_{i<j<k} f_n(W_i, W_j, W_k)`` for a weight vector of length ``ctx.n``."""
    w = _weights(wv)
    if w.size != ctx.n:
        raise ValueError(f"weight vector has length {w.size}, context expects n={ctx.n}")
    return triangle_sum(w, ctx.scale, n_exact=n_exact)


def triangle_sum(w, scale, n_exact=N_EXACT):
    """``Σ_{i<j<k} Π min(w_a w_b / scale, 1)`` over all index triples.

    Dense evaluation up to ``n_exact`` weights, sorted prefix-sum evaluation
    above it.  Both compute the same finite sum.
    """
    w = np.asarray(w, dtype=float)
    if w.size < 3:
        return 0.0
    if w.size <= n_exact:
        return _triangle_sum_dense(w, scale)
    return _triangle_sum_sorted(w, scale)


def _triangle_sum_dense(w, scale):
    p = np.minimum(np.outer(w, w) / scale, 1.0)
    np.fill_diagonal(p, 0.0)
    # trace(P^3) counts each unordered triple 6 times
    return float(np.sum(p * (p @ p)) / 6.0)


def _triangle_sum_sorted(w, scale):
    w = np.sort(w)
    n = w.size
    s1 = np.concatenate(([0.0], np.cumsum(w)))
    s2 = np.concatenate(([0.0], np.cumsum(w * w)))
    with np.errstate(divide="ignore"):
        # first index k with w_x w_k >= scale; saturated from there on
        sat = np.searchsorted(w, scale / w, side="left")
    total = 0.0
    for i in range(n - 2):
        j = np.arange(i + 1, n - 1)
        wi, wj = w[i], w[j]
        a = np.maximum(j + 1, sat[j])
        b = np.maximum(a, sat[i])
        inner = (wi * wj / scale**2) * (s2[a] - s2[j + 1]) + (wi / scale) * (s1[b] - s1[a]) + (n - b)
        total += float(np.sum(np.minimum(wi * wj / scale, 1.0) * inner))
    return total


def _pair_sum_weighted(w, g, scale):
    """``Σ_{j<k} min(w_j w_k / scale, 1) g_j g_k`` in O(n log n)."""
    order = np.argsort(w, kind="stable")
    w, g = w[order], g[order]
    n = w.size
    wg = np.concatenate(([0.0], np.cumsum(w * g)))
    gg = np.concatenate(([0.0], np.cumsum(g)))
    with np.errstate(divide="ignore"):
        sat = np.searchsorted(w, scale / w, side="left")
    j = np.arange(n)
    a = np.maximum(j + 1, sat)
    unsat = (w * g / scale) * (wg[a] - wg[j + 1])
    full = g * (gg[n] - gg[a])
    return float(np.sum(unsat + full))


def hub_excess(ctx, wv, z):
    """``G_{n,l}(z_1..z_l)``: expected extra triangles from hubs of weight ``n z_i``.

    Single-hub part sums over pairs of regular nodes, hub-pair part over single
    regular nodes; the hub-hub edge probability is included in the latter.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z <= 0):
        raise ValueError("hub sizes z_i must be positive")
    return hub_excess_abs(ctx, wv, ctx.n * z)


def hub_excess_abs(ctx, wv, hub_weights):
    """Same as :func:`hub_excess` with hub weights given in absolute units."""
    w = _weights(wv)
    h = np.atleast_1d(np.asarray(hub_weights, dtype=float))
    scale = ctx.scale
    total = 0.0
    for hi in h:
        g = np.minimum(w * hi / scale, 1.0)
        total += _pair_sum_weighted(w, g, scale)
    for i in range(h.size):
        gi = np.minimum(w * h[i] / scale, 1.0)
        for j in range(i + 1, h.size):
            gj = np.minimum(w * h[j] / scale, 1.0)
            total += min(h[i] * h[j] / scale, 1.0) * float(np.sum(gi * gj))
    return total


def _weights(wv):
    return np.asarray(getattr(wv, "weights", wv), dtype=float)
