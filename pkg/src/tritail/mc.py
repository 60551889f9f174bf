"""Monte Carlo estimators for triangle counts and their rare-event tails.

Replication ``r`` draws from streams labelled by ``r`` only, and reductions run
in replication order, so every estimate is identical for any thread count.
Estimators that need millions of replications at small ``n`` run vectorized in
fixed-size batches; batch ``b`` owns the streams labelled ``b``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds as _bounds
from . import rng as _rng
from .dist import WeightVector
from .graph import PlantSpec, count_triangles, plant_hubs, sample_graph
from .kernel import KernelContext, conditional_mean_triangles, hub_excess

BATCH = 4096
SMALL_N = 64  # at or below this n the tail estimators use the batched dense path


@dataclass
class Estimate:
    value: float
    stderr: float
    reps: int
    seed: int
    diagnostics: dict = field(default_factory=dict)
    samples: np.ndarray = field(default=None, repr=False, compare=False)  # per-replication values

    def to_dict(self):
        d = asdict(self)
        d.pop("samples")
        return d


class Moments:
    """Streaming mean and variance; batches are merged with the pairwise update of Chan et al."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size == 0:
            return
        nb, mb = x.size, float(x.mean())
        m2b = float(np.sum((x - mb) ** 2))
        n = self.n + nb
        d = mb - self.mean
        self.mean += d * nb / n
        self.m2 += m2b + d * d * self.n * nb / n
        self.n = n

    @property
    def var(self):
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def stderr(self):
        return math.sqrt(self.var / self.n) if self.n > 0 else float("nan")


def _check_reps(reps):
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")


def _pmap(fn, items, threads):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _reduce(chunks, seed, scale=1.0, diagnostics=None):
    m = Moments()
    for c in chunks:
        m.push(c)
    samples = scale * np.concatenate([np.asarray(c, dtype=float).ravel() for c in chunks])
    return Estimate(scale * m.mean, scale * m.stderr, m.n, seed, diagnostics or {}, samples)


def _batches(reps):
    return [(b, min(BATCH, reps - b * BATCH)) for b in range(-(-reps // BATCH))]


# -- batched dense graphs for small n ---------------------------------------------

def _batch_triangles(W, mu, g):
    """Triangle counts of one Chung-Lu graph per row of ``W`` (dense, vectorized)."""
    B, n = W.shape
    iu = np.triu_indices(n, 1)
    p = np.minimum(W[:, iu[0]] * W[:, iu[1]] / (mu * n), 1.0)
    e = (g.random(p.shape) < p).astype(np.float32)
    A = np.zeros((B, n, n), dtype=np.float32)
    A[:, iu[0], iu[1]] = e
    A += A.transpose(0, 2, 1)
    # integer-valued float32 products are exact at these sizes
    return np.einsum("bij,bij->b", A @ A, A).astype(np.int64) // 6


def _rep_triangles(dist, w, seed, r):
    return count_triangles(sample_graph(WeightVector(w, dist.x_min), dist.mean(), seed, labels=(r,)))


# -- mean triangle count ----------------------------------------------------------

def estimate_mean_triangles(dist, n, reps, mode, seed, threads=1):
    """Unbiased estimate of ``E[△_n]``.

    ``crude`` samples a graph per replication and counts; ``conditional`` averages
    the exact conditional mean ``G_n`` over weight samples (never larger variance).
    """
    _check_reps(reps)
    if mode not in ("crude", "conditional"):
        raise ValueError(f"mode must be 'crude' or 'conditional', got {mode!r}")
    ctx = KernelContext.for_dist(dist, n)

    def one(r):
        wv = dist.sample(n, seed, r)
        if mode == "conditional":
            return conditional_mean_triangles(ctx, wv)
        return count_triangles(sample_graph(wv, dist.mean(), seed, labels=(r,)))

    vals = _pmap(one, range(reps), threads)
    return _reduce([vals], seed, diagnostics={"mode": mode, "n": n})


# -- tail probabilities -----------------------------------------------------------

def estimate_tail_crude(dist, n, threshold, reps, seed, threads=1):
    """Plain frequency of ``{△_n > threshold}``."""
    _check_reps(reps)

    if n <= SMALL_N:
        def chunk(bs):
            b, size = bs
            g = _rng.stream(seed, _rng.CRUDE, b)
            W = dist.quantile(_rng.uniforms_open(g, (size, n)))
            return (_batch_triangles(W, dist.mean(), g) > threshold).astype(float)
        chunks = _pmap(chunk, _batches(reps), threads)
    else:
        def one(r):
            return float(_rep_triangles(dist, dist.sample(n, seed, r).weights, seed, r) > threshold)
        chunks = [_pmap(one, range(reps), threads)]
    return _reduce(chunks, seed, diagnostics={"n": n, "threshold": threshold})


def estimate_tail_single_hub(dist, n, a, s, reps, seed, m_n, mode="discard", threads=1):
    """Single-big-jump estimate of ``P(△_n > (1+a) m_n)``.

    Vertex ``n`` is drawn from ``W | W > s``, the rest unconditionally, and the
    indicator is scaled by ``n F̄(s)``.  ``discard`` scores replications where some
    other weight also exceeds ``s`` as 0 (estimating the one-exceedance part);
    ``share`` scores them ``1/L`` with ``L`` the number of exceedances, which is
    unbiased for ``P(△_n > (1+a) m_n, L ≥ 1)``.
    """
    _check_reps(reps)
    if s < dist.x_min:
        raise ValueError(f"threshold s={s} is below x_min={dist.x_min}")
    if mode not in ("discard", "share"):
        raise ValueError(f"mode must be 'discard' or 'share', got {mode!r}")
    threshold = (1 + a) * m_n
    mu = dist.mean()

    def score(tri, W):
        extra = np.sum(W[:, :-1] > s, axis=1)
        hit = (tri > threshold).astype(float)
        w = np.where(extra == 0, 1.0, 0.0) if mode == "discard" else 1.0 / (1 + extra)
        return hit * w, int(np.sum(extra > 0)), hit

    if n <= SMALL_N:
        def chunk(bs):
            b, size = bs
            g = _rng.stream(seed, _rng.HUB, b)
            W = dist.quantile(_rng.uniforms_open(g, (size, n)))
            W[:, -1] = dist.sample_above(s, size, g)
            return score(_batch_triangles(W, mu, g), W)
        parts = _pmap(chunk, _batches(reps), threads)
    else:
        def one(r):
            w = dist.sample(n, seed, r).weights
            w[-1] = dist.sample_above(s, 1, _rng.stream(seed, _rng.HUB, r))[0]
            return score(np.array([_rep_triangles(dist, w, seed, r)]), w[None, :])
        parts = _pmap(one, range(reps), threads)
    prefactor = n * float(dist.tail(s))
    multi = sum(p[1] for p in parts)
    raw = float(sum(np.sum(p[2]) for p in parts)) / reps
    diag = {"n": n, "a": a, "s": s, "mode": mode, "prefactor": prefactor,
            "multi_exceedance": multi, "multi_exceedance_frac": multi / reps,
            "hit_rate": raw, "bias_scale": prefactor**2}
    return _reduce([p[0] for p in parts], seed, scale=prefactor, diagnostics=diag)


# -- boundary regime --------------------------------------------------------------

def estimate_boundary_payoff_prob(ctx, a, reps, seed, b=None):
    """Probability that ``k(a)`` hubs of size ``n X_i`` pay off ``≥ a C³H``.

    ``X_i`` are i.i.d. Pareto(α) above ``η(a)``.  With ``b < η(a)`` the hubs are
    drawn above ``b`` instead and the event is restricted to ``all X_i > η``,
    reweighted by ``(η/b)^{kα}``, the inverse probability of that restriction.
    """
    _check_reps(reps)
    if not ctx.standing_condition(a):
        raise ValueError("standing condition (k(a)-1)μ + (k(a)-1)(k(a)-2)/2 < a·C³H fails")
    k = ctx.hub_count(a)
    eta = ctx.eta_threshold(a)
    base = eta if b is None else float(b)
    if not 0 < base <= eta:
        raise ValueError(f"threshold b must lie in (0, η(a)] = (0, {eta:.6g}], got {base}")
    alpha = ctx.dist.alpha
    target = a * ctx.C3H
    weight = (eta / base) ** (k * alpha)

    def chunk(bs):
        i, size = bs
        g = _rng.stream(seed, _rng.PAYOFF, i)
        X = base * _rng.uniforms_open(g, (size, k)) ** (-1.0 / alpha)
        hit = ctx.hub_payoff_batch(X) >= target
        if base < eta:
            hit &= np.all(X > eta, axis=1)
        return weight * hit.astype(float)

    diag = {"k": k, "eta": eta, "b": base, "weight": weight, "target": target}
    return _reduce(_pmap(chunk, _batches(reps), 1), seed, diagnostics=diag)


# -- law-of-large-numbers and construction checks ---------------------------------

def verify_hub_lln(dist, n, z, reps, seed, target=None, threads=1):
    """Mean and stderr of ``G_{n,l}(z)/n`` over fresh weight vectors."""
    _check_reps(reps)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    ctx = KernelContext.for_dist(dist, n)
    if z.size == 0:
        return Estimate(0.0, 0.0, reps, seed, {"l": 0})
    vals = _pmap(lambda r: hub_excess(ctx, dist.sample(n, seed, r), z) / n, range(reps), threads)
    est = _reduce([vals], seed, diagnostics={"l": int(z.size), "n": n})
    if target is not None:
        est.diagnostics.update(target=target, abs_error=abs(est.value - target))
    return est


def verify_planted_single_hub(theory, n, a, reps, seed, threads=1):
    """Mean ``△_n / m_n`` with one vertex planted at ``c_a(n)``."""
    _check_reps(reps)
    dist = theory.dist
    c = theory.hub_threshold(n, a)
    m_n = theory.mean_triangles(n)[0]
    spec = PlantSpec((c,))

    def one(r):
        wv = plant_hubs(dist.sample(n, seed, r), spec)
        return count_triangles(sample_graph(wv, dist.mean(), seed, labels=(r,))) / m_n

    vals = _pmap(one, range(reps), threads)
    return _reduce([vals], seed, diagnostics={"n": n, "a": a, "c_a": c, "m_n": m_n})


def many_hub_count(alpha, n, a):
    """``B = ⌈√(2a) n^{1 - 3α/4}⌉`` saturated hubs."""
    return math.ceil(math.sqrt(2 * a) * n ** (1 - 0.75 * alpha))


def verify_many_hub_lower_bound(theory, n, a, reps, seed, slack=None, hub_weight=None, threads=1):
    """Frequency of ``△_n ≥ (C³H + a - slack) n^{3 - 3α/2}`` with ``B`` planted saturated hubs.

    Hubs default to weight ``μ n · n`` so every hub edge is certain for any ``x_min``;
    pass ``hub_weight`` (e.g. ``μ n``) to use the lighter construction.
    """
    _check_reps(reps)
    dist = theory.dist
    alpha = dist.alpha
    slack = 0.2 * a if slack is None else slack
    B = many_hub_count(alpha, n, a)
    mu = dist.mean()
    hw = mu * n * n if hub_weight is None else hub_weight
    spec = PlantSpec((hw,) * B)
    threshold = (theory.C3H + a - slack) * n ** (3 - 1.5 * alpha)

    def one(r):
        wv = plant_hubs(dist.sample(n, seed, r), spec)
        g = sample_graph(wv, mu, seed, labels=(r,))
        deg = g.degrees()[n - B:] if B else np.array([n - 1])
        return count_triangles(g), int(deg.min())

    out = _pmap(one, range(reps), threads)
    tri = np.array([t for t, _ in out], dtype=float)
    diag = {"B": B, "threshold": threshold, "hub_weight": hw, "min_hub_degree": min(d for _, d in out),
            "mean_triangles": float(tri.mean())}
    return _reduce([(tri >= threshold).astype(float)], seed, diagnostics=diag)


# -- empirical frequencies against the analytic bounds ----------------------------

def _wellner_events(n, y, lam, g, size):
    u = np.sort(g.random((size, n)), axis=1)
    k = np.arange(1, n + 1) / n
    # F_n(t)/t jumps up at order statistics and decays in between
    r = np.where(u >= y, k / u, 0.0).max(axis=1)
    at_y = np.sum(u <= y, axis=1) / n / y
    return np.maximum(r, at_y) >= lam


def _en_events(dist, n, spec, g, size, seed, b):
    return np.array([not _bounds.check_event_En(dist.sample(n, seed, _rng.BOUNDS, b, i), spec, dist)
                     for i in range(size)])


def _binomial_events(n, p, b, g, size):
    s = np.sum(g.random((size, n)) < p, axis=1)
    return s > (1 + b) * n * p


def _hubcount_events(dist, n, gamma, beta, d, u, g, size):
    w = dist.quantile(_rng.uniforms_open(g, (size, n)))
    return np.sum(w > d * n**beta, axis=1) >= math.ceil(u * n**gamma)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    params: dict
    bound: float
    events: object  # callable (generator, size, seed, batch) -> bool array


def default_bound_checks(dist=None, en_spec=None):
    from .dist import PowerLawDist
    dist = dist or PowerLawDist(1.5)
    # δ near its upper limit 1 - 1/α keeps the composite bound well below 1 at n = 200
    en_spec = en_spec or _bounds.EnEventSpec(A=1.0, c=2.0, delta=0.3)
    hub = PowerLawDist(1.2)
    n_en = 200
    return [
        BoundCheck("wellner", {"n": 200, "y": 0.2, "lambda": 2.0}, _bounds.wellner_bound(200, 0.2, 2.0),
                   lambda g, size, seed, b: _wellner_events(200, 0.2, 2.0, g, size)),
        BoundCheck("empirical_tail_event", {"n": n_en, "alpha": dist.alpha, "A": en_spec.A, "c": en_spec.c,
                                          "delta": en_spec.window_exponent(dist.alpha)},
                   _bounds.composite_bound(dist, n_en, en_spec),
                   lambda g, size, seed, b: _en_events(dist, n_en, en_spec, g, size, seed, b)),
        BoundCheck("binomial", {"n": 1000, "p": 0.01, "b": 1.0}, _bounds.binomial_bound(10.0, 1.0),
                   lambda g, size, seed, b: _binomial_events(1000, 0.01, 1.0, g, size)),
        BoundCheck("hub_count", {"n": 200, "alpha": 1.2, "gamma": 0.0, "beta": 1.0, "d": 1.0, "u": 2.0},
                   _bounds.hub_count_tail_bound(200, 0.0, 1.0, 1.0, 2.0, 1.2),
                   lambda g, size, seed, b: _hubcount_events(hub, 200, 0.0, 1.0, 1.0, 2.0, g, size)),
    ]


def verify_bound_frequencies(checks, reps, seed, threads=1):
    """Observed event frequency next to each analytic bound.

    A row fails when the frequency exceeds the bound by more than 3 binomial stderr.
    """
    _check_reps(reps)
    rows = []
    for ci, chk in enumerate(checks):
        def chunk(bs, chk=chk, ci=ci):
            b, size = bs
            g = _rng.stream(seed, _rng.BOUNDS, ci, b)
            return chk.events(g, size, seed, b).astype(float)
        est = _reduce(_pmap(chunk, _batches(reps), threads), seed)
        p = est.value
        se = math.sqrt(max(p * (1 - p), 1.0 / reps) / reps)
        rows.append({"name": chk.name, "params": chk.params, "observed": p, "stderr": se,
                     "bound": chk.bound, "ok": bool(p <= chk.bound + 3 * se)})
    return rows
