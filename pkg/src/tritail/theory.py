"""Deterministic asymptotic quantities for triangle counts.

Integrals against the weight law are reduced with the closed-form "pair
integral"

    J(b, c) = ∫ min(b x / s, 1) min(c x / s, 1) dF(x),

which is piecewise in the truncated moments of the Pareto law.  What remains
is integrated numerically in log coordinates, with breakpoints placed on the
saturation curves so each cell has a smooth integrand.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .dist import PowerLawDist

SQRT_EPS_REL = 1e-10
_LOG_CLAMP = 700.0


class QuadratureError(RuntimeError):
    def __init__(self, what, value, error, tol):
        super().__init__(f"{what}: quadrature error estimate {error:.3g} exceeds tolerance "
                         f"{tol:.3g} (value {value:.12g})")
        self.value = value
        self.error = error


class InfeasibleError(ValueError):
    pass


class _LimitMeasure:
    """Measure with density ``α u^{-α-1}`` on ``(0, ∞)``: the scaling limit of ``dF``."""

    x_min = 0.0
    C = 1.0

    def __init__(self, alpha):
        self.alpha = alpha

    def tail(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return t ** -self.alpha

    def trunc_second_moment(self, t):
        a = self.alpha
        return a * np.asarray(t, dtype=float) ** (2 - a) / (2 - a)

    def tail_first_moment(self, t):
        a = self.alpha
        with np.errstate(divide="ignore"):
            return a * np.asarray(t, dtype=float) ** (1 - a) / (a - 1)


def pair_integral(measure, scale, b, c):
    """``J(b, c) = ∫ min(b x/scale, 1) min(c x/scale, 1) dM(x)``, vectorized in ``b, c``."""
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    lo = np.minimum(b, c)
    hi = np.maximum(b, c)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = scale / hi
        t2 = scale / lo
        # x < t1: both factors linear; t1 <= x < t2: only the smaller one; x >= t2: saturated
        first = (lo / scale) * ((hi / scale) * measure.trunc_second_moment(t1))
        middle = (lo / scale) * (measure.tail_first_moment(t1) - measure.tail_first_moment(t2))
        last = measure.tail(t2)
        out = np.where(lo > 0, first + middle + last, 0.0)
    return out[()] if out.ndim == 0 else out


def _linear_moment(measure, scale, z):
    """``∫ x min(z x/scale, 1) dM(x)``."""
    t = scale / z
    return (z / scale) * measure.trunc_second_moment(t) + measure.tail_first_moment(t)


def _quad(f, lo, hi, points, epsrel):
    """Sum of adaptive quadratures over ``[lo, hi]`` split at ``points``; returns (value, abserr)."""
    cuts = sorted(p for p in points if lo < p < hi)
    edges = [lo] + cuts + [hi]
    val = err = 0.0
    for x0, x1 in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(f, x0, x1, epsrel=epsrel, epsabs=0.0, limit=200)
        val += v
        err += e
    return val, err


def triple_expectation(measure, scale, epsrel=1e-10):
    """``∫∫∫ f(x, y, z) dF³`` for a Pareto law, ``f`` the triangle kernel at saturation ``scale``.

    Integrates ``min(uv/scale,1) J(u, v)`` over ``v > u`` (times 2), in log
    coordinates.  Returns (value, error estimate).
    """
    a = measure.alpha
    log_wa2 = 2 * math.log(a * measure.C)
    log_s = math.log(scale)
    s_lo = math.log(measure.x_min)
    kink = math.log(scale / measure.x_min)

    def integrand(t, s):
        # beyond e^700 the density factor has long underflowed; clamp to keep exp finite
        s, t = min(s, _LOG_CLAMP), min(t, _LOG_CLAMP)
        j = float(pair_integral(measure, scale, math.exp(s), math.exp(t)))
        if j <= 0.0:
            return 0.0
        return math.exp(min(s + t - log_s, 0.0) + math.log(j) - a * (s + t) + log_wa2)

    errs = []

    def outer(s):
        val, err = _quad(lambda t: integrand(t, s), s, math.inf, [log_s - s, kink], epsrel)
        errs.append(err)
        return val

    val, err = _quad(outer, s_lo, math.inf, [log_s / 2, kink, log_s - kink], epsrel)
    return 2.0 * val, 2.0 * (err + max(errs, default=0.0))


def _limit_triple_expectation(alpha, scale, epsrel=1e-10):
    """``∫∫∫ f dΛ³`` for the scaling-limit measure ``Λ(du) = α u^{-α-1} du``.

    ``Λ`` is homogeneous, so with ``u = e^s``, ``v = e^{s+q}`` the ``s`` integral
    is elementary and a one-dimensional integral over the log ratio ``q`` is left:
    ``∫_0^∞ J₁(e^{-q/2}, e^{q/2}) dq`` with ``J₁`` the pair integral at unit scale.
    """
    lim = _LimitMeasure(alpha)

    def f(q):
        q = min(q, 2 * _LOG_CLAMP)
        with np.errstate(over="ignore", invalid="ignore"):
            return float(pair_integral(lim, 1.0, math.exp(-q / 2), math.exp(q / 2)))

    q_max = 2 * _LOG_CLAMP
    val, err = _quad(f, 0.0, q_max, [], epsrel)
    # the integrand decays like e^{-(2-α)q/2}; charge the cut-off tail to the error
    err += f(q_max) * 2.0 / (2.0 - alpha)
    pref = 2.0 * alpha**2 * scale ** (-1.5 * alpha) * 2.0 / (alpha * (2.0 - alpha))
    return pref * val, pref * err


def triangle_constant(alpha, x_min=1.0, rtol=1e-6):
    """The constant ``H`` in ``m_n ~ H n³ F̄(√n)³``, by quadrature."""
    mu = PowerLawDist(alpha, x_min).mean()
    val, err = _limit_triple_expectation(alpha, mu)
    H = val / 6.0
    if err / 6.0 > rtol * H:
        raise QuadratureError("triangle_constant", H, err / 6.0, rtol * H)
    return H


def triangle_constant_closed_form(alpha, x_min=1.0):
    """``H`` in closed form.

    In log coordinates the substitution ``(x+y, y+z, x+z)`` factorizes the
    integral into a cube of one-dimensional integrals, each equal to
    ``4 / (α (2-α))``.  Used as an independent check of the quadrature.
    """
    mu = alpha * x_min / (alpha - 1.0)
    return 16.0 / 3.0 * mu ** (-1.5 * alpha) / (2.0 - alpha) ** 3


@dataclass(frozen=True)
class RegimeExponents:
    alpha: float
    regime: str
    params: dict
    exponent: float  # polynomial tail index, or the semi-exponential log-limit constant
    beta: float = float("nan")
    hub_scale_exponent: float = float("nan")
    rate: float = float("nan")  # log-limit constant per unit sqrt(2a); equals exponent for polynomial regimes


def single_hub_index(alpha):
    """``β = α / (4(α-1))``: regular-variation index of ``c_a(n)``."""
    return alpha / (4.0 * (alpha - 1.0))


def regime_exponent(alpha, regime, allow_boundary=False, **params):
    """Tail exponents for the four deviation regimes.

    ``single-hub``: ``1 - αβ``; ``theta`` (needs ``theta``): ``1 - αβ - αθ/(2(α-1))``;
    ``many-hub`` (needs ``a``): ``-√(2a) α/4``; ``gamma`` (needs ``gamma``, ``a``):
    ``√(2a)((3-γ)/2 - α)``.  Open parameter ranges are enforced unless
    ``allow_boundary`` is set, in which case the closed ranges are accepted.
    """
    beta = single_hub_index(alpha)

    def need(ok, msg):
        if not ok:
            raise ValueError(f"{regime} regime requires {msg}")

    def inside(x, lo, hi):
        return lo <= x <= hi if allow_boundary else lo < x < hi

    need(1 < alpha < 2, "α ∈ (1,2)")
    if regime == "single-hub":
        need(alpha >= 4 / 3 if allow_boundary else alpha > 4 / 3, "α > 4/3")
        e = 1 - alpha * beta
        return RegimeExponents(alpha, regime, params, e, beta, beta, e)
    if regime == "theta":
        theta = params["theta"]
        top = 1.5 * alpha - 2
        need(alpha > 4 / 3 and inside(theta, 0.0, top), f"α > 4/3 and θ ∈ (0, 3α/2 − 2) = (0, {top:.6g})")
        e = 1 - alpha * beta - alpha * theta / (2 * (alpha - 1))
        return RegimeExponents(alpha, regime, params, e, beta, (alpha + 2 * theta) / (4 * (alpha - 1)), e)
    if regime == "many-hub":
        a = params["a"]
        need(alpha < 4 / 3 and a > 0, "α ∈ (1, 4/3) and a > 0")
        return RegimeExponents(alpha, regime, params, -math.sqrt(2 * a) * alpha / 4, beta,
                               1 - 0.75 * alpha, -alpha / 4)
    if regime == "gamma":
        gamma, a = params["gamma"], params["a"]
        lo = max(1.0, 3 - 1.5 * alpha)
        need(a > 0 and inside(gamma, lo, 3.0), f"γ ∈ (max(1, 3 − 3α/2), 3) = ({lo:.6g}, 3) and a > 0")
        rate = (3 - gamma) / 2 - alpha
        return RegimeExponents(alpha, regime, params, math.sqrt(2 * a) * rate, beta, (gamma - 1) / 2, rate)
    raise ValueError(f"unknown regime {regime!r}; expected single-hub, many-hub, theta or gamma")


@dataclass
class TheoryContext:
    """Cached constants for one weight law; all methods are deterministic."""

    dist: PowerLawDist
    rtol: float = 1e-6
    H: float = field(init=False)
    _mn: dict = field(default_factory=dict, init=False, repr=False)
    _ca: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.H = triangle_constant(self.dist.alpha, self.dist.x_min, self.rtol)

    @classmethod
    def create(cls, alpha, x_min=1.0, rtol=1e-6):
        return cls(PowerLawDist(alpha, x_min), rtol)

    @property
    def mu(self):
        return self.dist.mean()

    @property
    def C3H(self):
        return self.dist.C ** 3 * self.H

    # -- mean triangle count -------------------------------------------------
    def mean_triangles(self, n):
        """``(exact, asymptotic)`` expected triangle count for ``n`` vertices."""
        if n < 3:
            raise ValueError(f"n must be >= 3, got {n}")
        if n not in self._mn:
            val, err = triple_expectation(self.dist, self.dist.mean() * n)
            if err > self.rtol * val:
                raise QuadratureError(f"mean_triangles(n={n})", val, err, self.rtol * val)
            self._mn[n] = math.comb(n, 3) * val
        asym = self.H * n**3 * float(self.dist.tail(math.sqrt(n))) ** 3
        return self._mn[n], asym

    # -- hub integrals -------------------------------------------------------
    def double_hub_integral(self, n, b, c):
        """``S_{b,c}(n) = ∫ f_n(x, b, c) dF(x)`` in closed form."""
        if b < 0 or c < 0:
            raise ValueError("hub weights must be nonnegative")
        scale = self.mu * n
        return min(b * c / scale, 1.0) * float(pair_integral(self.dist, scale, b, c))

    def single_hub_integral(self, n, b):
        """``S_b(n) = ∫∫_{x<y} f_n(x, y, b) dF(y) dF(x)``."""
        if b < 0:
            raise ValueError("hub weight must be nonnegative")
        if b == 0:
            return 0.0
        d = self.dist
        scale = self.mu * n
        a = d.alpha
        lbs = math.log(b / scale)

        def f(s):
            s = min(s, _LOG_CLAMP)
            x = math.exp(s)
            return (math.exp(min(s + lbs, 0.0)) * float(pair_integral(d, scale, x, b))
                    * a * d.C * math.exp(-a * s))

        pts = [math.log(scale / b), math.log(b), math.log(scale / d.x_min)]
        val, err = _quad(f, math.log(d.x_min), math.inf, pts, SQRT_EPS_REL)
        if err > self.rtol * val:
            raise QuadratureError("single_hub_integral", val, err, self.rtol * val)
        return 0.5 * val

    def hub_gain(self, n, c):
        """Expected extra triangles from one hub of weight ``c``: ``n² S_c(n)``."""
        return n * n * self.single_hub_integral(n, c)

    def hub_threshold(self, n, a, rel_width=1e-9):
        """``c_a(n)``: smallest hub weight adding ``a m_n`` expected triangles (bisection)."""
        if not a > 0:
            raise ValueError(f"a must be positive, got {a}")
        key = (n, a, rel_width)
        if key in self._ca:
            return self._ca[key]
        target = a * self.mean_triangles(n)[0]
        lo, hi = self.dist.x_min, self.mu * n * n
        if self.hub_gain(n, hi) < target:
            raise InfeasibleError(f"infeasible at this n: even a saturated hub adds fewer than "
                                  f"a·m_n = {target:.6g} triangles (n={n}, a={a})")
        if self.hub_gain(n, lo) >= target:
            self._ca[key] = lo
            return lo
        # the gain is continuous and nondecreasing in c; bisect in log space
        while hi / lo - 1.0 > rel_width:
            mid = math.sqrt(lo * hi)
            if self.hub_gain(n, mid) >= target:
                hi = mid
            else:
                lo = mid
        self._ca[key] = hi
        return hi

    # -- boundary regime -----------------------------------------------------
    def hub_count(self, a):
        """``k(a) = inf{l: l μ + l(l-1)/2 > a C³H}``, as written in the theorem."""
        return self._first_l(lambda l: l * self.mu + l * (l - 1) / 2, a)

    def hub_count_limit(self, a):
        """Variant using the ``z → ∞`` limit of ``K_l``: ``l μ/2 + l(l-1)/2``."""
        return self._first_l(lambda l: l * self.mu / 2 + l * (l - 1) / 2, a)

    def _first_l(self, payoff, a):
        if not a > 0:
            raise ValueError(f"a must be positive, got {a}")
        target = a * self.C3H
        # exact ties (e.g. a = 9/H at α=4/3) must not be decided by roundoff in H
        tie = target * (1 + 1e-12)
        l = 1
        while not payoff(l) > tie:
            l += 1
        return l

    def single_hub_payoff(self, z):
        """``K_1(z) = (E[W min(zW/μ, 1)])² / (2μ)``."""
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            m = np.where(z > 0, _linear_moment(self.dist, self.mu, np.where(z > 0, z, 1.0)), 0.0)
        out = m * m / (2 * self.mu)
        return out[()] if out.ndim == 0 else out

    def hub_pair_payoff(self, zi, zj):
        """``E[min(z_i W/μ, 1) min(z_j W/μ, 1)]``."""
        return pair_integral(self.dist, self.mu, zi, zj)

    def hub_payoff(self, z):
        """``K_l(z_1..z_l)``: limiting extra triangles per vertex from hubs of size ``n z_i``."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(z <= 0):
            raise ValueError("hub sizes must be positive")
        total = float(np.sum(self.single_hub_payoff(z)))
        for i in range(z.size):
            for j in range(i + 1, z.size):
                total += float(self.hub_pair_payoff(z[i], z[j]))
        return total

    def hub_payoff_batch(self, z):
        """``K_l`` for each row of an ``(R, l)`` array."""
        z = np.asarray(z, dtype=float)
        total = np.sum(self.single_hub_payoff(z), axis=1)
        for i in range(z.shape[1]):
            for j in range(i + 1, z.shape[1]):
                total = total + self.hub_pair_payoff(z[:, i], z[:, j])
        return total

    def limit_payoff(self, eta, k):
        """``K_k(η, ∞, ..., ∞)``: one hub of size ``η n`` plus ``k-1`` infinite hubs."""
        eta = float(eta)
        tail_pair = 0.0
        if eta > 0:
            t = self.mu / eta
            tail_pair = (eta / self.mu) * float(self.dist.trunc_first_moment(t)) + float(self.dist.tail(t))
        return ((k - 1) * self.mu / 2 + (k - 1) * (k - 2) / 2
                + float(self.single_hub_payoff(eta)) + (k - 1) * tail_pair)

    def standing_condition(self, a):
        """``(k-1)μ + (k-1)(k-2)/2 < a C³H`` with ``k = k(a)``."""
        k = self.hub_count(a)
        return (k - 1) * self.mu + (k - 1) * (k - 2) / 2 < a * self.C3H

    def eta_threshold(self, a, abs_width=1e-9):
        """``η(a)``: smallest ``η`` with ``K_k(η, ∞, ..., ∞) ≥ a C³H``, ``k = k(a)``."""
        k = self.hub_count(a)
        lhs = (k - 1) * self.mu + (k - 1) * (k - 2) / 2
        target = a * self.C3H
        if not lhs < target:
            raise ValueError(f"standing condition (k(a)-1)μ + (k(a)-1)(k(a)-2)/2 < a·C³H fails: "
                             f"{lhs:.6g} >= {target:.6g} (k(a)={k})")
        if self.limit_payoff(0.0, k) >= target:
            return 0.0
        sup = k * self.mu / 2 + k * (k - 1) / 2
        if sup < target:
            raise InfeasibleError(f"bisection bracket failure: sup_η K_k(η,∞,…) = {sup:.6g} < a·C³H = "
                                  f"{target:.6g}; no finite η reaches the target (k(a)={k})")
        lo, hi = 0.0, 1.0
        while self.limit_payoff(hi, k) < target:
            lo, hi = hi, 2 * hi
            if hi > 1e300:
                raise InfeasibleError("bisection bracket failure: payoff never reaches the target")
        while hi - lo > abs_width:
            mid = 0.5 * (lo + hi)
            if self.limit_payoff(mid, k) >= target:
                hi = mid
            else:
                lo = mid
        return hi

    def eta_threshold_literal(self, a, abs_width=1e-9):
        """Smallest ``η`` with ``(k-1)μ + K_1(η) ≥ C³H(1+a)``, the abbreviated condition.

        Returns ``nan`` when the abbreviated payoff never reaches its threshold.
        """
        k = self.hub_count(a)
        target = self.C3H * (1 + a)
        g = lambda e: (k - 1) * self.mu + float(self.single_hub_payoff(e))
        if g(0.0) >= target:
            return 0.0
        if (k - 1) * self.mu + self.mu / 2 <= target:
            return float("nan")
        lo, hi = 0.0, 1.0
        while g(hi) < target:
            lo, hi = hi, 2 * hi
        while hi - lo > abs_width:
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if g(mid) >= target else (mid, hi)
        return hi


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])
