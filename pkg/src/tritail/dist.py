"""Pure Pareto weight law with closed-form truncated moments."""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import rng as _rng

# When True, every closed-form moment is re-derived by quadrature and compared.
DEBUG = False


@dataclass(frozen=True)
class PowerLawDist:
    """Weights with ``P(W > x) = C x**-alpha`` on ``[x_min, inf)``, ``C = x_min**alpha``."""

    alpha: float
    x_min: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must satisfy α ∈ (1,2), got {self.alpha}")
        if not self.x_min > 0:
            raise ValueError(f"x_min must be positive, got {self.x_min}")

    @property
    def C(self):
        return self.x_min ** self.alpha

    @property
    def mu(self):
        return self.mean()

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < self.x_min, 1.0, (np.maximum(x, self.x_min) / self.x_min) ** -self.alpha)
        return out[()] if out.ndim == 0 else out

    def quantile(self, u):
        """Inverse of :meth:`tail`: the weight ``x`` with ``tail(x) == u``."""
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0) or np.any(u > 1):
            raise ValueError("quantile needs u ∈ (0,1]; u = 0 is an infinite weight")
        out = self.x_min * u ** (-1.0 / self.alpha)
        return out[()] if out.ndim == 0 else out

    def inverse_tail(self, p):
        """``F̄⁻¹(p)``; same map as :meth:`quantile`, named for the tail-level reading."""
        return self.quantile(p)

    def sample(self, n, seed, *labels):
        """``n`` i.i.d. weights from the stream ``(seed, WEIGHTS, *labels)``."""
        if n < 1:
            raise ValueError(f"sample size must be >= 1, got {n}")
        g = _rng.stream(seed, _rng.WEIGHTS, *labels)
        return WeightVector(self.quantile(_rng.uniforms_open(g, n)), self.x_min)

    def sample_above(self, s, size, rng):
        """Draws from ``W | W > s`` by inverse transform on the conditional tail."""
        u = _rng.uniforms_open(rng, size)
        return self.quantile(u * self.tail(s))

    def mean(self):
        return self.alpha * self.x_min / (self.alpha - 1.0)

    def trunc_second_moment(self, t):
        """``E[W² 1{W ≤ t}]``."""
        a, xm = self.alpha, self.x_min
        t = np.asarray(t, dtype=float)
        tt = np.maximum(t, xm)
        out = np.where(t < xm, 0.0, a * (tt ** (2 - a) - xm ** (2 - a)) * self.C / (2 - a))
        if DEBUG:
            _check(out, t, lambda x: x * x * self.density(x), xm, upper=True)
        return out[()] if out.ndim == 0 else out

    def trunc_first_moment(self, t):
        """``E[W 1{W ≤ t}]``."""
        return self.mean() - self.tail_first_moment(t)

    def tail_first_moment(self, t):
        """``E[W 1{W > t}]``."""
        a, xm = self.alpha, self.x_min
        t = np.asarray(t, dtype=float)
        tt = np.maximum(t, xm)
        out = np.where(t < xm, self.mean(), a * tt ** (1 - a) * self.C / (a - 1))
        if DEBUG:
            _check(out, t, lambda x: x * self.density(x), xm, upper=False)
        return out[()] if out.ndim == 0 else out

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < self.x_min, 0.0, self.alpha * self.C * np.maximum(x, self.x_min) ** (-self.alpha - 1))


def _check(values, t, integrand, xm, upper):
    for v, ti in zip(np.ravel(values), np.ravel(t)):
        if upper:
            ref = integrate.quad(integrand, xm, ti, epsrel=1e-10)[0] if ti > xm else 0.0
        else:
            lo = max(ti, xm)
            ref = integrate.quad(lambda y: integrand(np.exp(y)) * np.exp(y), np.log(lo), np.log(lo) + 700,
                                 epsrel=1e-10, limit=200)[0]
        if not np.isclose(v, ref, rtol=1e-7, atol=1e-12):
            raise AssertionError(f"closed-form moment {v} disagrees with quadrature {ref} at t={ti}")


@dataclass
class WeightVector:
    """An i.i.d. weight sample and its empirical tail."""

    weights: np.ndarray
    x_min: float = 1.0
    _sorted: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)

    @property
    def n(self):
        return self.weights.size

    def __len__(self):
        return self.weights.size

    @property
    def sorted(self):
        if self._sorted is None:
            self._sorted = np.sort(self.weights)
        return self._sorted

    def empirical_tail(self, x):
        """``F̄_n(x) = #{i: W_i > x} / n`` (right-continuous)."""
        s = self.sorted
        return (s.size - np.searchsorted(s, x, side="right")) / s.size

    def empirical_tail_left(self, x):
        """Left limit ``F̄_n(x-) = #{i: W_i ≥ x} / n``."""
        s = self.sorted
        return (s.size - np.searchsorted(s, x, side="left")) / s.size

    def count_above(self, x):
        return int(self.n - np.searchsorted(self.sorted, x, side="right"))

    def copy(self):
        return WeightVector(self.weights.copy(), self.x_min)
