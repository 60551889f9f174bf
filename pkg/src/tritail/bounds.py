"""Concentration-rate functions and the empirical-tail event used to control ``F̄_n``.

All bound evaluators return probabilities clipped to ``[0, 1]``.
"""

import math
from dataclasses import dataclass

import numpy as np


def entropy_h(x):
    """``h(x) = x (log x - 1) + 1``; nonnegative, zero only at ``x = 1``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("entropy_h needs x > 0")
    out = x * (np.log(x) - 1.0) + 1.0
    return out[()] if out.ndim == 0 else out


def wellner_bound(n, y, lam):
    """``P(sup_{t∈[y,1]} F_n^U(t)/t ≥ λ) ≤ exp(-n y h(λ))`` for the uniform empirical cdf."""
    if lam < 1 or not 0 < y <= 1:
        raise ValueError("wellner_bound needs λ ≥ 1 and y ∈ (0,1]")
    return min(1.0, math.exp(-n * y * float(entropy_h(lam))))


def binomial_rate(b):
    """``I_B(b) = (1+b) log(1+b) - b``: Chernoff rate for sums of independent Bernoullis."""
    b = np.asarray(b, dtype=float)
    if np.any(b <= -1):
        raise ValueError("binomial_rate needs b > -1")
    out = (1 + b) * np.log1p(b) - b
    return out[()] if out.ndim == 0 else out


def binomial_bound(mean, b):
    """``P(S > (1+b) m) ≤ exp(-m I_B(b))`` for a Bernoulli sum with mean ``m``."""
    return min(1.0, math.exp(-mean * float(binomial_rate(b))))


def chatterjee_rate(zeta):
    """``J(ζ) = (1+ζ) log(ζ + 1/(1+ζ)) / 3``."""
    z = np.asarray(zeta, dtype=float)
    if np.any(z <= 0):
        raise ValueError("chatterjee_rate needs ζ > 0")
    # log(ζ + 1/(1+ζ)) = log1p(ζ²/(1+ζ)), exact and stable for small ζ
    out = (1 + z) * np.log1p(z * z / (1 + z)) / 3.0
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class EnEventSpec:
    """Parameters of the good event for the empirical tail.

    ``delta=None`` means the default ``0.1 (1 - 1/α)``, resolved per weight law.
    """

    A: float = 0.5
    c: float = 8.0
    delta: float = None

    def __post_init__(self):
        if not self.A > 0 or not self.c > 0:
            raise ValueError("A and c must be positive")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError(f"δ must lie in (0, 1 - 1/α), got {self.delta}")

    def window_exponent(self, alpha):
        d = 0.1 * (1 - 1 / alpha) if self.delta is None else self.delta
        if not 1 / alpha + d < 1:
            raise ValueError(f"δ = {d} violates 1/α + δ < 1 at α = {alpha}")
        return d

    def a_n(self, dist, n):
        """``a(n) = F̄⁻¹(1/n) n^{-δ}``."""
        return float(dist.inverse_tail(1.0 / n)) * n ** -self.window_exponent(dist.alpha)

    def b_n(self, dist, n):
        """``b(n) = F̄⁻¹(1/n) n^{δ}``."""
        return float(dist.inverse_tail(1.0 / n)) * n ** self.window_exponent(dist.alpha)


def check_event_En(wv, spec, dist):
    """True iff the sample's empirical tail stays inside all three envelopes.

    The ratio ``F̄_n/F̄`` is a step function over a continuous decreasing one, so its
    supremum below ``a(n)`` is attained as a left limit at a sample point or at ``a(n)``.
    """
    n = wv.n
    a, b = spec.a_n(dist, n), spec.b_n(dist, n)
    lim = 1 + spec.A
    s = wv.sorted
    pts = np.append(s[s < a], a)
    if np.any(wv.empirical_tail_left(pts) > lim * dist.tail(pts)):
        return False
    if wv.empirical_tail(a) > lim * float(dist.tail(a)):
        return False
    return bool(wv.empirical_tail(b) <= spec.c / n)


def composite_bound(dist, n, spec):
    """Bound on ``P(E_n^c)``: ``exp(-n F̄(a) h(1+A)) + e^{n F̄(b)} (n F̄(b))^⌈c⌉``.

    The middle envelope is implied by the first by monotonicity of ``F̄_n``, so it
    adds no separate term.
    """
    pa = float(dist.tail(spec.a_n(dist, n)))
    pb = float(dist.tail(spec.b_n(dist, n)))
    low = math.exp(-n * pa * float(entropy_h(1 + spec.A)))
    high = math.exp(n * pb) * (n * pb) ** math.ceil(spec.c)
    return min(1.0, low + high)


def hub_count_tail_bound(n, gamma, beta, d, u, alpha, C=1.0):
    """``exp(-u n^γ log(n^{γ-1+αβ}))``: at least ``u n^γ`` weights above ``d n^β``.

    ``d`` and ``C`` only enter the lower-order terms the bound absorbs; they are
    validated but do not change the value.
    """
    if not gamma > 1 - alpha * beta:
        raise ValueError(f"need γ > 1 - αβ = {1 - alpha * beta:.6g}, got γ = {gamma}")
    if not (d > 0 and u > 0 and C > 0):
        raise ValueError("d, u and C must be positive")
    return min(1.0, math.exp(-u * n**gamma * (gamma - 1 + alpha * beta) * math.log(n)))
