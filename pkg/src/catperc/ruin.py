"""Gambler's ruin for integer walks with bounded jumps.

For a walk with step law ``p(k)`` supported on ``[-nu, mu]`` and negative
drift, ``phi(x, J)`` is the chance of reaching ``>= J`` before ``<= 0`` from
``x``. The characteristic root ``alpha > 1`` solves ``sum_k p(k) alpha**k = 1``,
so ``alpha**X_t`` is a martingale. Optional stopping, with the overshoot
confined to ``[J, J+mu-1]`` above and ``[1-nu, 0]`` below, gives

    (a**x - 1) / (a**(J+mu-1) - 1)  <=  phi(x, J)  <=  (a**(x+nu-1) - 1) / (a**(J+nu-1) - 1)

which collapses to the classical formula when ``nu = mu = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

SUM_TOL = 1e-12
ROOT_TOL = 1e-12

# 2p^6 - 6p^5 + 4p^4 + 5p^3 - 9p^2 + p + 1, constant term first
DRIFT_COEFFS = (1, 1, -9, 5, 4, -6, 2)


@dataclass(frozen=True)
class JumpDistribution:
    """Step law on ``[-nu, mu]``; ``mass[i]`` is the probability of step ``i - nu``."""

    nu: int
    mu: int
    mass: tuple[float, ...]

    def __post_init__(self):
        if self.nu <= 0 or self.mu <= 0:
            raise ValueError(f"need nu, mu > 0, got nu={self.nu}, mu={self.mu}")
        if len(self.mass) != self.nu + self.mu + 1:
            raise ValueError("mass length must be nu + mu + 1")
        if any(m < 0 for m in self.mass):
            raise ValueError("masses must be non-negative")
        total = math.fsum(self.mass)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")
        if self.mass[0] <= 0 or self.mass[-1] <= 0:
            raise ValueError("p(-nu) and p(mu) must be positive")

    @classmethod
    def from_dict(cls, law: Mapping[int, float]) -> "JumpDistribution":
        support = [k for k, m in law.items() if m > 0]
        if not support:
            raise ValueError("empty distribution")
        lo, hi = min(support), max(support)
        if lo >= 0 or hi <= 0:
            raise ValueError(f"support [{lo}, {hi}] must straddle 0")
        mass = tuple(float(law.get(k, 0.0)) for k in range(lo, hi + 1))
        return cls(-lo, hi, mass)

    @classmethod
    def parse(cls, text: str) -> "JumpDistribution":
        """Parse ``"k:mass,k:mass,..."`` (e.g. ``"-1:0.6,1:0.4"``)."""
        law: dict[int, float] = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            k, _, m = item.partition(":")
            law[int(k)] = law.get(int(k), 0.0) + float(m)
        return cls.from_dict(law)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(-self.nu, self.mu + 1)

    def as_dict(self) -> dict[int, float]:
        return {int(k): m for k, m in zip(self.steps, self.mass) if m > 0}

    def pmf(self, k: int) -> float:
        return self.mass[k + self.nu] if -self.nu <= k <= self.mu else 0.0


def drift(d: JumpDistribution) -> float:
    return math.fsum(k * m for k, m in zip(range(-d.nu, d.mu + 1), d.mass))


def _generating(d: JumpDistribution, alpha: float) -> float:
    return math.fsum(m * alpha**k for k, m in zip(range(-d.nu, d.mu + 1), d.mass))


def _divided(d: JumpDistribution, alpha: float) -> float:
    # (f(alpha) - 1) / (alpha - 1) expanded termwise; equals the drift at alpha = 1
    total = []
    for k, m in zip(range(-d.nu, d.mu + 1), d.mass):
        if k > 0:
            total.append(m * math.fsum(alpha**i for i in range(k)))
        elif k < 0:
            total.append(-m * math.fsum(alpha ** (-i) for i in range(1, -k + 1)))
    return math.fsum(total)


def char_root(d: JumpDistribution) -> float:
    """The root ``alpha > 1`` of ``sum_k p(k) alpha**k = 1`` (needs negative drift)."""
    if drift(d) >= 0:
        raise ValueError("characteristic root > 1 requires negative drift")
    hi = 2.0
    while _divided(d, hi) <= 0:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("failed to bracket characteristic root")
    alpha = brentq(lambda a: _divided(d, a), 1.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    # Newton polish on f(alpha) - 1
    for _ in range(3):
        f = _generating(d, alpha) - 1.0
        df = math.fsum(k * m * alpha ** (k - 1) for k, m in zip(range(-d.nu, d.mu + 1), d.mass))
        if df == 0:
            break
        step = f / df
        if not math.isfinite(step) or alpha - step <= 1.0:
            break
        alpha -= step
    return alpha


def char_residual(d: JumpDistribution, alpha: float) -> float:
    return abs(_generating(d, alpha) - 1.0)


def _power_ratio(x: int, big: int, log_a: float) -> float:
    """``(a**x - 1) / (a**big - 1)`` for ``a = exp(log_a) > 1`` without overflow."""
    if big * log_a < 700:
        return math.expm1(x * log_a) / math.expm1(big * log_a)
    return math.exp((x - big) * log_a) * (-math.expm1(-x * log_a)) / (-math.expm1(-big * log_a))


def _check_range(x: int, J: int) -> None:
    if not 0 < x < J:
        raise ValueError(f"need 0 < x < J, got x={x}, J={J}")


def feller_bounds(d: JumpDistribution, x: int, J: int) -> tuple[float, float]:
    _check_range(x, J)
    log_a = math.log(char_root(d))
    lower = _power_ratio(x, J + d.mu - 1, log_a)
    upper = _power_ratio(x + d.nu - 1, J + d.nu - 1, log_a)
    return lower, upper


def classical_ruin(p: float, x: int, J: int) -> float:
    """Jackpot probability for steps -1 w.p. ``p`` and +1 w.p. ``1-p``, ``p > 1/2``."""
    if not 0.5 < p < 1.0:
        raise ValueError(f"classical formula needs 1/2 < p < 1, got {p}")
    _check_range(x, J)
    return _power_ratio(x, J, math.log(p / (1.0 - p)))


def exact_absorption(d: JumpDistribution, x: int, J: int) -> float:
    """Solve ``phi(s) = sum_k p(k) phi(s+k)`` on ``0 < s < J`` with the walk's boundary values."""
    _check_range(x, J)
    size = J - 1
    nu, mu = d.nu, d.mu
    # banded storage: ab[mu + i - j, j] = A[i, j]
    ab = np.zeros((nu + mu + 1, size))
    rhs = np.zeros(size)
    for row in range(size):
        s = row + 1
        ab[mu, row] += 1.0
        for k, m in zip(range(-nu, mu + 1), d.mass):
            t = s + k
            if t >= J:
                rhs[row] += m
            elif t >= 1:
                col = t - 1
                ab[mu + row - col, col] -= m
    phi = solve_banded((nu, mu), ab, rhs)
    assert np.all(np.isfinite(phi)), "singular absorption system"
    return float(min(1.0, max(0.0, phi[x - 1])))


def simulate_absorption(
    d: JumpDistribution, x: int, J: int, paths: int, rng: np.random.Generator
) -> float:
    """Monte Carlo estimate of the jackpot probability (vectorized over paths)."""
    _check_range(x, J)
    steps = d.steps
    probs = np.asarray(d.mass)
    pos = np.full(paths, x, dtype=np.int64)
    alive = np.ones(paths, dtype=bool)
    won = np.zeros(paths, dtype=bool)
    while alive.any():
        idx = np.nonzero(alive)[0]
        pos[idx] += rng.choice(steps, size=idx.size, p=probs)
        hit_top = pos[idx] >= J
        hit_bottom = pos[idx] <= 0
        won[idx[hit_top]] = True
        alive[idx[hit_top | hit_bottom]] = False
    return float(won.mean())


def drift_polynomial_eval(p: float) -> float:
    acc = 0.0
    for c in reversed(DRIFT_COEFFS):
        acc = acc * p + c
    return acc


def p_star(tol: float = 1e-12) -> float:
    """Root of the better-clipping drift polynomial in (0.4, 0.6), by bisection."""
    lo, hi = 0.4, 0.6
    f_lo = drift_polynomial_eval(lo)
    if f_lo * drift_polynomial_eval(hi) > 0:
        raise ArithmeticError("drift polynomial does not change sign on (0.4, 0.6)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = drift_polynomial_eval(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
