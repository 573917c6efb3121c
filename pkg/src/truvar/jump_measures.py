"""Parametric jump measures: densities, truncated moments, samplers and the
exponential-moment threshold.

Supported families: no jumps, a finite table of (size, rate) atoms,
two-sided tempered-stable, and Meixner.  All integrals against the measure
are adaptive quadrature (worked in log space where products of exponentials
would overflow); samplers draw only jumps of magnitude above a truncation
threshold `eps`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate


class JumpMeasureError(ValueError):
    """Invalid jump-measure parameters or failed quadrature."""


@dataclass(frozen=True)
class NoJumps:
    pass


@dataclass(frozen=True)
class DiscreteJumps:
    """Finite atomic measure: rate `rates[i]` of jumps of size `sizes[i]`."""

    sizes: tuple
    rates: tuple

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(float(s) for s in self.sizes))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.sizes) != len(self.rates):
            raise JumpMeasureError("sizes and rates must have equal length")
        if any(r < 0 for r in self.rates):
            raise JumpMeasureError("rates must be >= 0")
        if any(s == 0 for s in self.sizes):
            raise JumpMeasureError("jump sizes must be nonzero")


@dataclass(frozen=True)
class TemperedStable:
    """Density c_p x^(-1-alpha_p) e^(-lam_p x) on x>0 and the mirrored
    negative side with (alpha_n, lam_n, c_n)."""

    alpha_p: float
    alpha_n: float
    lam_p: float
    lam_n: float
    c_p: float
    c_n: float

    def __post_init__(self):
        if not (self.alpha_p < 2 and self.alpha_n < 2):
            raise JumpMeasureError("tempered-stable requires alpha_p, alpha_n < 2")
        if min(self.lam_p, self.lam_n, self.c_p, self.c_n) <= 0:
            raise JumpMeasureError("tempered-stable requires lam_p, lam_n, c_p, c_n > 0")


@dataclass(frozen=True)
class Meixner:
    """Density delta * exp(beta x / eta) / (x sinh(pi x / eta))."""

    delta: float
    eta: float
    beta: float

    def __post_init__(self):
        if self.delta <= 0 or self.eta <= 0:
            raise JumpMeasureError("meixner requires delta, eta > 0")
        if abs(self.beta) >= math.pi:
            raise JumpMeasureError("meixner requires |beta| < pi")


JumpMeasure = NoJumps | DiscreteJumps | TemperedStable | Meixner


def _quad(fn, a, b, *, name: str) -> float:
    val, err = integrate.quad(fn, a, b, limit=200)
    if not np.isfinite(val) or err > 1e-6 * max(abs(val), 1.0):
        raise JumpMeasureError(f"quadrature for {name} on [{a}, {b}] failed to converge")
    return val


def _ts_side_logdensity(alpha: float, lam: float, c: float):
    logc = math.log(c)
    return lambda x: logc - (1.0 + alpha) * math.log(x) - lam * x


def _meixner_side_logdensity(nu: Meixner, sign: float):
    # log density at sign*x for x > 0; 1/sinh(z) = 2 e^(-z) / (1 - e^(-2z))
    ld, eta, beta = math.log(nu.delta), nu.eta, nu.beta

    def logdens(x: float) -> float:
        z = math.pi * x / eta
        return (
            ld + beta * sign * x / eta - math.log(x)
            + math.log(2.0) - z - math.log1p(-math.exp(-2.0 * z))
        )

    return logdens


def _sides(nu) -> list:
    """(sign, log-density on the positive axis) for each side."""
    if isinstance(nu, TemperedStable):
        return [
            (1.0, _ts_side_logdensity(nu.alpha_p, nu.lam_p, nu.c_p)),
            (-1.0, _ts_side_logdensity(nu.alpha_n, nu.lam_n, nu.c_n)),
        ]
    if isinstance(nu, Meixner):
        return [
            (1.0, _meixner_side_logdensity(nu, 1.0)),
            (-1.0, _meixner_side_logdensity(nu, -1.0)),
        ]
    raise JumpMeasureError(f"not a continuous jump family: {type(nu).__name__}")


def _exp_or_zero(v: float) -> float:
    return math.exp(v) if v > -745.0 else 0.0


def rate_above(nu: JumpMeasure, eps: float) -> float:
    """nu({|x| > eps})."""
    if isinstance(nu, NoJumps):
        return 0.0
    if isinstance(nu, DiscreteJumps):
        return sum(r for s, r in zip(nu.sizes, nu.rates) if abs(s) > eps)
    return sum(
        _quad(lambda x: _exp_or_zero(ld(x)), eps, np.inf, name="jump rate")
        for _, ld in _sides(nu)
    )


def mean_above(nu: JumpMeasure, eps: float) -> float:
    """Integral of x over {|x| > eps}."""
    if isinstance(nu, NoJumps):
        return 0.0
    if isinstance(nu, DiscreteJumps):
        return sum(s * r for s, r in zip(nu.sizes, nu.rates) if abs(s) > eps)
    total = 0.0
    for sign, ld in _sides(nu):
        total += sign * _quad(lambda x: x * _exp_or_zero(ld(x)), eps, np.inf, name="jump mean")
    return total


def var_below(nu: JumpMeasure, eps: float) -> float:
    """Integral of x^2 over {|x| <= eps} (variance of truncated small jumps)."""
    if isinstance(nu, NoJumps):
        return 0.0
    if isinstance(nu, DiscreteJumps):
        return sum(s * s * r for s, r in zip(nu.sizes, nu.rates) if abs(s) <= eps)
    return sum(
        _quad(lambda x: x * x * _exp_or_zero(ld(x)), 0.0, eps, name="small-jump variance")
        for _, ld in _sides(nu)
    )


def compensation(nu: JumpMeasure, eps: float) -> float:
    """Integral of x over {eps < |x| < 1}: the drift owed for simulating
    jumps in that band uncompensated.

    The band is open at 1 so that size-1 atoms ride uncompensated; for the
    continuous families the boundary carries no mass either way.
    """
    if isinstance(nu, NoJumps):
        return 0.0
    if eps >= 1.0:
        return 0.0
    if isinstance(nu, DiscreteJumps):
        return sum(s * r for s, r in zip(nu.sizes, nu.rates) if eps < abs(s) < 1.0)
    total = 0.0
    for sign, ld in _sides(nu):
        total += sign * _quad(lambda x: x * _exp_or_zero(ld(x)), eps, 1.0, name="compensation")
    return total


# --- sampling -------------------------------------------------------------

def _sample_ts_side(alpha: float, lam: float, eps: float, k: int, rng) -> np.ndarray:
    """k draws from the normalized density x^(-1-alpha) e^(-lam x) on [eps, inf)."""
    out = np.empty(k)
    have = 0
    while have < k:
        m = max(2 * (k - have), 64)
        if alpha > 0:
            # Pareto proposal, thinned by the exponential factor
            x = eps * rng.random(m) ** (-1.0 / alpha)
            keep = rng.random(m) < np.exp(-lam * (x - eps))
        elif alpha > -1e-12:
            # alpha == 0: shifted-exponential proposal, thinned by (x/eps)^-1
            x = eps + rng.exponential(1.0 / lam, size=m)
            keep = rng.random(m) < eps / x
        else:
            # alpha < 0: gamma proposal restricted to [eps, inf)
            x = rng.gamma(-alpha, 1.0 / lam, size=m)
            keep = x >= eps
        acc = x[keep]
        take = min(acc.size, k - have)
        out[have : have + take] = acc[:take]
        have += take
    return out


@lru_cache(maxsize=64)
def _meixner_side_table(nu: Meixner, sign: float, eps: float):
    """Inverse-CDF table for the Meixner density on [eps, x_max], built by
    cumulative quadrature on a log-spaced grid."""
    decay = (math.pi - sign * nu.beta) / nu.eta
    x_max = eps + 80.0 / decay + 5.0 * nu.eta
    grid = eps * np.exp(np.linspace(0.0, math.log(x_max / eps), 6000))
    logdens = _meixner_side_logdensity(nu, sign)
    dens = np.array([_exp_or_zero(logdens(x)) for x in grid])
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    return grid, cdf


def _sample_meixner_side(nu: Meixner, sign: float, eps: float, k: int, rng) -> np.ndarray:
    grid, cdf = _meixner_side_table(nu, sign, eps)
    u = rng.random(k) * cdf[-1]
    return np.interp(u, cdf, grid)


def sample_jumps(nu: JumpMeasure, eps: float, k: int, rng) -> np.ndarray:
    """k signed jump sizes from nu restricted to {|x| > eps}, normalized."""
    if k == 0:
        return np.empty(0)
    if isinstance(nu, NoJumps):
        raise JumpMeasureError("cannot sample jumps from an empty measure")
    if isinstance(nu, DiscreteJumps):
        sizes = [s for s in nu.sizes if abs(s) > eps]
        rates = np.array([r for s, r in zip(nu.sizes, nu.rates) if abs(s) > eps])
        if not sizes or rates.sum() <= 0:
            raise JumpMeasureError(f"no atoms above eps={eps}")
        idx = rng.choice(len(sizes), size=k, p=rates / rates.sum())
        return np.asarray(sizes)[idx]

    sides = _sides(nu)
    rate_pos = _quad(lambda x: _exp_or_zero(sides[0][1](x)), eps, np.inf, name="jump rate")
    rate_neg = _quad(lambda x: _exp_or_zero(sides[1][1](x)), eps, np.inf, name="jump rate")
    pick_pos = rng.random(k) < rate_pos / (rate_pos + rate_neg)
    k_pos = int(pick_pos.sum())
    out = np.empty(k)
    if isinstance(nu, TemperedStable):
        if k_pos:
            out[pick_pos] = _sample_ts_side(nu.alpha_p, nu.lam_p, eps, k_pos, rng)
        if k - k_pos:
            out[~pick_pos] = -_sample_ts_side(nu.alpha_n, nu.lam_n, eps, k - k_pos, rng)
    else:
        if k_pos:
            out[pick_pos] = _sample_meixner_side(nu, 1.0, eps, k_pos, rng)
        if k - k_pos:
            out[~pick_pos] = -_sample_meixner_side(nu, -1.0, eps, k - k_pos, rng)
    return out


# --- exponential moments ---------------------------------------------------

def exp_moment_threshold(nu: JumpMeasure) -> float:
    """Supremum of alpha such that the exponential moment integral over
    {|x| > 1} is finite.  Infinite for measures with bounded support."""
    if isinstance(nu, (NoJumps, DiscreteJumps)):
        return math.inf
    if isinstance(nu, TemperedStable):
        return min(nu.lam_p, nu.lam_n)
    return (math.pi - abs(nu.beta)) / nu.eta


def exp_moment_integral(nu: JumpMeasure, alpha: float) -> float:
    """Integral of e^(alpha |x|) over {|x| > 1}; inf when divergent."""
    if alpha <= 0:
        raise JumpMeasureError(f"alpha must be > 0, got {alpha}")
    if isinstance(nu, NoJumps):
        return 0.0
    if isinstance(nu, DiscreteJumps):
        return sum(r * math.exp(alpha * abs(s)) for s, r in zip(nu.sizes, nu.rates) if abs(s) > 1.0)
    if alpha >= exp_moment_threshold(nu):
        return math.inf
    total = 0.0
    for _, ld in _sides(nu):
        total += _quad(lambda x: _exp_or_zero(ld(x) + alpha * x), 1.0, np.inf, name="exp moment")
    return total
