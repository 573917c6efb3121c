"""Explicit constants and bound evaluators for the concentration of
truncated variation.

The pipeline turns an increment-scale constant C and a pair (p, q) into a
tail bound

    P( TV^c(X, S) >= c^((q-1)/q) S (A_bar + B_bar u) ) <= D_bar exp(-u^(pq))

via net-counting constants A(r,q), B(r,q) and a two-regime chaining
decomposition (constants M0, K1 for the coarse scales; M2..M5, K2 for the
fine scales).  The free net ratio r >= 4 is grid-searched to minimize
B_bar.  On top sit evaluators for the fractional-Brownian tail bound, the
Brownian/diffusion moment-generating-function bounds, and the Levy
exponential-moment criterion.

All bound values are carried in logs as well: the constants are loose by
construction, and the plain exponentials regularly overflow a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from . import jump_measures as jm
from .orlicz import LN2, OrliczSpec, orlicz_spec, phi

R_GRID = tuple(range(4, 65))


class BoundsError(ValueError):
    """Invalid input to, or numeric failure inside, the constants pipeline."""


# --- net constants -----------------------------------------------------------

def net_constants(r: float, q: float) -> tuple:
    """Counting constants of the geometric net hierarchy with ratio r >= 4 on
    the q-Hoelder distance: A controls the weighted net sizes, B the number
    of nearest neighbors per net point."""
    if r < 4:
        raise BoundsError(f"net construction assumes r >= 4, got {r}")
    if not 0.0 < q < 1.0:
        raise BoundsError(f"net constants need 0 < q < 1, got {q}")
    a = r ** ((2.0 - q) / q) / (r ** ((1.0 - q) / q) - 1.0)
    b = 2.0 ** (1.0 / q) * r ** (1.0 / q) + 1.0
    return a, b


# --- series of the fine-scale regime -----------------------------------------

def _sum_series(term, name: str, min_terms: int = 0) -> float:
    """Sum term(0) + term(1) + ... until the geometric tail estimate drops
    below 1e-12 of the partial sum.  Terms must become geometric (ratio <
    0.9); persistent growth is reported as divergence."""
    total = 0.0
    prev = None
    growing = 0
    for k in range(10_000):
        t = term(k)
        if not t >= 0.0:
            raise BoundsError(f"series {name}: term {k} is not nonnegative ({t})")
        total += t
        if t == 0.0 and k >= min_terms:
            return total
        ratio = t / prev if (prev is not None and prev > 0) else None
        if (
            k >= min_terms
            and ratio is not None
            and ratio < 0.9
            and t * ratio / (1.0 - ratio) < 1e-12 * total
        ):
            return total
        if ratio is not None and ratio >= 1.0:
            growing += 1
            if growing > 50:
                raise BoundsError(f"series {name} shows no geometric decay (diverges?)")
        else:
            growing = 0
        prev = t
    raise BoundsError(f"series {name} did not converge within 10000 terms")


def fine_scale_series(spec: OrliczSpec, r: float, min_terms: int = 0) -> tuple:
    """The two convergent series of the fine-scale regime:
    sum_l 2^(l(1-q)/q) / phi_p((r/2)^l)  and  sum_m 1 / phi_p(r^m)."""
    p, q = spec.p, spec.q
    g = (1.0 - q) / q
    s1 = _sum_series(lambda l: 2.0 ** (l * g) / phi((r / 2.0) ** l, p), "fine-scale pair", min_terms)
    s2 = _sum_series(lambda m: 1.0 / phi(r**m, p), "fine-scale neighbor", min_terms)
    return s1, s2


# --- chaining constants --------------------------------------------------------

@dataclass(frozen=True)
class ChainConstants:
    """Constants of the two-regime chaining bound at net ratio r and
    increment scale C."""

    r: float
    C: float
    M0: float
    A_rq: float
    B_rq: float
    K1: float
    M2: float
    M3: float
    M4: float
    M5: float
    K2: float


def chaining_constants(spec: OrliczSpec, r: float, C: float, min_terms: int = 0) -> ChainConstants:
    if C <= 0:
        raise BoundsError(f"increment scale C must be > 0, got {C}")
    p, q, L = spec.p, spec.q, spec.L
    a_rq, b_rq = net_constants(r, q)
    m0 = 12.0 * C * L
    k1 = 2.0 * C * m0 ** (1.0 / q) * a_rq * (1.0 + b_rq)

    denom = 1.0 - 2.0 ** ((1.0 - q) / q) * r ** (-1.0 / q)
    if denom <= 0:
        raise BoundsError(f"fine-scale sum does not contract for r={r}, q={q}")
    base12 = (12.0 ** (1.0 - q) * C * L) ** (1.0 / q)
    m2 = base12 / denom
    s1, s2 = fine_scale_series(spec, r, min_terms)
    m3 = 2.0 / m2 * base12 * s1
    m4 = (2.0 * 6.0 ** (1.0 - q) * C * L / r) ** (1.0 / q)
    m5 = b_rq / m4 * (2.0 * 6.0 ** (1.0 - q) * C * L * r) ** (1.0 / q) * s2
    k2 = 2.0 * m2 * max(m3, 1.0) + m4 * max(m5, 1.0)
    out = ChainConstants(
        r=r, C=C, M0=m0, A_rq=a_rq, B_rq=b_rq, K1=k1, M2=m2, M3=m3, M4=m4, M5=m5, K2=k2
    )
    for name, val in out.__dict__.items():
        if not (np.isfinite(val) and val > 0):
            raise BoundsError(f"chaining constant {name} is not positive finite: {val}")
    return out


@dataclass(frozen=True)
class CorollaryConstants:
    """Tail-bound constants distilled from the chaining constants:
    threshold slope/intercept (A_bar, B_bar) and tail prefactor D_bar."""

    A_phi_q: float
    B_phi_q: float
    A_bar: float
    B_bar: float
    D_bar: float


def corollary_constants(cc: ChainConstants, spec: OrliczSpec) -> CorollaryConstants:
    a_phi_q = cc.K1 * spec.E_q
    b_phi_q = cc.K1 + cc.K2
    factor = (2.0 / LN2) ** (1.0 / (spec.p * spec.q))
    return CorollaryConstants(
        A_phi_q=a_phi_q,
        B_phi_q=b_phi_q,
        A_bar=a_phi_q + factor * b_phi_q,
        B_bar=factor * b_phi_q,
        D_bar=spec.D_pq + 1.0,
    )


@lru_cache(maxsize=128)
def optimized_constants(p: float, q: float, C: float):
    """Run the pipeline over the r grid and keep the r minimizing B_bar.

    Returns (spec, chain, corollary); the chosen r is chain.r.
    """
    spec = orlicz_spec(p, q)
    best = None
    for r in R_GRID:
        chain = chaining_constants(spec, float(r), C)
        cor = corollary_constants(chain, spec)
        if best is None or cor.B_bar < best[2].B_bar:
            best = (spec, chain, cor)
    return best


# --- sub-Gaussian Orlicz scale -------------------------------------------------

def subgaussian_orlicz_scale(v: float, tail_only: bool = False) -> float:
    """Smallest C with E phi_2(|Z|/C) <= 1 for a sub-Gaussian Z of variance
    proxy v.

    For exactly Gaussian Z ~ N(0, v) this is closed form sqrt(8 v ln2 / 3).
    With only the tail bound P(|Z| >= x) <= 2 exp(-x^2/(2v)) available, the
    expectation is integrated numerically, giving a slightly larger scale.
    """
    if v <= 0:
        raise BoundsError(f"variance proxy must be > 0, got {v}")
    if not tail_only:
        return math.sqrt(8.0 * v * LN2 / 3.0)
    return math.sqrt(2.0 * v * LN2 * _tail_only_shape())


@lru_cache(maxsize=1)
def _tail_only_shape() -> float:
    """Shape parameter a solving int_0^inf min(1, 2 (1+y)^(-a)) dy = 1.

    With C = sqrt(2 v ln2 a), the integral bounds E phi_2(|Z|/C) from the
    tail alone; it depends on v only through a, so the scale is sqrt(v)
    times a universal constant.
    """

    def budget(a: float) -> float:
        y_star = 2.0 ** (1.0 / a) - 1.0
        # substitute u = ln(1+y): tail integral becomes exponential decay
        tail, err = integrate.quad(
            lambda u: 2.0 * math.exp(-(a - 1.0) * u), math.log1p(y_star), np.inf
        )
        if err > 1e-7 * max(tail, 1.0):
            raise BoundsError("tail integration for the Orlicz scale failed to converge")
        return y_star + tail

    return float(optimize.brentq(lambda a: budget(a) - 1.0, 1.5, 16.0, xtol=1e-14, rtol=1e-15))


GAUSSIAN_UNIT_SCALE = math.sqrt(8.0 * LN2 / 3.0)


# --- fractional Brownian motion tail bound --------------------------------------

@dataclass(frozen=True)
class FbmTailBound:
    """Evaluated tail-bound curve P(TV^c >= threshold(u)) <= prob_bound(u)."""

    H: float
    S: float
    c: float
    A_H: float
    B_H: float
    C_H: float
    u: np.ndarray
    threshold: np.ndarray
    prob_bound: np.ndarray
    chain: ChainConstants
    corollary: CorollaryConstants


def fbm_tail_bound(H: float, S: float, c: float, u) -> FbmTailBound:
    """Tail bound for TV^c of fractional Brownian motion on [0, S]:
    P( TV^c >= c^((H-1)/H) S (A_H + B_H u) ) <= C_H exp(-u^(2H)).

    Standardized increments are exactly N(0,1), so the increment scale is the
    closed-form Gaussian Orlicz scale, independent of H; C_H = 1 for H >= 1/2.
    """
    if not 0.0 < H < 1.0:
        raise BoundsError(f"Hurst exponent must lie in (0,1), got {H}")
    if S <= 0 or c <= 0:
        raise BoundsError("fbm tail bound needs S > 0 and c > 0")
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any(u_arr < 0):
        raise BoundsError("u must be >= 0")
    spec, chain, cor = optimized_constants(2.0, H, GAUSSIAN_UNIT_SCALE)
    scale = c ** ((H - 1.0) / H) * S
    threshold = scale * (cor.A_bar + cor.B_bar * u_arr)
    prob = np.minimum(1.0, cor.D_bar * np.exp(-(u_arr ** (2.0 * H))))
    return FbmTailBound(
        H=H, S=S, c=c,
        A_H=cor.A_bar, B_H=cor.B_bar, C_H=cor.D_bar,
        u=u_arr, threshold=threshold, prob_bound=prob,
        chain=chain, corollary=cor,
    )


# --- Brownian / diffusion MGF bounds --------------------------------------------

@dataclass(frozen=True)
class MgfBound:
    """E exp(lam TV^c) <= value, with the exponent kept in log space."""

    lam: float
    log_value: float

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf


def _wiener_mgf_constants() -> tuple:
    """(alpha, beta) of the Brownian MGF bound from the (p=2, q=1/2)
    pipeline at the exact-Gaussian increment scale."""
    _, _, cor = optimized_constants(2.0, 0.5, GAUSSIAN_UNIT_SCALE)
    alpha = 2.0 * cor.B_bar
    beta = cor.A_bar + 2.0 * LN2 * cor.B_bar
    return alpha, beta


def bm_mgf_bound(S: float, c: float, lam: float) -> MgfBound:
    """E exp(lam TV^c(W, S)) <= 2 exp(lam^2 S alpha + lam S beta / c)."""
    if lam < 0:
        raise BoundsError(f"lambda must be >= 0, got {lam}")
    if S <= 0 or c <= 0:
        raise BoundsError("bm mgf bound needs S > 0 and c > 0")
    alpha, beta = _wiener_mgf_constants()
    return MgfBound(lam=lam, log_value=LN2 + lam * lam * S * alpha + lam * S * beta / c)


@dataclass(frozen=True)
class DiffusionBoundParams:
    """Inputs and derived constants of the diffusion MGF bound for
    |sigma| <= R, |mu| <= C + D|x|, started at x0."""

    R: float
    C: float
    D: float
    x0: float
    S: float
    c: float
    lam: float
    gamma: float
    delta: float
    eta: float
    alpha_R: float
    beta_R: float


def diffusion_bound_params(
    R: float, C: float, D: float, x0: float, S: float, c: float, lam: float
) -> DiffusionBoundParams:
    if R <= 0:
        raise BoundsError(f"sigma bound R must be > 0, got {R}")
    if C < 0 or D < 0 or lam < 0:
        raise BoundsError("C, D and lambda must be >= 0")
    if S <= 0 or c <= 0:
        raise BoundsError("diffusion bound needs S > 0 and c > 0")
    # martingale-part increments are sub-Gaussian with variance proxy R^2,
    # known through the tail bound only
    scale = subgaussian_orlicz_scale(R * R, tail_only=True)
    _, _, cor = optimized_constants(2.0, 0.5, scale)
    alpha_r = 2.0 * cor.B_bar
    beta_r = cor.A_bar + 2.0 * LN2 * cor.B_bar
    gamma = (C + D * abs(x0)) * S * math.exp(D * S)
    delta = D * S * math.exp(D * S)
    eta = delta * R * math.sqrt(S / 2.0)
    out = DiffusionBoundParams(
        R=R, C=C, D=D, x0=x0, S=S, c=c, lam=lam,
        gamma=gamma, delta=delta, eta=eta, alpha_R=alpha_r, beta_R=beta_r,
    )
    for name in ("gamma", "delta", "eta", "alpha_R", "beta_R"):
        if not np.isfinite(getattr(out, name)):
            raise BoundsError(f"derived diffusion constant {name} is not finite")
    return out


def diffusion_mgf_bound(params: DiffusionBoundParams) -> MgfBound:
    """E exp(lam TV^c(X, S)) <=
    2 exp(lam^2 S alpha_R + lam S beta_R / c + lam gamma)
      * (1 + 8 lam eta exp(lam^2 eta^2)).

    At D = 0 the correction factor is 1 and gamma = C S, reducing to the
    Brownian-style bound with the C-drift surcharge.
    """
    lam = params.lam
    log_core = (
        LN2
        + lam * lam * params.S * params.alpha_R
        + lam * params.S * params.beta_R / params.c
        + lam * params.gamma
    )
    tail_exponent = lam * lam * params.eta * params.eta
    # log(1 + 8 lam eta e^t) without overflowing
    z = 8.0 * lam * params.eta
    if z == 0.0:
        log_factor = 0.0
    elif tail_exponent > 700.0 or z * math.exp(min(tail_exponent, 700.0)) > 1e300:
        log_factor = math.log(z) + tail_exponent
    else:
        log_factor = math.log1p(z * math.exp(tail_exponent))
    return MgfBound(lam=lam, log_value=log_core + log_factor)


# --- Levy exponential-moment criterion -------------------------------------------

@dataclass(frozen=True)
class LevyMomentCheck:
    """Finiteness verdict for E exp(alpha TV^c) of a Levy process, decided by
    the exponential moment of the jump measure over {|x| > 1}."""

    alpha: float
    finite: bool
    integral: float
    threshold: float


def levy_exp_moment_check(nu: jm.JumpMeasure, alpha: float) -> LevyMomentCheck:
    if alpha <= 0:
        raise BoundsError(f"alpha must be > 0, got {alpha}")
    threshold = jm.exp_moment_threshold(nu)
    finite = alpha < threshold
    integral = jm.exp_moment_integral(nu, alpha) if finite else math.inf
    return LevyMomentCheck(alpha=alpha, finite=finite, integral=integral, threshold=threshold)
