"""The power Orlicz family phi_p(x) = 2^(x^p) - 1 and its derived constants.

Everything downstream (net constants, chaining pipeline, tail bounds) is
parametrized by a pair (p, q): p indexes the Orlicz function controlling
increment tails, q is the Hoelder exponent of the time distance |s-t|^q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)


def phi(x: float, p: float) -> float:
    """phi_p(x) = 2^(x^p) - 1 for x >= 0 (inf on double overflow)."""
    if x < 0:
        raise ValueError(f"phi is defined for x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if p * math.log2(x) > 10.0:  # x^p > 1024, so 2^(x^p) overflows a double
        return math.inf
    e = x**p
    if e > 1023.0:
        return math.inf
    return 2.0**e - 1.0


def phi_inv(y: float, p: float) -> float:
    """Inverse of phi_p on [0, inf)."""
    if y < 0:
        raise ValueError(f"phi_inv is defined for y >= 0, got {y}")
    return math.log2(1.0 + y) ** (1.0 / p)


def convexity_onset(p: float) -> float:
    """Smallest point past which phi_p is convex: 0 for p >= 1, else
    ((1-p)/(p ln 2))^(1/p)."""
    if p <= 0:
        raise ValueError(f"p must be > 0, got {p}")
    if p >= 1:
        return 0.0
    return ((1.0 - p) / (p * LN2)) ** (1.0 / p)


def subadditivity_constant(p: float) -> float:
    """L with phi_p^{-1}(xy) <= L (phi_p^{-1}(x) + phi_p^{-1}(y)):
    max(1, 2^((1-p)/p))."""
    if p <= 0:
        raise ValueError(f"p must be > 0, got {p}")
    return max(1.0, 2.0 ** ((1.0 - p) / p))


def sublinearity_slack(q: float) -> float:
    """Minimal E_q in [0, 1] with E_q + x^(1/q) >= x for all x >= 0.

    The gap x - x^(1/q) is maximal on [0, 1] at x* = q^(q/(1-q)); it vanishes
    as q -> 1.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if q == 1.0:
        return 0.0
    x_star = q ** (q / (1.0 - q))
    return x_star - x_star ** (1.0 / q)


@dataclass(frozen=True)
class OrliczSpec:
    """(p, q) with every derived constant of the phi_p family.

    C_p / D_p: convexity onset of phi_p and its value there.
    C_pq / D_pq: the same for x -> phi_p(x^q) = phi_{pq}(x).
    L: subadditivity constant; E_q: sublinearity slack.
    """

    p: float
    q: float
    L: float
    C_p: float
    D_p: float
    C_pq: float
    D_pq: float
    E_q: float


def orlicz_spec(p: float, q: float) -> OrliczSpec:
    if p <= 0:
        raise ValueError(f"p must be > 0, got {p}")
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    c_p = convexity_onset(p)
    c_pq = convexity_onset(p * q)
    return OrliczSpec(
        p=p,
        q=q,
        L=subadditivity_constant(p),
        C_p=c_p,
        D_p=phi(c_p, p),
        C_pq=c_pq,
        D_pq=phi(c_pq, p * q),
        E_q=sublinearity_slack(q),
    )
