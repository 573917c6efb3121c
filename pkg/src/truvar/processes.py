"""Path generators: fractional Brownian motion, diffusions, Levy processes.

All generators are pure functions of (spec, seed): identical inputs give
bit-identical paths, and concurrent invocation is safe.  Grids are uniform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import jump_measures as jm
from .path import CADLAG_STEP, PIECEWISE_LINEAR, SampledPath


class ProcessError(ValueError):
    """Invalid process specification or a coefficient-bound violation."""


class GridResolutionWarning(UserWarning):
    """Grid too coarse for the requested jump activity."""


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


# --- fractional Brownian motion ---------------------------------------------

@dataclass(frozen=True)
class FbmSpec:
    H: float
    S: float
    n: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ProcessError(f"Hurst exponent must lie in (0,1), got {self.H}")
        if self.S <= 0:
            raise ProcessError(f"horizon must be > 0, got {self.S}")
        if self.n < 1:
            raise ProcessError(f"grid size must be >= 1, got {self.n}")


DENSE_FBM_LIMIT = 4096
_EIG_NEGATIVITY_RTOL = 1e-10


@lru_cache(maxsize=32)
def _fgn_sqrt_eigs(H: float, n: int):
    """sqrt eigenvalues of the circulant embedding of the unit-step
    fractional-Gaussian-noise covariance, or None if the embedding is not
    nonnegative definite beyond tolerance."""
    k = np.arange(n + 1, dtype=np.float64)
    rho = 0.5 * ((k + 1.0) ** (2 * H) - 2.0 * k ** (2 * H) + np.abs(k - 1.0) ** (2 * H))
    emb = np.concatenate([rho[:n], [rho[n]], rho[n - 1:0:-1]])
    eigs = np.fft.fft(emb).real
    if eigs.min() < -_EIG_NEGATIVITY_RTOL * eigs.max():
        return None
    return np.sqrt(np.maximum(eigs, 0.0))


def _fgn_circulant(H: float, n: int, rng) -> np.ndarray:
    """Standardized fractional Gaussian noise (unit-step variance 1) of
    length n, exact in law via FFT of the circulant embedding."""
    sqrt_eigs = _fgn_sqrt_eigs(H, n)
    if sqrt_eigs is None:
        raise ProcessError("circulant embedding not nonnegative definite")
    m = 2 * n
    v = rng.standard_normal(m)
    z = np.empty(m, dtype=np.complex128)
    z[0] = v[0]
    z[n] = v[n]
    if n > 1:
        interior = (v[1:n] + 1j * v[n + 1:]) / math.sqrt(2.0)
        z[1:n] = interior
        z[n + 1:] = np.conj(interior[::-1])
    return math.sqrt(m) * np.fft.ifft(sqrt_eigs * z).real[:n]


def _fbm_dense(spec: FbmSpec, rng) -> np.ndarray:
    t = spec.S / spec.n * np.arange(1, spec.n + 1)
    tt = t[:, None]
    cov = 0.5 * (tt ** (2 * spec.H) + tt.T ** (2 * spec.H) - np.abs(tt - tt.T) ** (2 * spec.H))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ProcessError(
            f"dense covariance factorization failed for H={spec.H}, n={spec.n}: {exc}"
        ) from exc
    return chol @ rng.standard_normal(spec.n)


def gen_fbm(spec: FbmSpec) -> SampledPath:
    """Sample fractional Brownian motion on the uniform grid, exact in law.

    Circulant embedding of the increment covariance (O(n log n)); if the
    embedding has an eigenvalue below -1e-10 (relative), falls back to dense
    Cholesky for n <= 4096 and fails with a diagnostic beyond that.
    """
    rng = _rng(spec.seed)
    dt = spec.S / spec.n
    values = np.empty(spec.n + 1)
    values[0] = 0.0
    if _fgn_sqrt_eigs(spec.H, spec.n) is not None:
        increments = dt ** spec.H * _fgn_circulant(spec.H, spec.n, rng)
        np.cumsum(increments, out=values[1:])
    elif spec.n <= DENSE_FBM_LIMIT:
        values[1:] = _fbm_dense(spec, rng)
    else:
        raise ProcessError(
            f"circulant embedding for H={spec.H}, n={spec.n} has negative eigenvalues "
            f"beyond tolerance and n exceeds the dense fallback limit {DENSE_FBM_LIMIT}"
        )
    return SampledPath(0.0, dt, values, PIECEWISE_LINEAR)


# --- diffusions --------------------------------------------------------------

@dataclass(frozen=True)
class Coefficient:
    """Named (t, x) -> float coefficient family, self-describing enough to be
    written in a TOML spec and to derive growth/bound declarations.

    kinds: const (value a), linear (a + b*x), sin (a*sin(x)).
    """

    kind: str
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("const", "linear", "sin"):
            raise ProcessError(f"unknown coefficient kind {self.kind!r}")

    def __call__(self, t: float, x: float) -> float:
        if self.kind == "const":
            return self.a
        if self.kind == "linear":
            return self.a + self.b * x
        return self.a * math.sin(x)

    @property
    def constant_value(self):
        if self.kind == "const" or (self.kind == "linear" and self.b == 0.0):
            return self.a
        return None

    def default_growth(self) -> tuple:
        """(C, D) with |f(t,x)| <= C + D|x| for this family."""
        if self.kind == "linear":
            return abs(self.a), abs(self.b)
        return abs(self.a), 0.0

    def default_bound(self):
        """Smallest uniform bound, or None if the family is unbounded."""
        if self.kind == "const":
            return abs(self.a)
        if self.kind == "sin":
            return abs(self.a)
        if self.kind == "linear" and self.b == 0.0:
            return abs(self.a)
        return None


@dataclass(frozen=True)
class DiffusionSpec:
    """Euler time-stepping spec for dX = mu(t,X) dt + sigma(t,X) dW.

    `mu_growth = (C, D)` declares |mu(t,x)| <= C + D|x| and `sigma_bound = R`
    declares |sigma| <= R; both are verified at every evaluated grid point
    and a violation is an error.
    """

    mu: Callable
    sigma: Callable
    x0: float
    S: float
    n: int
    seed: int
    mu_growth: tuple = None
    sigma_bound: float = None

    def __post_init__(self):
        if self.S <= 0 or self.n < 1:
            raise ProcessError("diffusion requires S > 0 and n >= 1")
        if self.mu_growth is None:
            if not isinstance(self.mu, Coefficient):
                raise ProcessError("mu_growth=(C, D) must be declared for a bare callable mu")
            object.__setattr__(self, "mu_growth", self.mu.default_growth())
        C, D = self.mu_growth
        if C < 0 or D < 0:
            raise ProcessError(f"growth constants must be >= 0, got C={C}, D={D}")
        object.__setattr__(self, "mu_growth", (float(C), float(D)))
        if self.sigma_bound is None:
            default = self.sigma.default_bound() if isinstance(self.sigma, Coefficient) else None
            if default is None:
                raise ProcessError("sigma_bound=R must be declared for this sigma")
            # R must be strictly positive; a vanishing sigma still gets a valid bound
            object.__setattr__(self, "sigma_bound", default if default > 0 else 1.0)
        if not self.sigma_bound > 0:
            raise ProcessError(f"sigma bound must be > 0, got {self.sigma_bound}")


def gen_diffusion(spec: DiffusionSpec) -> SampledPath:
    """Explicit Euler path with the accumulated quadratic-variation track
    qv(t_k) = sum sigma(t_i, X_i)^2 dt."""
    rng = _rng(spec.seed)
    n = spec.n
    dt = spec.S / n
    sqdt = math.sqrt(dt)
    C, D = spec.mu_growth
    R = spec.sigma_bound
    noise = rng.standard_normal(n)

    mu_const = spec.mu.constant_value if isinstance(spec.mu, Coefficient) else None
    sig_const = spec.sigma.constant_value if isinstance(spec.sigma, Coefficient) else None
    values = np.empty(n + 1)
    qv = np.empty(n + 1)
    values[0] = spec.x0
    qv[0] = 0.0
    tol = 1e-12
    if mu_const is not None and sig_const is not None:
        if abs(sig_const) > R * (1 + tol):
            raise ProcessError(f"sigma bound violated: |{sig_const}| > R={R}")
        if abs(mu_const) > C + tol * (1 + C):
            raise ProcessError(f"mu growth bound violated: |{mu_const}| > C={C}")
        np.cumsum(mu_const * dt + sig_const * sqdt * noise, out=values[1:])
        values[1:] += spec.x0
        qv[1:] = sig_const * sig_const * dt * np.arange(1, n + 1)
    else:
        mu, sigma = spec.mu, spec.sigma
        x = spec.x0
        acc = 0.0
        for i in range(n):
            t = i * dt
            m = mu(t, x)
            s = sigma(t, x)
            if abs(s) > R * (1 + tol):
                raise ProcessError(
                    f"sigma bound violated at step {i} (t={t:.6g}, x={x:.6g}): "
                    f"|{s:.6g}| > R={R:.6g}"
                )
            if abs(m) > (C + D * abs(x)) * (1 + tol) + tol:
                raise ProcessError(
                    f"mu growth bound violated at step {i} (t={t:.6g}, x={x:.6g}): "
                    f"|{m:.6g}| > C + D|x| = {C + D * abs(x):.6g}"
                )
            x = x + m * dt + s * sqdt * noise[i]
            acc += s * s * dt
            values[i + 1] = x
            qv[i + 1] = acc
    return SampledPath(0.0, dt, values, PIECEWISE_LINEAR, qv)


# --- Levy processes ----------------------------------------------------------

@dataclass(frozen=True)
class LevyTriplet:
    """Generating triplet (A, nu, gamma) under the size-1 jump truncation
    convention, plus the small-jump threshold eps used by the sampler."""

    A: float
    gamma: float
    nu: jm.JumpMeasure = field(default_factory=jm.NoJumps)
    eps: float = 1e-3

    def __post_init__(self):
        if self.A < 0:
            raise ProcessError(f"Gaussian variance A must be >= 0, got {self.A}")
        if self.eps <= 0:
            raise ProcessError(f"small-jump threshold eps must be > 0, got {self.eps}")
        if isinstance(self.nu, (jm.TemperedStable, jm.Meixner)) and self.eps >= 1.0:
            raise ProcessError(
                "eps >= 1 breaks the size-1 compensation convention for "
                "infinite-activity measures"
            )


def gen_levy(triplet: LevyTriplet, S: float, n: int, seed: int) -> SampledPath:
    """Sample a Levy path on the uniform grid, cadlag-step interpreted.

    Jumps of magnitude > eps are compound Poisson, snapped to their grid
    cell (one recorded jump per cell: simultaneous arrivals merge); jumps
    <= eps are replaced by a Gaussian with the matched variance
    var_below(eps) per unit time.  Drift is adjusted by the compensator of
    the uncompensated band (eps, 1].
    """
    if S <= 0 or n < 1:
        raise ProcessError("levy generation requires S > 0 and n >= 1")
    rng = _rng(seed)
    dt = S / n
    lam = jm.rate_above(triplet.nu, triplet.eps)
    sigma2 = triplet.A + jm.var_below(triplet.nu, triplet.eps)
    drift = triplet.gamma - jm.compensation(triplet.nu, triplet.eps)
    if lam * dt >= 0.1:
        warnings.warn(
            f"grid cells too coarse for the jump activity: dt * rate = {lam * dt:.3g} >= 0.1; "
            "multiple jumps per cell will merge",
            GridResolutionWarning,
            stacklevel=2,
        )
    increments = drift * dt + math.sqrt(sigma2 * dt) * rng.standard_normal(n)
    if lam > 0:
        counts = rng.poisson(lam * dt, size=n)
        total = int(counts.sum())
        if total:
            sizes = jm.sample_jumps(triplet.nu, triplet.eps, total, rng)
            np.add.at(increments, np.repeat(np.arange(n), counts), sizes)
    values = np.empty(n + 1)
    values[0] = 0.0
    np.cumsum(increments, out=values[1:])
    return SampledPath(0.0, dt, values, CADLAG_STEP)
