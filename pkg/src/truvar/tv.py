"""Exact truncated variation of sampled paths.

Three routes to the same number:

* ``truncated_variation`` — O(n) streaming tube algorithm (compiled kernel
  when available).  Its correctness is pinned to the definitional oracles by
  the test suite, not assumed.
* ``tv_oracle_dp`` — the definitional O(n^2) dynamic program.
* ``tv_oracle_exhaustive`` — literal enumeration of all increasing
  grid-index subsequences (tiny inputs only; ground truth in tests).

Plus the minimal uniform-approximation envelope, the level-crossing
skeleton and multi-level profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .path import SampledPath

DP_SIZE_LIMIT = 100_000
EXHAUSTIVE_SIZE_LIMIT = 18  # grid steps; 2^(n+1) subsequences


class TvError(ValueError):
    """Invalid input to a truncated-variation computation."""


@dataclass(frozen=True)
class TvResult:
    """Truncated variation `value` at level `c`, tagged with the algorithm used."""

    c: float
    value: float
    algorithm: str  # streaming | dp | exhaustive


@dataclass(frozen=True)
class Skeleton:
    """Level-crossing skeleton of a sampled path.

    `stop_indices[0]` is always 0 (the starting anchor); each later entry is
    the first grid index whose value deviates from the previous skeleton
    value by more than c/2.  `skel` is piecewise constant between stops and
    jumps exactly at them.  `overshoots[i]` is the crossing excess
    |x[stop] - previous value| - c/2 > 0 of stop i+1 (a discretization
    artifact: in continuous time a continuous path crosses at exactly c/2).
    """

    c: float
    stop_indices: np.ndarray
    skel: SampledPath
    overshoots: np.ndarray

    def tube_violation(self, path: SampledPath) -> float:
        """Max over grid points of |path - skel| - c/2 (positive = violated)."""
        return float(np.max(np.abs(path.values - self.skel.values)) - 0.5 * self.c)


def _values(path) -> np.ndarray:
    vals = path.values if isinstance(path, SampledPath) else np.asarray(path, dtype=np.float64)
    if vals.ndim != 1 or vals.size < 1:
        raise TvError("path must be a 1-d sequence with at least one point")
    if not np.all(np.isfinite(vals)):
        raise TvError("path contains non-finite values")
    return np.ascontiguousarray(vals, dtype=np.float64)


def _check_level(c: float) -> float:
    c = float(c)
    if not np.isfinite(c) or c < 0:
        raise TvError(f"truncation level must be finite and >= 0, got {c}")
    return c


def truncated_variation(path, c: float) -> TvResult:
    """Streaming truncated variation: sup over increasing grid subsequences of
    the truncated increment sums, computed in one O(n) tube pass.

    For a cadlag-step path the sampled value equals the continuous-time
    functional exactly; under linear interpolation it is a lower bound.
    """
    vals = _values(path)
    c = _check_level(c)
    return TvResult(c=c, value=float(kernels.tube_tv(vals, c)), algorithm="streaming")


def total_variation(path) -> float:
    """Sum of absolute consecutive increments (truncation level 0)."""
    vals = _values(path)
    if vals.size <= 1:
        return 0.0
    return float(np.sum(np.abs(np.diff(vals))))


def tv_oracle_dp(path, c: float) -> TvResult:
    """Definitional O(n^2) dynamic program.

    best[j] = max(0, max_{i<j} best[i] + (|x_j - x_i| - c)_+); the answer is
    max_j best[j].  Terms are nonnegative, so the maximum ranges over all
    increasing subsequences.
    """
    vals = _values(path)
    c = _check_level(c)
    if vals.size > DP_SIZE_LIMIT:
        raise TvError(
            f"dp oracle limited to {DP_SIZE_LIMIT} points (got {vals.size}); "
            "use truncated_variation for large paths"
        )
    best = np.zeros(vals.size)
    for j in range(1, vals.size):
        gains = best[:j] + np.maximum(np.abs(vals[j] - vals[:j]) - c, 0.0)
        best[j] = max(0.0, gains.max())
    return TvResult(c=c, value=float(best.max()), algorithm="dp")


def tv_oracle_exhaustive(path, c: float) -> TvResult:
    """Ground-truth oracle: literal enumeration of every increasing
    grid-index subsequence.  Exponential; guarded to tiny inputs."""
    vals = _values(path)
    c = _check_level(c)
    if vals.size - 1 > EXHAUSTIVE_SIZE_LIMIT:
        raise TvError(
            f"exhaustive oracle limited to {EXHAUSTIVE_SIZE_LIMIT} grid steps "
            f"(got {vals.size - 1})"
        )
    xs = vals.tolist()
    m = len(xs)
    best = 0.0
    # DFS over (last chosen index, truncated sum so far); every subsequence
    # is visited exactly once.
    stack = [(i, 0.0) for i in range(m)]
    while stack:
        last, acc = stack.pop()
        if acc > best:
            best = acc
        xl = xs[last]
        for j in range(last + 1, m):
            d = xs[j] - xl
            if d < 0.0:
                d = -d
            d -= c
            stack.append((j, acc + d) if d > 0.0 else (j, acc))
    return TvResult(c=c, value=best, algorithm="exhaustive")


def minimal_envelope(path, c: float) -> SampledPath:
    """The minimal uniform approximation: a path within c/2 of the input at
    every grid point whose total variation equals the truncated variation.

    This is the tube trajectory of the streaming pass; the deferred-start
    segment is filled with the value the tube first moves from (or, if the
    band never empties, with the midpoint of the final band).
    """
    src = path if isinstance(path, SampledPath) else None
    vals = _values(path)
    c = _check_level(c)
    if c <= 0:
        raise TvError("minimal envelope requires c > 0")
    n = vals.size
    h = 0.5 * c
    out = np.empty(n)
    lo = vals[0] - h
    hi = vals[0] + h
    started = False
    y = 0.0
    for k in range(1, n):
        a = vals[k] - h
        b = vals[k] + h
        if not started:
            if a > hi:
                out[:k] = hi
                y = a
                started = True
            elif b < lo:
                out[:k] = lo
                y = b
                started = True
            else:
                lo = max(lo, a)
                hi = min(hi, b)
                continue
        else:
            y = min(max(y, a), b)
        out[k] = y
    if not started:
        out[:] = 0.5 * (lo + hi)
    if src is not None:
        return SampledPath(src.t0, src.dt, out, src.interpretation)
    return SampledPath(0.0, 1.0, out)


def level_crossing_skeleton(path, c: float) -> Skeleton:
    """Piecewise-constant skeleton from first-crossing stopping indices.

    A new stop is declared at the first grid index whose value deviates from
    the current skeleton value by more than c/2; the skeleton jumps to the
    path value there.  The truncated variation of the path never exceeds the
    total variation of its skeleton.
    """
    src = path if isinstance(path, SampledPath) else None
    vals = _values(path)
    c = _check_level(c)
    if c <= 0:
        raise TvError("skeleton requires c > 0")
    h = 0.5 * c
    stops = [0]
    overshoots = []
    skel = np.empty_like(vals)
    cur = vals[0]
    skel[0] = cur
    for k in range(1, vals.size):
        dev = abs(vals[k] - cur)
        if dev > h:
            stops.append(k)
            overshoots.append(dev - h)
            cur = vals[k]
        skel[k] = cur
    if src is not None:
        skel_path = SampledPath(src.t0, src.dt, skel, "cadlag-step")
    else:
        skel_path = SampledPath(0.0, 1.0, skel, "cadlag-step")
    return Skeleton(
        c=c,
        stop_indices=np.asarray(stops, dtype=np.int64),
        skel=skel_path,
        overshoots=np.asarray(overshoots, dtype=np.float64),
    )


def tv_profile(path, c_list) -> np.ndarray:
    """Truncated variation at each level of an increasing list, one tube pass
    per level."""
    vals = _values(path)
    cs = np.ascontiguousarray(c_list, dtype=np.float64)
    if cs.ndim != 1 or cs.size == 0:
        raise TvError("c_list must be a nonempty 1-d sequence")
    if np.any(~np.isfinite(cs)) or cs[0] < 0:
        raise TvError("levels must be finite and >= 0")
    if np.any(np.diff(cs) <= 0):
        raise TvError("c_list must be strictly increasing")
    out = np.empty(cs.size)
    kernels.tube_tv_many(vals, cs, out)
    return out
