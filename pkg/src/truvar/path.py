"""Sampled path container and its CSV interchange format."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

CADLAG_STEP = "cadlag-step"
PIECEWISE_LINEAR = "piecewise-linear"
_INTERPRETATIONS = (CADLAG_STEP, PIECEWISE_LINEAR)


class PathError(ValueError):
    """Invalid sampled-path data."""


@dataclass(frozen=True)
class SampledPath:
    """A process sampled on a uniform grid t0, t0+dt, ..., t0+n*dt.

    `values` has length n+1.  `qv`, when present, is the accumulated
    quadratic variation at each grid point (nondecreasing, starts at 0).
    `interpretation` states how the samples stand in for a continuous-time
    path: a cadlag step function or linear interpolation.
    """

    t0: float
    dt: float
    values: np.ndarray
    interpretation: str = PIECEWISE_LINEAR
    qv: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if self.t0 < 0:
            raise PathError(f"t0 must be >= 0, got {self.t0}")
        if not self.dt > 0:
            raise PathError(f"dt must be > 0, got {self.dt}")
        if values.ndim != 1 or values.size < 1:
            raise PathError("values must be a 1-d sequence with at least one point")
        if not np.all(np.isfinite(values)):
            raise PathError("values contain non-finite entries")
        if self.interpretation not in _INTERPRETATIONS:
            raise PathError(
                f"interpretation must be one of {_INTERPRETATIONS}, got {self.interpretation!r}"
            )
        if self.qv is not None:
            qv = np.ascontiguousarray(self.qv, dtype=np.float64)
            object.__setattr__(self, "qv", qv)
            if qv.shape != values.shape:
                raise PathError("qv must have the same length as values")
            if not np.all(np.isfinite(qv)):
                raise PathError("qv contains non-finite entries")
            if qv[0] != 0.0 or np.any(np.diff(qv) < 0):
                raise PathError("qv must be nondecreasing and start at 0")

    @property
    def n(self) -> int:
        """Number of grid steps (values has n+1 entries)."""
        return self.values.size - 1

    @property
    def horizon(self) -> float:
        """Grid span n*dt."""
        return self.n * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    def reversed(self) -> "SampledPath":
        qv = None
        if self.qv is not None:
            qv = self.qv[-1] - self.qv[::-1]
        return SampledPath(self.t0, self.dt, self.values[::-1], self.interpretation, qv)


def write_path_csv(path: SampledPath, stream_or_name) -> None:
    """Write `t,value[,qv]` rows at full double precision (17 significant digits)."""
    own = isinstance(stream_or_name, (str, bytes))
    stream = open(stream_or_name, "w") if own else stream_or_name
    try:
        t = path.times()
        if path.qv is None:
            stream.write("t,value\n")
            for i in range(path.values.size):
                stream.write(f"{t[i]:.17g},{path.values[i]:.17g}\n")
        else:
            stream.write("t,value,qv\n")
            for i in range(path.values.size):
                stream.write(f"{t[i]:.17g},{path.values[i]:.17g},{path.qv[i]:.17g}\n")
    finally:
        if own:
            stream.close()


def read_path_csv(stream_or_name, interpretation: str = PIECEWISE_LINEAR) -> SampledPath:
    """Read a path written by :func:`write_path_csv`.

    The grid must be uniform; `dt` is recovered from the time column.
    """
    own = isinstance(stream_or_name, (str, bytes))
    stream = open(stream_or_name, "r") if own else stream_or_name
    try:
        header = stream.readline().strip()
        if header not in ("t,value", "t,value,qv"):
            raise PathError(f"unrecognized path CSV header {header!r}")
        data = np.loadtxt(io.StringIO(stream.read()), delimiter=",", ndmin=2)
    finally:
        if own:
            stream.close()
    t = data[:, 0]
    if t.size < 1:
        raise PathError("path CSV has no rows")
    if t.size == 1:
        dt = 1.0  # single point: dt is arbitrary but must be positive
    else:
        steps = np.diff(t)
        dt = steps.mean()
        if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1.0):
            raise PathError("path CSV time grid is not uniform")
    qv = data[:, 2] if data.shape[1] == 3 else None
    return SampledPath(float(t[0]), float(dt), data[:, 1], interpretation, qv)
