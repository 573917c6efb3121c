"""Pure-Python mirror of the compiled tube kernel.

Selected at import time when the extension is unavailable (see
``truvar._backend``).  Keep the operation order identical to
``_kernels.pyx`` so both backends agree bit-for-bit.
"""

import numpy as np


def _tube_tv(xs, c: float) -> float:
    # xs: list of floats (fastest indexable container for a CPython loop)
    n = len(xs)
    if n <= 1:
        return 0.0
    h = 0.5 * c
    lo = xs[0] - h
    hi = xs[0] + h
    y = 0.0
    started = False
    tv = 0.0
    comp = 0.0
    for k in range(1, n):
        xk = xs[k]
        a = xk - h
        b = xk + h
        step = 0.0
        if not started:
            if a > hi:
                step = a - hi
                y = a
                started = True
            elif b < lo:
                step = lo - b
                y = b
                started = True
            else:
                if a > lo:
                    lo = a
                if b < hi:
                    hi = b
        else:
            if a > y:
                step = a - y
                y = a
            elif b < y:
                step = y - b
                y = b
        if step != 0.0:
            # Kahan update
            u = step - comp
            t = tv + u
            comp = (t - tv) - u
            tv = t
    return tv


def tube_tv(xs, c: float) -> float:
    """Truncated variation at level c >= 0 of the sampled values `xs`."""
    return _tube_tv(np.asarray(xs, dtype=np.float64).tolist(), c)


def tube_tv_many(xs, cs, out) -> None:
    """One tube pass per level in `cs`, results written into `out`."""
    vals = np.asarray(xs, dtype=np.float64).tolist()
    for i in range(len(cs)):
        out[i] = _tube_tv(vals, cs[i])
