# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tube kernel for truncated variation of sampled paths.

Single O(n) pass per truncation level: track the running feasible band
[x_k - c/2, x_k + c/2] with a deferred start, move the output value lazily
and accumulate the movement with compensated (Kahan) summation.

`truvar._kernels_py` is a line-by-line mirror of this module; both must
produce bit-identical results (same operation order, IEEE doubles).
"""


cdef double _tube_tv(const double[::1] xs, double c) noexcept nogil:
    cdef Py_ssize_t n = xs.shape[0]
    cdef double h = 0.5 * c
    cdef double lo, hi, a, b, y
    cdef double tv = 0.0, comp = 0.0, step, t, u
    cdef bint started = 0
    cdef Py_ssize_t k

    if n <= 1:
        return 0.0
    lo = xs[0] - h
    hi = xs[0] + h
    y = 0.0
    for k in range(1, n):
        a = xs[k] - h
        b = xs[k] + h
        step = 0.0
        if not started:
            if a > hi:
                step = a - hi
                y = a
                started = 1
            elif b < lo:
                step = lo - b
                y = b
                started = 1
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


def tube_tv(const double[::1] xs, double c):
    """Truncated variation at level c >= 0 of the sampled values `xs`."""
    return _tube_tv(xs, c)


def tube_tv_many(const double[::1] xs, const double[::1] cs, double[::1] out):
    """One tube pass per level in `cs`, results written into `out`."""
    cdef Py_ssize_t i, m = cs.shape[0]
    with nogil:
        for i in range(m):
            out[i] = _tube_tv(xs, cs[i])
