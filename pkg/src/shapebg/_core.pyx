# cython: language_level=3
"""Compiled hot loops: direct Gaussian KDE sums, LSCV pair sums, touch-point DP.

Every function here has a numpy twin in ``_fallback`` with the same signature
and the same results up to floating-point rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, fabs, sqrt, INFINITY

cnp.import_array()

# terms below exp(-708) are dropped: they are denormal and slow, and negligible
cdef double EXP_CUT = 708.0


def kde_sum(const double[::1] x_sorted, const double[::1] t, double h):
    """Unnormalized kernel sums ``sum_i exp(-((t - x_i)/h)**2 / 2)`` at every ``t``."""
    cdef Py_ssize_t n = x_sorted.shape[0], m = t.shape[0]
    cdef Py_ssize_t k, i, lo, hi, mid
    cdef double reach = h * sqrt(2.0 * EXP_CUT)
    cdef double inv2h2 = 0.5 / (h * h)
    cdef double acc, d, left
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] o = out
    for k in range(m):
        left = t[k] - reach
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) // 2
            if x_sorted[mid] < left:
                lo = mid + 1
            else:
                hi = mid
        acc = 0.0
        i = lo
        while i < n:
            d = t[k] - x_sorted[i]
            if d < -reach:
                break
            acc += exp(-d * d * inv2h2)
            i += 1
        o[k] = acc
    return out


def lscv_pair_sums(const double[::1] x_sorted, const double[::1] h_desc, bint reflect):
    """Pair sums behind the least-squares cross-validation criterion.

    Returns an array of shape (len(h), 5): columns A_m, B_m, A_p, B_p, D_p where
    A = sum_{i<j} exp(-d^2/(4h^2)), B = sum_{i<j} exp(-d^2/(2h^2)), the ``_m``
    columns use d = x_i - x_j, the ``_p`` columns d = x_i + x_j (only when
    ``reflect``) and D_p = sum_i exp(-x_i^2/h^2). Bandwidths must be sorted in
    decreasing order so the cutoff test can stop early.
    """
    cdef Py_ssize_t n = x_sorted.shape[0], nh = h_desc.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double d2, a, e
    out = np.zeros((nh, 5), dtype=np.float64)
    cdef double[:, ::1] o = out
    w_arr = np.empty(nh, dtype=np.float64)
    cdef double[::1] w = w_arr
    for k in range(nh):
        w[k] = 0.25 / (h_desc[k] * h_desc[k])
    cdef double max_d2 = EXP_CUT / w[0]
    for i in range(n):
        for j in range(i + 1, n):
            d2 = x_sorted[j] - x_sorted[i]
            d2 = d2 * d2
            if d2 > max_d2:
                break
            for k in range(nh):
                e = d2 * w[k]
                if e > EXP_CUT:
                    break
                a = exp(-e)
                o[k, 0] += a
                o[k, 1] += a * a
    if reflect:
        for i in range(n):
            for j in range(i, n):
                d2 = x_sorted[i] + x_sorted[j]
                d2 = d2 * d2
                if d2 > max_d2:
                    break
                for k in range(nh):
                    e = d2 * w[k]
                    if e > EXP_CUT:
                        break
                    a = exp(-e)
                    if i == j:
                        o[k, 4] += a
                    else:
                        o[k, 2] += a
                        o[k, 3] += a * a
    return out


cdef inline double _lam(double x, double y) nogil:
    cdef double d = fabs(x - y)
    cdef double top = x if x > y else y
    if d < 1e-8:
        return exp(0.5 * (x + y)) * (1.0 + d * d / 24.0)
    return exp(top) * (-expm1(-d)) / d


cdef inline double _segment_cost(double va, double vb, Py_ssize_t steps,
                                 double delta, bint riemann) nogil:
    """Objective contribution of a linear run of ``steps`` grid intervals."""
    cdef double top, c, total
    if steps <= 0:
        return 0.0
    if not riemann:
        return steps * delta * _lam(va, vb)
    top = va if va > vb else vb
    c = fabs(vb - va) / steps
    if c == 0.0:
        total = (steps + 1) * exp(top)
    else:
        total = exp(top) * (-expm1(-(steps + 1) * c)) / (-expm1(-c))
    return delta * (total - 0.5 * (exp(va) + exp(vb)))


def concave_touch_dp(const double[::1] t, const double[::1] u, bint riemann):
    """Best concave piecewise-linear minorant whose kinks sit on touch points.

    Returns ``(value, touches)`` with ``touches`` the increasing grid indices
    where the minorant equals ``u``.
    """
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j, h, q, cnt, lo, hi, mid, ni, best_i = -1, best_j = -1
    cdef double delta, s, eps, run_min, start, via, val, total, best_total = -INFINITY
    if n < 2:
        raise ValueError("need at least two grid points")
    delta = (t[n - 1] - t[0]) / (n - 1)

    S_arr = np.full((n, n), np.nan)
    feas_arr = np.zeros((n, n), dtype=np.uint8)
    best_arr = np.full((n, n), -np.inf)
    back_arr = np.full((n, n), -1, dtype=np.intp)
    maxleft_arr = np.full(n, -np.inf)
    minright_arr = np.full(n, np.inf)
    cdef double[:, ::1] S = S_arr
    cdef cnp.uint8_t[:, ::1] feas = feas_arr
    cdef double[:, ::1] best = best_arr
    cdef Py_ssize_t[:, ::1] back = back_arr
    cdef double[::1] maxleft = maxleft_arr
    cdef double[::1] minright = minright_arr

    for i in range(n):
        run_min = INFINITY
        for j in range(i + 1, n):
            s = (u[j] - u[i]) / (t[j] - t[i])
            S[i, j] = s
            if s <= run_min + 1e-12 * (1.0 + fabs(run_min)):
                feas[i, j] = 1
            if s < run_min:
                run_min = s
            if s > maxleft[j]:
                maxleft[j] = s
            if s < minright[i]:
                minright[i] = s

    s_in_arr = np.empty(n)
    b_in_arr = np.empty(n)
    h_in_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] s_in = s_in_arr
    cdef double[::1] b_in = b_in_arr
    cdef Py_ssize_t[::1] h_in = h_in_arr
    s_sorted_arr = np.empty(n)
    pmax_arr = np.empty(n)
    parg_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] s_sorted = s_sorted_arr
    cdef double[::1] pmax = pmax_arr
    cdef Py_ssize_t[::1] parg = parg_arr
    cdef Py_ssize_t[::1] order

    for i in range(n):
        ni = 0
        for h in range(i):
            if feas[h, i] and best[h, i] > -INFINITY:
                s_in[ni] = S[h, i]
                b_in[ni] = best[h, i]
                h_in[ni] = h
                ni += 1
        if ni > 0:
            order = np.argsort(-s_in_arr[:ni], kind="stable")
            for q in range(ni):
                s_sorted[q] = s_in[order[q]]
                if q == 0 or b_in[order[q]] > pmax[q - 1]:
                    pmax[q] = b_in[order[q]]
                    parg[q] = h_in[order[q]]
                else:
                    pmax[q] = pmax[q - 1]
                    parg[q] = parg[q - 1]
        for j in range(i + 1, n):
            if not feas[i, j]:
                continue
            s = S[i, j]
            eps = 1e-12 * (1.0 + fabs(s))
            if i == 0:
                start = 0.0
            elif s >= maxleft[i] - eps:
                start = _segment_cost(u[i] - (t[i] - t[0]) * s, u[i], i, delta, riemann)
            else:
                start = -INFINITY
            via = -INFINITY
            h = -1
            if ni > 0:
                # count incoming slopes >= s - eps (array sorted decreasing)
                lo = 0
                hi = ni
                while lo < hi:
                    mid = (lo + hi) // 2
                    if s_sorted[mid] >= s - eps:
                        lo = mid + 1
                    else:
                        hi = mid
                cnt = lo
                if cnt > 0:
                    via = pmax[cnt - 1]
                    h = parg[cnt - 1]
            if via > start:
                best[i, j] = via + _segment_cost(u[i], u[j], j - i, delta, riemann)
                back[i, j] = h
            elif start > -INFINITY:
                best[i, j] = start + _segment_cost(u[i], u[j], j - i, delta, riemann)

    for i in range(n):
        for j in range(i + 1, n):
            val = best[i, j]
            if val == -INFINITY:
                continue
            s = S[i, j]
            if j < n - 1:
                if s > minright[j] + 1e-12 * (1.0 + fabs(s)):
                    continue
                total = val + _segment_cost(u[j], u[j] + (t[n - 1] - t[j]) * s,
                                            n - 1 - j, delta, riemann)
            else:
                total = val
            if total > best_total:
                best_total = total
                best_i = i
                best_j = j

    touches = [best_j, best_i]
    i = best_i
    j = best_j
    while back[i, j] >= 0:
        h = back[i, j]
        touches.append(h)
        j = i
        i = h
    touches.reverse()
    return best_total, np.asarray(touches, dtype=np.intp)
