"""Pure numpy implementations of the hot kernels.

Signatures and results match the compiled ``_core`` module; see that module
for the meaning of each quantity.
"""
import numpy as np

EXP_CUT = 708.0
_CHUNK = 2_000_000


def kde_sum(x_sorted, t, h):
    x_sorted = np.asarray(x_sorted, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape[0])
    rows = max(1, _CHUNK // max(1, x_sorted.shape[0]))
    for start in range(0, t.shape[0], rows):
        block = t[start:start + rows]
        z = (block[:, None] - x_sorted[None, :]) / h
        e = 0.5 * z * z
        terms = np.zeros_like(e)
        np.exp(-e, out=terms, where=e <= EXP_CUT)
        out[start:start + rows] = terms.sum(axis=1)
    return out


def _pair_block_sums(d2, w, out, col_a, col_b):
    for k, wk in enumerate(w):
        e = d2 * wk
        a = np.exp(-e[e <= EXP_CUT])
        out[k, col_a] += a.sum()
        out[k, col_b] += (a * a).sum()


def lscv_pair_sums(x_sorted, h_desc, reflect):
    x = np.asarray(x_sorted, dtype=float)
    h = np.asarray(h_desc, dtype=float)
    n = x.shape[0]
    w = 0.25 / (h * h)
    out = np.zeros((h.shape[0], 5))
    rows = max(1, _CHUNK // max(1, n))
    for start in range(0, n, rows):
        idx = np.arange(start, min(n, start + rows))
        diff = x[None, :] - x[idx, None]
        upper = np.arange(n)[None, :] > idx[:, None]
        _pair_block_sums(diff[upper] ** 2, w, out, 0, 1)
        if reflect:
            plus = (x[None, :] + x[idx, None])[upper] ** 2
            _pair_block_sums(plus, w, out, 2, 3)
    if reflect:
        for k, wk in enumerate(w):
            e = 4.0 * x * x * wk
            out[k, 4] = np.exp(-e[e <= EXP_CUT]).sum()
    return out


def _lam(x, y):
    d = np.abs(x - y)
    top = np.maximum(x, y)
    small = d < 1e-8
    safe = np.where(small, 1.0, d)
    return np.where(small, np.exp(0.5 * (x + y)) * (1.0 + d * d / 24.0),
                    np.exp(top) * (-np.expm1(-safe)) / safe)


def _segment_cost(va, vb, steps, delta, riemann):
    va, vb, steps = np.broadcast_arrays(np.asarray(va, float), np.asarray(vb, float),
                                        np.asarray(steps))
    out = np.zeros(va.shape)
    live = steps > 0
    if not riemann:
        out[live] = steps[live] * delta * _lam(va[live], vb[live])
        return out
    top = np.maximum(va, vb)
    c = np.abs(vb - va) / np.where(live, steps, 1)
    flat = c == 0.0
    safe_c = np.where(flat, 1.0, c)
    total = np.where(flat, (steps + 1) * np.exp(top),
                     np.exp(top) * (-np.expm1(-(steps + 1) * safe_c)) / (-np.expm1(-safe_c)))
    out[live] = delta * (total[live] - 0.5 * (np.exp(va[live]) + np.exp(vb[live])))
    return out


def concave_touch_dp(t, u, riemann):
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    n = t.shape[0]
    if n < 2:
        raise ValueError("need at least two grid points")
    delta = (t[-1] - t[0]) / (n - 1)

    with np.errstate(divide="ignore", invalid="ignore"):
        S = (u[None, :] - u[:, None]) / (t[None, :] - t[:, None])
    lower = np.tril(np.ones((n, n), dtype=bool))
    S[lower] = np.nan

    feas = np.zeros((n, n), dtype=bool)
    for i in range(n - 1):
        row = S[i, i + 1:]
        prev_min = np.concatenate(([np.inf], np.minimum.accumulate(row)[:-1]))
        feas[i, i + 1:] = row <= prev_min + 1e-12 * (1.0 + np.abs(prev_min))
    masked = np.where(lower, -np.inf, S)
    maxleft = masked.max(axis=0)
    masked = np.where(lower, np.inf, S)
    minright = masked.min(axis=1)

    best = np.full((n, n), -np.inf)
    back = np.full((n, n), -1, dtype=np.intp)
    for i in range(n - 1):
        js = np.nonzero(feas[i])[0]
        s_out = S[i, js]
        eps = 1e-12 * (1.0 + np.abs(s_out))
        if i == 0:
            start = np.zeros(js.shape[0])
        else:
            start = np.where(s_out >= maxleft[i] - eps,
                             _segment_cost(u[i] - (t[i] - t[0]) * s_out, u[i], i, delta, riemann),
                             -np.inf)
        via = np.full(js.shape[0], -np.inf)
        via_h = np.full(js.shape[0], -1, dtype=np.intp)
        hs = np.nonzero(feas[:i, i] & (best[:i, i] > -np.inf))[0]
        if hs.shape[0]:
            order = np.argsort(-S[hs, i], kind="stable")
            s_sorted = S[hs, i][order]
            b_sorted = best[hs, i][order]
            pmax = np.maximum.accumulate(b_sorted)
            # latest strict improvement wins, matching the compiled loop
            pos = np.arange(b_sorted.shape[0])
            new_max = np.concatenate(([True], b_sorted[1:] > pmax[:-1]))
            parg = np.maximum.accumulate(np.where(new_max, pos, 0))
            cnt = np.searchsorted(-s_sorted, -(s_out - eps), side="right")
            ok = cnt > 0
            at = np.maximum(cnt - 1, 0)
            via = np.where(ok, pmax[at], -np.inf)
            via_h = np.where(ok, hs[order][parg[at]], -1)
        use_via = via > start
        base = np.where(use_via, via, start)
        seg = _segment_cost(u[i], u[js], js - i, delta, riemann)
        best[i, js] = np.where(base > -np.inf, base + seg, -np.inf)
        back[i, js] = np.where(use_via, via_h, -1)

    I, J = np.nonzero(best > -np.inf)
    s = S[I, J]
    tail = _segment_cost(u[J], u[J] + (t[-1] - t[J]) * s, n - 1 - J, delta, riemann)
    ok = (J == n - 1) | (s <= minright[np.minimum(J, n - 1)] + 1e-12 * (1.0 + np.abs(s)))
    total = np.where(ok, best[I, J] + np.where(J == n - 1, 0.0, tail), -np.inf)
    k = int(np.argmax(total))
    i, j = int(I[k]), int(J[k])
    touches = [j, i]
    while back[i, j] >= 0:
        h = int(back[i, j])
        touches.append(h)
        i, j = h, i
    touches.reverse()
    return float(total[k]), np.asarray(touches, dtype=np.intp)
