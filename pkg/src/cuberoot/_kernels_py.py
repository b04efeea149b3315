"""Pure-Python/numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable (or when
``CUBEROOT_PURE_PYTHON=1``).  Signatures and results match the Cython
module; the test suite runs both side by side.
"""

from __future__ import annotations

import numpy as np

LEFT_LIMIT_OFFSET = 1e-12


def step_quad_argmax(bk, step_values, point_values, a, b, c, lo, hi):
    """Global maximizer of a step function plus ``a*t**2 + b*t + c`` on [lo, hi].

    ``bk`` holds strictly increasing breakpoints in ``[lo, hi]``;
    ``step_values[j]`` is the value on the open interval left of ``bk[j]``
    (the last entry covers the interval right of ``bk[-1]``) and
    ``point_values[j]`` the value attained at ``bk[j]`` itself.
    """
    bk = np.asarray(bk, dtype=np.float64)
    s = np.asarray(step_values, dtype=np.float64)
    p = np.asarray(point_values, dtype=np.float64)
    k = bk.shape[0]
    lefts = np.empty(k + 1)
    rights = np.empty(k + 1)
    lefts[0] = lo
    lefts[1:] = bk
    rights[:k] = bk
    rights[k] = hi
    keep = rights > lefts
    # a degenerate first/last interval (breakpoint on the domain edge) is empty
    if k:
        keep[1:k] = True

    if a == 0.0 and b == 0.0:
        # interleave intervals and breakpoints in left-to-right order
        vals = np.full(2 * k + 1, -np.inf)
        vals[0::2] = np.where(keep, s, -np.inf)
        vals[1::2] = p
        pl = np.empty(2 * k + 1)
        pr = np.empty(2 * k + 1)
        pl[0::2] = lefts
        pr[0::2] = rights
        pl[1::2] = bk
        pr[1::2] = bk
        vmax = vals.max()
        eq = vals == vmax
        first = int(np.argmax(eq))
        tail = eq[first:]
        if tail.all():
            last = 2 * k
        else:
            last = first + int(np.argmin(tail)) - 1
        return 0.5 * (float(pl[first]) + float(pr[last])), float(vmax) + c

    if a < 0.0:
        vertex = -b / (2.0 * a)
        t_int = np.clip(vertex, lefts, rights)
    elif b > 0.0:
        t_int = rights.copy()
    else:
        t_int = lefts.copy()
    v_int = s + (a * t_int + b) * t_int + c
    v_int = np.where(keep, v_int, -np.inf)
    v_pt = p + (a * bk + b) * bk + c

    t_all = np.empty(2 * k + 1)
    v_all = np.empty(2 * k + 1)
    t_all[0::2] = t_int
    v_all[0::2] = v_int
    t_all[1::2] = bk
    v_all[1::2] = v_pt
    i = int(np.argmax(v_all))  # first maximum == smallest t
    return float(t_all[i]), float(v_all[i])


def compile_rows(bk_rows, right_rows, coef_rows, base):
    """Merge per-row indicator breakpoints into canonical step form.

    Row ``i`` contributes ``coef_rows[i]`` on ``t >= bk_rows[i]`` when
    ``right_rows[i]`` is true and on ``t <= bk_rows[i]`` otherwise.  Rows
    must be sorted by breakpoint.  ``base`` is the constant contribution of
    rows without a breakpoint in the domain.
    """
    bk_rows = np.asarray(bk_rows, dtype=np.float64)
    right = np.asarray(right_rows, dtype=bool)
    coef = np.asarray(coef_rows, dtype=np.float64)
    n = bk_rows.shape[0]
    if n == 0:
        empty = np.empty(0)
        return empty, np.array([float(base)]), empty
    starts = np.empty(n, dtype=bool)
    starts[0] = True
    np.not_equal(bk_rows[1:], bk_rows[:-1], out=starts[1:])
    gid = np.cumsum(starts) - 1
    k = int(gid[-1]) + 1
    up = np.bincount(gid, weights=np.where(right, coef, 0.0), minlength=k)
    down = np.bincount(gid, weights=np.where(right, 0.0, coef), minlength=k)
    s0 = float(base) + float(np.sum(np.where(right, 0.0, coef)))
    steps = np.empty(k + 1)
    steps[0] = s0
    steps[1:] = s0 + np.cumsum(up - down)
    points = steps[:-1] + up
    return bk_rows[starts], steps, points


def step_quad_argmax_rows(bk_rows, right_rows, coef_rows, base, a, b, c, lo, hi):
    """Row-level front end to :func:`step_quad_argmax`."""
    bk, steps, points = compile_rows(bk_rows, right_rows, coef_rows, base)
    return step_quad_argmax(bk, steps, points, a, b, c, lo, hi)


def upper_hull(x, y):
    """Vertices of the upper concave hull of points with increasing ``x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    hx: list[float] = []
    hy: list[float] = []
    for xi, yi in zip(x.tolist(), y.tolist()):
        while len(hx) >= 2 and (
            (hx[-1] - hx[-2]) * (yi - hy[-2]) - (hy[-1] - hy[-2]) * (xi - hx[-2]) >= 0.0
        ):
            hx.pop()
            hy.pop()
        hx.append(xi)
        hy.append(yi)
    return np.array(hx), np.array(hy)


def hull_left_slope(hx, hy, x0):
    """Slope of the hull segment ``(hx[i], hx[i+1]]`` containing ``x0``."""
    i = int(np.searchsorted(hx, x0, side="left")) - 1
    return float((hy[i + 1] - hy[i]) / (hx[i + 1] - hx[i]))


def lcm_left_slope(x, y, x0):
    hx, hy = upper_hull(x, y)
    return hull_left_slope(hx, hy, x0)


def reshaped_knots(u, dD, x0, F0, f0, fp, xmax, K):
    """Knot set and values of the reshaped CDF used for its hull.

    ``u`` are the sorted jump locations of the step part ``D`` and ``dD``
    the jump sizes.  The smooth part is ``F0 + f0*(t-x0) + fp*(t-x0)**2/2``.
    Returns ``(t, values, is_jump_at_x0)``.
    """
    u = np.asarray(u, dtype=np.float64)
    dD = np.asarray(dD, dtype=np.float64)
    extras = [0.0, x0]
    if fp < 0.0:
        vtx = x0 - f0 / fp
        if 0.0 < vtx < xmax:
            extras.append(vtx)
    g = np.union1d(u[u <= xmax], np.array(extras))
    g = g[(g >= 0.0) & (g <= xmax)]
    Dcum = np.cumsum(dD)
    pos = np.searchsorted(u, g, side="right") - 1
    Dg = np.where(pos >= 0, Dcum[np.maximum(pos, 0)], 0.0)
    j = np.searchsorted(u, g, side="left")
    is_jump = (j < u.shape[0]) & (u[np.minimum(j, u.shape[0] - 1)] == g)

    m = g.shape[0]
    gl = g[:-1]
    gap = g[1:] - gl
    cols = np.full((m - 1, K + 1), np.nan)
    cols[:, 0] = gl
    if K > 1:
        i = np.arange(1, K, dtype=np.float64)
        cols[:, 1:K] = gl[:, None] + (gap[:, None] * i[None, :]) / K
    last_interior = cols[:, K - 1] if K > 1 else gl
    ll = g[1:] - LEFT_LIMIT_OFFSET
    use_ll = is_jump[1:] & (ll > last_interior)
    cols[:, K] = np.where(use_ll, ll, np.nan)
    dvals = np.repeat(Dg[:-1, None], K + 1, axis=1)

    t = np.concatenate([cols.ravel(), g[-1:]])
    dv = np.concatenate([dvals.ravel(), Dg[-1:]])
    ok = ~np.isnan(t)
    t = t[ok]
    dv = dv[ok]
    z = t - x0
    vals = dv + (F0 + f0 * z + 0.5 * fp * z * z)
    x0_jump = bool(is_jump[np.searchsorted(g, x0)])
    return t, vals, x0_jump


def reshaped_lcm_slope(u, dD, x0, F0, f0, fp, xmax, K):
    """Left derivative at ``x0`` of the concave majorant of the reshaped CDF.

    When ``x0`` is a contact point of the majorant and the step part has no
    jump there, the majorant is tangent to the smooth part and the exact
    answer ``f0`` is returned instead of the adjacent chord slope.
    """
    t, vals, x0_jump = reshaped_knots(u, dD, x0, F0, f0, fp, xmax, K)
    hx, hy = upper_hull(t, vals)
    i = int(np.searchsorted(hx, x0, side="left"))
    if not x0_jump and i < hx.shape[0] and hx[i] == x0:
        return float(f0)
    return float((hy[i] - hy[i - 1]) / (hx[i] - hx[i - 1]))
