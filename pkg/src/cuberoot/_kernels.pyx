# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: step-plus-quadratic argmax and concave hulls.

Mirrors ``_kernels_py`` function for function.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double LEFT_LIMIT_OFFSET = 1e-12


cdef inline double _q(double a, double b, double c, double t) noexcept nogil:
    return (a * t + b) * t + c


cdef void _argmax_canonical(const double* bk, const double* s, const double* p,
                            Py_ssize_t k, double a, double b, double c,
                            double lo, double hi,
                            double* t_out, double* v_out) noexcept nogil:
    cdef Py_ssize_t j
    cdef double left, right, v, t, best, run_lo, run_hi, vertex
    cdef bint run_open = False
    cdef bint have = False
    best = 0.0
    run_lo = lo
    run_hi = lo

    if a == 0.0 and b == 0.0:
        # pieces in order: I_0, P_0, I_1, ..., P_{k-1}, I_k
        for j in range(k + 1):
            left = lo if j == 0 else bk[j - 1]
            right = hi if j == k else bk[j]
            if right > left or (j > 0 and j < k):
                v = s[j]
                if not have or v > best:
                    best = v
                    run_lo = left
                    run_hi = right
                    run_open = True
                    have = True
                elif v == best and run_open:
                    run_hi = right
                else:
                    run_open = False
            else:
                run_open = False
            if j < k:
                v = p[j]
                if not have or v > best:
                    best = v
                    run_lo = bk[j]
                    run_hi = bk[j]
                    run_open = True
                    have = True
                elif v == best and run_open:
                    run_hi = bk[j]
                else:
                    run_open = False
        t_out[0] = 0.5 * (run_lo + run_hi)
        v_out[0] = best + c
        return

    if a < 0.0:
        vertex = -b / (2.0 * a)
    for j in range(k + 1):
        left = lo if j == 0 else bk[j - 1]
        right = hi if j == k else bk[j]
        if right > left or (j > 0 and j < k):
            if a < 0.0:
                t = vertex
                if t < left:
                    t = left
                elif t > right:
                    t = right
            elif b > 0.0:
                t = right
            else:
                t = left
            v = s[j] + _q(a, b, c, t)
            if not have or v > best:
                best = v
                run_lo = t
                have = True
        if j < k:
            t = bk[j]
            v = p[j] + _q(a, b, c, t)
            if not have or v > best:
                best = v
                run_lo = t
                have = True
    t_out[0] = run_lo
    v_out[0] = best


def step_quad_argmax(bk, step_values, point_values, double a, double b,
                     double c, double lo, double hi):
    cdef const double[::1] bkv = np.ascontiguousarray(bk, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(step_values, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(point_values, dtype=np.float64)
    cdef Py_ssize_t k = bkv.shape[0]
    cdef double t = 0.0, v = 0.0
    cdef double dummy = 0.0
    if sv.shape[0] != k + 1 or pv.shape[0] != k:
        raise ValueError("step_values must have len(bk)+1 and point_values len(bk) entries")
    with nogil:
        _argmax_canonical(&bkv[0] if k > 0 else &dummy, &sv[0],
                          &pv[0] if k > 0 else &dummy,
                          k, a, b, c, lo, hi, &t, &v)
    return t, v


def compile_rows(bk_rows, right_rows, coef_rows, double base):
    cdef const double[::1] bk = np.ascontiguousarray(bk_rows, dtype=np.float64)
    cdef const cnp.uint8_t[::1] right = np.ascontiguousarray(right_rows, dtype=np.uint8)
    cdef const double[::1] coef = np.ascontiguousarray(coef_rows, dtype=np.float64)
    cdef Py_ssize_t n = bk.shape[0]
    ubk = np.empty(n, dtype=np.float64)
    steps = np.empty(n + 1, dtype=np.float64)
    points = np.empty(n, dtype=np.float64)
    cdef double[::1] ub = ubk
    cdef double[::1] st = steps
    cdef double[::1] pt = points
    cdef Py_ssize_t k
    with nogil:
        k = _compile(&bk[0] if n > 0 else NULL, &right[0] if n > 0 else NULL,
                     &coef[0] if n > 0 else NULL, n, base, &ub[0] if n > 0 else NULL,
                     &st[0], &pt[0] if n > 0 else NULL)
    return ubk[:k], steps[:k + 1], points[:k]


cdef Py_ssize_t _compile(const double* bk, const cnp.uint8_t* right, const double* coef,
                         Py_ssize_t n, double base, double* ub, double* st,
                         double* pt) noexcept nogil:
    cdef Py_ssize_t i, k = 0
    cdef double s0 = base, cur, up, down
    for i in range(n):
        if not right[i]:
            s0 += coef[i]
    st[0] = s0
    cur = s0
    i = 0
    while i < n:
        up = 0.0
        down = 0.0
        ub[k] = bk[i]
        while i < n and bk[i] == ub[k]:
            if right[i]:
                up += coef[i]
            else:
                down += coef[i]
            i += 1
        pt[k] = cur + up
        cur = cur + (up - down)
        st[k + 1] = cur
        k += 1
    return k


def step_quad_argmax_rows(bk_rows, right_rows, coef_rows, double base,
                          double a, double b, double c, double lo, double hi):
    cdef const double[::1] bk = np.ascontiguousarray(bk_rows, dtype=np.float64)
    cdef const cnp.uint8_t[::1] right = np.ascontiguousarray(right_rows, dtype=np.uint8)
    cdef const double[::1] coef = np.ascontiguousarray(coef_rows, dtype=np.float64)
    cdef Py_ssize_t n = bk.shape[0]
    cdef Py_ssize_t k
    cdef double t = 0.0, v = 0.0
    cdef double* buf = <double*> malloc((3 * n + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            k = _compile(&bk[0] if n > 0 else NULL, &right[0] if n > 0 else NULL,
                         &coef[0] if n > 0 else NULL, n, base,
                         buf, buf + n, buf + 2 * n + 1)
            _argmax_canonical(buf, buf + n, buf + 2 * n + 1, k, a, b, c, lo, hi, &t, &v)
    finally:
        free(buf)
    return t, v


cdef inline bint _pop(double x0, double y0, double x1, double y1,
                      double x2, double y2) noexcept nogil:
    return (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0) >= 0.0


cdef Py_ssize_t _push(double* hx, double* hy, Py_ssize_t h,
                      double x, double y) noexcept nogil:
    while h >= 2 and _pop(hx[h - 2], hy[h - 2], hx[h - 1], hy[h - 1], x, y):
        h -= 1
    hx[h] = x
    hy[h] = y
    return h + 1


def upper_hull(x, y):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i, h = 0
    hx = np.empty(n, dtype=np.float64)
    hy = np.empty(n, dtype=np.float64)
    cdef double[::1] hxv = hx
    cdef double[::1] hyv = hy
    with nogil:
        for i in range(n):
            h = _push(&hxv[0], &hyv[0], h, xv[i], yv[i])
    return hx[:h].copy(), hy[:h].copy()


def hull_left_slope(hx, hy, double x0):
    i = int(np.searchsorted(hx, x0, side="left")) - 1
    return float((hy[i + 1] - hy[i]) / (hx[i + 1] - hx[i]))


def lcm_left_slope(x, y, double x0):
    hx, hy = upper_hull(x, y)
    return hull_left_slope(hx, hy, x0)


cdef inline double _smooth(double t, double x0, double F0, double f0, double fp) noexcept nogil:
    cdef double z = t - x0
    return F0 + f0 * z + 0.5 * fp * z * z


def reshaped_lcm_slope(u, dD, double x0, double F0, double f0, double fp,
                       double xmax, int K):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(dD, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0]
    cdef double extras[3]
    cdef Py_ssize_t ne = 2
    extras[0] = 0.0
    extras[1] = x0
    cdef double vtx
    if fp < 0.0:
        vtx = x0 - f0 / fp
        if 0.0 < vtx < xmax:
            extras[2] = vtx
            ne = 3
            if vtx < x0:
                extras[2] = x0
                extras[1] = vtx
    cdef Py_ssize_t cap = (n + 4) * (K + 1) + 2
    cdef double* hx = <double*> malloc(2 * cap * sizeof(double))
    if hx == NULL:
        raise MemoryError()
    cdef double* hy = hx + cap
    cdef Py_ssize_t h = 0, iu = 0, ie = 0, i
    cdef double D = 0.0, g, gprev = 0.0, Dprev = 0.0, t, gap, last, ll
    cdef bint jump, first = True, x0_jump = False, x0_vertex = False
    cdef double slope
    with nogil:
        # absorb jumps at or below zero into the starting level
        while True:
            # next base knot: merge of u (<= xmax) and extras, deduplicated
            if iu < n and uv[iu] <= xmax and (ie >= ne or uv[iu] <= extras[ie]):
                g = uv[iu]
            elif ie < ne:
                g = extras[ie]
            else:
                break
            jump = False
            while iu < n and uv[iu] == g:
                D += dv[iu]
                iu += 1
                jump = True
            while ie < ne and extras[ie] == g:
                ie += 1
            while iu < n and uv[iu] < 0.0:
                D += dv[iu]
                iu += 1
            if g < 0.0 or g > xmax:
                continue
            if not first:
                gap = g - gprev
                last = gprev
                for i in range(1, K):
                    t = gprev + (gap * i) / K
                    h = _push(hx, hy, h, t, Dprev + _smooth(t, x0, F0, f0, fp))
                    last = t
                if jump:
                    ll = g - LEFT_LIMIT_OFFSET
                    if ll > last:
                        h = _push(hx, hy, h, ll, Dprev + _smooth(ll, x0, F0, f0, fp))
            h = _push(hx, hy, h, g, D + _smooth(g, x0, F0, f0, fp))
            if g == x0:
                x0_jump = jump
            first = False
            gprev = g
            Dprev = D
    try:
        i = 0
        while i < h and hx[i] < x0:
            i += 1
        if i == 0 or i >= h:
            raise ValueError("x0 must lie strictly inside the knot range")
        if hx[i] == x0 and not x0_jump:
            return f0
        return (hy[i] - hy[i - 1]) / (hx[i] - hx[i - 1])
    finally:
        free(hx)

