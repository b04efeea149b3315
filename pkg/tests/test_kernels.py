"""Hot kernels: compiled and numpy backends against oracles and each other."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuberoot import _kernels_py
from oracles import brute_hull, brute_step_quad_max, dense_reshaped_slope, step_quad_eval

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def random_step_quad(rng, nb, concave=True):
    bk = np.sort(rng.uniform(-1, 1, nb))
    sv = rng.integers(-3, 4, nb + 1).astype(float)
    pv = np.where(rng.random(nb) < 0.5, sv[1:], sv[:-1])
    a = -rng.uniform(0.1, 5.0) if concave else 0.0
    b = rng.normal() if concave else 0.0
    return bk, sv, pv, (a, b, rng.normal())


def test_pure_step_midpoint(kernels):
    t, v = kernels.step_quad_argmax(np.array([0.0]), np.array([0.0, 1.0]), np.array([1.0]),
                                    0.0, 0.0, 0.0, -1.0, 1.0)
    assert (t, v) == (0.5, 1.0)


def test_pure_quadratic_vertex(kernels):
    # -(t - 0.3)^2 = -t^2 + 0.6 t - 0.09
    t, v = kernels.step_quad_argmax(np.empty(0), np.array([0.0]), np.empty(0),
                                    -1.0, 0.6, -0.09, -1.0, 1.0)
    assert t == pytest.approx(0.3, abs=1e-15)
    assert v == pytest.approx(0.0, abs=1e-15)


def test_leftmost_region_wins(kernels):
    # value 1 on (-inf, -0.5] and on [0.5, inf); leftmost region is [-1, -0.5]
    bk = np.array([-0.5, 0.5])
    t, v = kernels.step_quad_argmax(bk, np.array([1.0, 0.0, 1.0]), np.array([1.0, 1.0]),
                                    0.0, 0.0, 0.0, -1.0, 1.0)
    assert (t, v) == (-0.75, 1.0)


def test_isolated_point_maximum(kernels):
    t, v = kernels.step_quad_argmax(np.array([0.2]), np.array([0.0, 0.0]), np.array([2.0]),
                                    0.0, 0.0, 0.0, -1.0, 1.0)
    assert (t, v) == (0.2, 2.0)


@pytest.mark.parametrize("seed", range(10))
def test_random_instances_match_brute_force(kernels, seed):
    rng = np.random.default_rng(seed)
    for concave in (True, False):
        bk, sv, pv, quad = random_step_quad(rng, 20, concave)
        t, v = kernels.step_quad_argmax(bk, sv, pv, *quad, -1.0, 1.0)
        ref = brute_step_quad_max(bk, sv, pv, quad, (-1.0, 1.0))
        assert v >= ref - 1e-12
        assert v == pytest.approx(ref, abs=1e-12) or concave
        # v is attained at t or, for a one-sided supremum at a breakpoint, next to it
        near = step_quad_eval(bk, sv, pv, quad, [np.nextafter(t, -2), t, np.nextafter(t, 2)])
        assert np.max(near) == pytest.approx(v, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 30), finite)
def test_constant_shift_moves_value_only(seed, nb, shift):
    rng = np.random.default_rng(seed)
    bk, sv, pv, (a, b, c) = random_step_quad(rng, nb, concave=bool(seed % 2))
    t1, v1 = _kernels_py.step_quad_argmax(bk, sv, pv, a, b, c, -1.0, 1.0)
    t2, v2 = _kernels_py.step_quad_argmax(bk, sv, pv, a, b, c + shift, -1.0, 1.0)
    assert t1 == t2
    assert v2 == pytest.approx(v1 + shift, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 30))
def test_value_dominates_random_probes(seed, nb):
    rng = np.random.default_rng(seed)
    bk, sv, pv, quad = random_step_quad(rng, nb, concave=bool(seed % 2))
    _, v = _kernels_py.step_quad_argmax(bk, sv, pv, *quad, -1.0, 1.0)
    probes = np.concatenate([rng.uniform(-1, 1, 10_000), bk])
    assert v >= np.max(step_quad_eval(bk, sv, pv, quad, probes)) - 1e-12


def test_backends_agree_on_step_quad(rng):
    from cuberoot import _backend

    if _backend.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    for nb in (0, 1, 2, 5, 50, 500):
        for concave in (True, False):
            bk, sv, pv, quad = random_step_quad(rng, nb, concave)
            assert _backend.kernels.step_quad_argmax(bk, sv, pv, *quad, -1.0, 1.0) == \
                _kernels_py.step_quad_argmax(bk, sv, pv, *quad, -1.0, 1.0)


def test_compile_rows_groups_ties(kernels):
    # rows: +1 right-closed at 0, -1 left-closed at 0, +2 right-closed at 1
    bk = np.array([0.0, 0.0, 1.0])
    right = np.array([1, 0, 1], dtype=np.uint8)
    coef = np.array([1.0, -1.0, 2.0])
    ub, steps, points = kernels.compile_rows(bk, right, coef, 0.5)
    np.testing.assert_array_equal(ub, [0.0, 1.0])
    # left of 0: base + left-closed rows switched on = 0.5 - 1
    np.testing.assert_array_equal(steps, [-0.5, 1.5, 3.5])
    np.testing.assert_array_equal(points, [0.5, 3.5])


def test_compile_rows_matches_direct_sum(kernels, rng):
    n = 40
    bk = np.sort(rng.integers(-5, 6, n) / 5.0)
    right = rng.integers(0, 2, n).astype(np.uint8)
    coef = rng.integers(-2, 3, n).astype(float)
    ub, steps, points = kernels.compile_rows(bk, right, coef, 0.0)
    probes = np.concatenate([ub, ub - 0.05, ub + 0.05])
    direct = [np.sum(coef * np.where(right == 1, t >= bk, t <= bk)) for t in probes]
    np.testing.assert_array_equal(step_quad_eval(ub, steps, points, (0, 0, 0), probes), direct)


@pytest.mark.parametrize("seed", range(5))
def test_upper_hull_matches_brute_force(kernels, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 10, 60))
    y = rng.normal(size=60)
    hx, hy = kernels.upper_hull(x, y)
    bx, by = brute_hull(x, y)
    np.testing.assert_array_equal(hx, bx)
    np.testing.assert_array_equal(hy, by)


def test_upper_hull_drops_collinear_points(kernels):
    hx, _ = kernels.upper_hull(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.5, 1.0]))
    np.testing.assert_array_equal(hx, [0.0, 2.0])


def test_lcm_left_slope_at_vertex_uses_left_segment(kernels):
    x = np.array([0.0, 1.0, 2.0])
    y = np.array([0.0, 0.9, 1.0])
    assert kernels.lcm_left_slope(x, y, 1.0) == pytest.approx(0.9)
    assert kernels.lcm_left_slope(x, y, 1.5) == pytest.approx(0.1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10_000).map(lambda k: k / 100), finite), min_size=2,
                max_size=40, unique_by=lambda p: p[0]))
def test_hull_dominates_and_is_concave(points):
    pts = sorted(points)
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    hx, hy = _kernels_py.upper_hull(x, y)
    assert np.all(np.interp(x, hx, hy) >= y - 1e-9 * (1 + np.abs(y)))
    slopes = np.diff(hy) / np.diff(hx)
    assert np.all(np.diff(slopes) <= 1e-9 * (1 + np.abs(slopes[1:])))


@pytest.mark.parametrize("boot,orig,x0,fp", [
    ([0.5, 0.5], [0.5, 2.0], 1.0, -0.3),
    ([2.0, 2.0], [0.5, 2.0], 1.0, -0.3),
    ([0.5, 2.0], [0.5, 2.0], 1.0, -0.2),
    ([0.3, 1.7], [0.9, 1.4], 1.0, -0.8),
])
def test_reshaped_slope_matches_dense_grid(kernels, boot, orig, x0, fp):
    boot, orig = np.sort(boot), np.sort(orig)
    u = np.union1d(boot, orig)
    cb = np.array([np.sum(boot == v) for v in u]) / boot.size
    co = np.array([np.sum(orig == v) for v in u]) / orig.size
    Fx0 = np.mean(orig <= x0)
    fhat = 0.4
    got = kernels.reshaped_lcm_slope(u, cb - co, x0, Fx0, fhat, fp, float(u[-1]), 4)
    ref = dense_reshaped_slope(boot, orig, x0, fhat, fp, Fx0)
    assert got == pytest.approx(ref, abs=1e-4)


@pytest.mark.parametrize("seed", range(8))
def test_reshaped_slope_is_hull_slope_over_knots(kernels, seed):
    # the compiled kernel streams the knot set that the numpy helper materializes
    rng = np.random.default_rng(seed)
    x = np.sort(rng.exponential(size=30))
    boot = np.sort(rng.choice(x, 30))
    u = np.union1d(x, boot)
    dD = (np.searchsorted(boot, u, "right") - np.searchsorted(boot, u, "left")
          - np.searchsorted(x, u, "right") + np.searchsorted(x, u, "left")) / 30
    f0 = 0.35
    args = (u, dD, 1.0, float(np.mean(x <= 1.0)), f0, -0.3, float(u[-1]), 4)
    t, vals, x0_jump = _kernels_py.reshaped_knots(*args)
    assert np.all(np.diff(t) > 0)
    assert t[0] == 0.0 and t[-1] == u[-1]
    hx, _ = _kernels_py.upper_hull(t, vals)
    got = kernels.reshaped_lcm_slope(*args)
    if 1.0 in hx and not x0_jump:
        assert got == f0
    else:
        assert got == pytest.approx(_kernels_py.lcm_left_slope(t, vals, 1.0), abs=1e-12)
