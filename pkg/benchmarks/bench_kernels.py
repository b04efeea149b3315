"""Compiled vs numpy kernels on the inputs one bootstrap replicate sees.

Run after building the extension::

    python3 benchmarks/bench_kernels.py --repeat 20
"""

import argparse
import timeit

import numpy as np

from cuberoot import _kernels_py
from cuberoot.core import substream
from cuberoot.grenander import gren_dgp, grenander_estimate
from cuberoot.maxscore import ms_dgp

try:
    from cuberoot import _kernels
except ImportError:
    _kernels = None


def cases(n):
    rng = substream(0, "bench")
    s = ms_dgp(1, n, rng)
    y, x1, x2 = s.rows.T
    order = np.argsort(-x1 / x2, kind="stable")
    bk = (-x1 / x2)[order]
    right = (x2[order] > 0).astype(np.uint8)
    w = np.bincount(rng.integers(0, n, n), minlength=n) - 1.0
    coef = (w * (2 * y - 1))[order]
    step = (bk, right, coef, 0.0, -0.5 * n * 0.2, n * 0.2, -0.1 * n, -5.0, 5.0)

    x = np.sort(rng.exponential(size=10 * n))
    hull = (np.concatenate([[0.0], x]), np.arange(10 * n + 1) / (10 * n))

    g = gren_dgp(1, n, rng)
    b = g[rng.integers(0, n, n)]
    u = np.union1d(g, b)
    dD = (np.searchsorted(np.sort(b), u, side="right") - np.searchsorted(np.sort(b), u, side="left")
          - np.searchsorted(np.sort(g), u, side="right") + np.searchsorted(np.sort(g), u, side="left")) / n
    Fx0 = float(np.mean(g <= 1.0))
    resh = (u, dD, 1.0, Fx0, grenander_estimate(g, 1.0), -0.35, float(u[-1]), 4)
    return {
        "step_quad_argmax_rows": ("step_quad_argmax_rows", step),
        "upper_hull": ("upper_hull", hull),
        "reshaped_lcm_slope": ("reshaped_lcm_slope", resh),
    }


def _flat(r):
    return np.hstack([np.ravel(v) for v in (r if isinstance(r, tuple) else (r,))])


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()
    backends = {"python": _kernels_py}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'kernel':24s} " + " ".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, (fn, a) in cases(args.n).items():
        times, results = [], []
        for mod in backends.values():
            f = getattr(mod, fn)
            results.append(f(*a))
            times.append(min(timeit.repeat(lambda: f(*a), number=1, repeat=args.repeat)))
        for r in results[1:]:
            np.testing.assert_allclose(_flat(r), _flat(results[0]), rtol=0, atol=1e-12)
        speed = f"{times[0] / times[-1]:10.1f}x" if len(times) > 1 else ""
        print(f"{name:24s} " + " ".join(f"{t * 1e6:10.1f}us" for t in times) + " " + speed)


if __name__ == "__main__":
    main()
