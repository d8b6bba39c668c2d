"""Compare the compiled and numpy RK4 kernels on the canonical stiff schemes.

    python benchmarks/bench_rk4.py [--cases b c] [--stop 1.0]

The step size follows ``rk4_reference`` (h * spectral radius <= 0.02), so
the stiff cases need ~1e6 steps per unit time.
"""

import argparse
import time

import numpy as np

from spinreact import _rk4_py
from spinreact.limits import canonical_operator
from spinreact.liouville import PureSpinState, multi_site_vector

try:
    from spinreact import _rk4
except ImportError:
    _rk4 = None


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", nargs="+", default=list("abcde"))
    ap.add_argument("--stop", type=float, default=0.2, help="integration end time")
    args = ap.parse_args(argv)

    if _rk4 is None:
        print("compiled kernel not built; only the numpy kernel is timed")
    print(f"{'case':<5}{'dim':>4}{'steps':>10}{'cython s':>11}{'numpy s':>10}{'speedup':>9}{'max diff':>11}")
    for case in args.cases:
        V = canonical_operator(case)
        n = V.shape[0]
        v0 = multi_site_vector(PureSpinState.superposition().density(), [1.0] + [0.0] * (n // 4 - 1))
        h = 0.02 / np.max(np.abs(np.linalg.eigvals(V)))
        times = np.array([0.0, args.stop])
        steps = int(np.ceil(args.stop / h))
        py, t_py = _timed(_rk4_py.rk4_integrate, V, v0, times, h)
        if _rk4 is not None:
            cy, t_cy = _timed(_rk4.rk4_integrate, V, v0, times, h)
            diff = np.max(np.abs(cy - py))
            print(f"{case:<5}{n:>4}{steps:>10}{t_cy:>11.3f}{t_py:>10.3f}{t_py / t_cy:>9.1f}{diff:>11.1e}")
        else:
            print(f"{case:<5}{n:>4}{steps:>10}{'-':>11}{t_py:>10.3f}{'-':>9}{'-':>11}")


if __name__ == "__main__":
    main()
