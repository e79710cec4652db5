"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Each case goes through the public API with an explicit backend, so the
numbers include the same setup a user pays for.  Results are checked for
agreement before timing.
"""

import argparse
import math
import timeit

import numpy as np

from kerrchaos import SystemParams, bifurcation_scan, run_trajectory
from kerrchaos._ext import BACKEND
from kerrchaos.analysis import estimate_lyapunov


def cases(scale):
    kicks = int(20000 * scale)
    params = SystemParams(epsilon=0.505, delta_epsilon=0.001, kicks=kicks)

    def propagate(backend):
        return run_trajectory(params, backend=backend).fidelity

    def classical(backend):
        scan = bifurcation_scan(1.0, math.pi, (0.0, 0.6), int(61 * scale) or 1, transient=2000,
                                samples=500, divergence_steps=2000, backend=backend)
        # compare only regular columns: chaotic orbits amplify last-bit libm differences
        return scan.energies[scan.epsilons <= 0.25, :1]

    x = run_trajectory(SystemParams(epsilon=0.8, delta_epsilon=0.001, kicks=int(30000 * scale))).f_n

    def kantz(backend):
        return estimate_lyapunov(x, backend=backend).divergence_curve

    return {
        f"propagate  dim=128, {kicks} kicks": propagate,
        "classical  61 eps x 4500 steps": classical,
        f"kantz      m=4, n={x.size}": kantz,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply problem sizes")
    args = ap.parse_args()
    if BACKEND != "cython":
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'case':40s} {'python [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s}")
    for name, fn in cases(args.scale).items():
        ref, got = fn("python"), fn("cython")
        finite = np.isfinite(ref) & np.isfinite(got)
        assert np.allclose(ref[finite], got[finite], rtol=1e-6, atol=1e-9), name
        t_py = min(timeit.repeat(lambda: fn("python"), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fn("cython"), number=1, repeat=args.repeat))
        print(f"{name:40s} {t_py:11.3f} {t_cy:11.3f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
