"""Time the numba and numpy backends on the solver kernels and a full projection.

Usage::

    python benchmarks/bench_kernels.py [--T 1/64] [--repeat 5]

Each backend is timed in a fresh subprocess so the environment switch is
clean.  Numba timings exclude the first (compiling) call.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit
from fractions import Fraction

CHILD = r"""
import json, sys, timeit
import numpy as np
from lattice_cpwl import functions, kernels, projection
from lattice_cpwl.lattice import preset

T, repeat = float(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
n = int(round(4 / T))
c = rng.standard_normal((n, n))
p_lo, p_up = rng.standard_normal((2, n - 1, n - 1, 3))
u1, u2 = rng.uniform(0, n - 1, (2, 10 * n * n))
f = functions.gaussian(0.25)
spec = preset("hexagonal", T)

cases = {
    "stencil_apply": lambda: kernels.stencil_apply(c, 1.0),
    "rhs_gather": lambda: kernels.rhs_gather(p_lo, p_up),
    "expansion_eval": lambda: kernels.expansion_eval(c, (0, 0), u1, u2),
    "project+measure": lambda: projection.measure_error(f, projection.project(f, spec)),
}
out = {}
for name, fn in cases.items():
    fn()  # warm up / compile
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run_backend(backend: str, T: float, repeat: int) -> dict:
    env = dict(os.environ, LATTICE_CPWL_BACKEND=backend)
    res = subprocess.run(
        [sys.executable, "-c", CHILD, str(T), str(repeat)], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=lambda s: float(Fraction(s)), default=1 / 64)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    start = timeit.default_timer()
    res = {b: run_backend(b, args.T, args.repeat) for b in ("numba", "numpy")}
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name in res["numba"]:
        a, b = res["numba"][name], res["numpy"][name]
        print(f"{name:<18}{a:>12.4g}{b:>12.4g}{b / a:>10.2f}")
    print(f"(T = {args.T:g}, best of {args.repeat}, wall {timeit.default_timer() - start:.1f} s)")


if __name__ == "__main__":
    main()
