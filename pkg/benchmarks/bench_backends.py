#!/usr/bin/env python3
"""Compare the numba and pure-numpy backends on the hot kernels.

Each case is run once per backend as warm-up (numba compiles on first call,
results are cached on disk afterwards), then timed over ``--repeats`` runs.
The two backends must agree to rounding; the maximum relative difference is
reported next to the timings.

    python3 benchmarks/bench_backends.py [--repeats 3] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from linboltz import _backend
from linboltz import kernels as kn
from linboltz.cross_sections import MixHardSphere, PolyHardSphere
from linboltz.gas_models import (DistributionField, MixtureSpec, PolyatomicGas,
                                 maxwellian_field_poly)
from linboltz.operator import (WeakRules, apply_Q_poly, assemble_poly, nu_poly,
                               weak_moment_poly)
from linboltz.quadrature import build_grid

GAS = PolyatomicGas(1.0, (0.0, 1.0), (1.0, 1.0))
MIX = MixtureSpec((4.0, 1.0), (1.0, 1.0))


def _pairs(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, 3)) * 1.5, rng.normal(size=(n, 3)) * 1.5


def case_poly_kernels():
    xa, xb = _pairs(2000)
    return np.stack(kn.poly_kernel_table(GAS, PolyHardSphere(1.0), xa, xb))


def case_mix_kernels():
    xa, xb = _pairs(2000, 1)
    return np.stack(kn.mix_kernel_table(MIX, MixHardSphere(1.0), xa, xb))


def case_nu():
    return nu_poly(GAS, PolyHardSphere(1.0), 1, np.linspace(0.0, 10.0, 50))


def case_strong_q():
    f = maxwellian_field_poly(GAS) + DistributionField.gaussian(2, [0, 1], [0.02, 0.03],
                                                               [0.8, 0.6])
    xi = np.array([[0.3, 0.0, 0.0], [1.0, 0.5, 0.0]])
    return apply_Q_poly(GAS, PolyHardSphere(1.0), f, xi, 0)


def case_weak():
    f = maxwellian_field_poly(GAS) + DistributionField.gaussian(2, [0, 1], [0.02, 0.03],
                                                               [0.8, 0.6])
    w = weak_moment_poly(GAS, PolyHardSphere(1.0), f, (0.0, 0.0, 0.0, 1.0),
                         WeakRules(3, 3, 4.0, 12.0, 4, 4))
    return np.array([w.value, w.scale])


def case_assemble():
    return assemble_poly(GAS, PolyHardSphere(1.0), build_grid(4, 4.0)).L


CASES = {
    "poly kernel table (2000 pairs)": case_poly_kernels,
    "mixture kernel table (2000 pairs)": case_mix_kernels,
    "collision frequency (50 speeds)": case_nu,
    "strong-form Q (2 points)": case_strong_q,
    "weak-form moment": case_weak,
    "assemble N=4": case_assemble,
}


def _time(fn, repeats):
    fn()  # warm-up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out, float)


def run(repeats: int = 3, cases=None):
    rows = []
    for name, fn in CASES.items():
        if cases and not any(c in name for c in cases):
            continue
        res = {}
        for backend in ("numba", "numpy"):
            with _backend.use_backend(backend):
                res[backend] = _time(fn, repeats)
        a, b = res["numba"][1], res["numpy"][1]
        diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))
        rows.append({"case": name, "numba_s": res["numba"][0], "numpy_s": res["numpy"][0],
                     "speedup": res["numpy"][0] / res["numba"][0], "max_rel_diff": diff})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--threads", type=int, help="numba worker cap")
    ap.add_argument("--case", action="append", help="substring filter on case names")
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)
    if not _backend.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    threads = _backend.set_threads(args.threads)
    rows = run(args.repeats, args.case)
    print(f"threads={threads}")
    print(f"{'case':36s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'rel diff':>9s}")
    for r in rows:
        print(f"{r['case']:36s} {r['numba_s']:10.4f} {r['numpy_s']:10.4f} "
              f"{r['speedup']:8.1f} {r['max_rel_diff']:9.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"threads": threads, "results": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
