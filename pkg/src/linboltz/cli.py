"""Command-line interface.

Commands: ``assemble``, ``spectrum``, ``verify``, ``nu``, ``rho`` and
``kernel eval``. Exit codes: 0 success, 1 a check failed, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import eigh

from . import __version__, _backend
from . import io as lio
from . import kernels as kn
from .config import RunConfig
from .gas_models import (MixtureSpec, PolyatomicGas, linearized_kernel_basis_mix,
                         linearized_kernel_basis_poly)
from .operator import ResourceError, assemble_mix, assemble_poly, nu_mix, nu_poly
from .quadrature import build_grid
from .verify import (SUITES, nu_envelope, nullspace_analysis, rho_formula, rho_sample_check,
                     run_suite)

log = logging.getLogger("linboltz")

MATRIX_NAME = "operator.pklo"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    over = {}
    for key in ("model", "mixture_model", "N", "R", "N_refined", "seed", "out", "size_cap",
                "diagonal", "rho_samples", "n_random_f"):
        if getattr(args, key, None) is not None:
            over[key] = getattr(args, key)
    if getattr(args, "suites", None):
        over["suites"] = tuple(s.strip() for s in args.suites.split(",") if s.strip())
    return cfg.override(**over)


def _out_dir(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _vec(text: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse velocity {text!r}; expected x,y,z") from None
    if v.shape != (3,):
        raise UsageError(f"velocity {text!r} must have three components")
    return v


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_assemble(cfg: RunConfig) -> int:
    """Assemble ``L~`` and write the matrix file plus its JSON sidecar."""
    spec, model = cfg.load_model()
    grid = build_grid(cfg.N, cfg.R)
    rules = cfg.kernel_rules_obj()
    fn = assemble_poly if isinstance(spec, PolyatomicGas) else assemble_mix
    op = fn(spec, model, grid, rules, cfg.diagonal, size_cap=cfg.size_cap)
    meta = dict(op.metadata)
    meta.pop("kernel_evaluations", None)
    meta.update(model_hash=lio.model_hash(spec, model), diagonal=cfg.diagonal,
                rows=op.rows, n_components=op.n_components, format_version=lio.VERSION,
                package_version=__version__)
    path = _out_dir(cfg) / MATRIX_NAME
    lio.write_matrix(path, op.L, meta)
    print(f"wrote {path} ({op.rows}x{op.rows})")
    return EXIT_OK


def _basis_vectors(meta: dict):
    """Expected kernel vectors for a matrix whose sidecar names its model and grid."""
    kind = meta.get("kind")
    if kind not in ("polyatomic", "mixture") or "grid" not in meta:
        return None, ()
    grid = build_grid(meta["grid"]["N"], meta["grid"]["R"])
    if kind == "polyatomic":
        g = meta["gas"]
        basis = linearized_kernel_basis_poly(PolyatomicGas(g["m"], tuple(g["I"]),
                                                           tuple(g["phi"])))
    else:
        mx = meta["mixture"]
        basis = linearized_kernel_basis_mix(MixtureSpec(tuple(mx["m"]),
                                                        tuple(mx["n"])))
    vals = basis.sample(grid.nodes)
    ncomp = vals.shape[1]
    V = vals.reshape(len(vals), -1) * np.tile(np.sqrt(grid.weights), ncomp)[None, :]
    return V, basis.names


def cmd_spectrum(matrix: str, k: int, out: str, seed: int = 0) -> int:
    """Write the ``k`` smallest eigenvalues and, if the sidecar allows, a null-space report."""
    L = lio.read_matrix(matrix)
    meta = lio.read_sidecar(matrix)
    n = L.shape[0]
    if k < 1:
        raise UsageError("k must be positive")
    if k > n:
        print(f"warning: k={k} exceeds the dimension {n}; using {n}", file=sys.stderr)
        k = n
    if not np.allclose(L, L.T, rtol=0, atol=1e-12 * max(1.0, np.abs(L).max())):
        print("warning: matrix is not symmetric; using its symmetric part", file=sys.stderr)
    ev = eigh(0.5 * (L + L.T), eigvals_only=True)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    lio.write_eigen_csv(outdir / "eigenvalues.csv", ev[:k])
    report = {"matrix": str(matrix), "rows": n, "k": k, "lambda_min": float(ev[0]),
              "lambda_max": float(ev[-1])}
    V, names = _basis_vectors(meta)
    status = EXIT_OK
    if V is not None and V.shape[1] == n:
        r = nullspace_analysis(L, V, names, ev, seed)
        report["nullspace"] = {"tau": r.tau, "count_below": r.count_below,
                               "expected": r.expected, "gap_ratio": r.gap_ratio,
                               "residuals": dict(zip(names, r.residuals)),
                               "random_residual": r.random_residual, "passed": r.passed}
        print(f"null space: {r.count_below} eigenvalues below tau={r.tau:.3e} "
              f"(expected {r.expected}), gap ratio {r.gap_ratio:.3g}")
        status = EXIT_OK if r.passed else EXIT_FAIL
    _write_json(outdir / "spectrum.json", report)
    print(f"lambda_min={ev[0]:.6e} lambda_max={ev[-1]:.6e}; wrote {outdir / 'eigenvalues.csv'}")
    return status


def cmd_verify(cfg: RunConfig) -> int:
    """Run the verification suite; report.json is deterministic, timings go elsewhere."""
    outdir = _out_dir(cfg)
    rep = run_suite(cfg.suite_config(), log=log.info)
    (outdir / "report.json").write_text(rep.to_json())
    _write_json(outdir / "timings.json", rep.timings)
    print(rep.summary())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_nu(cfg: RunConfig, component: str, samples: int, xi_max: float) -> int:
    """Write ``nu`` profiles (one CSV per component) and print the envelope constants."""
    spec, model = cfg.load_model()
    if samples < 2:
        raise UsageError("samples must be at least 2")
    ncomp = spec.n_components
    comps = range(ncomp) if component == "all" else [int(component)]
    for c in comps:
        if not 0 <= c < ncomp:
            raise UsageError(f"component {c} out of range 0..{ncomp - 1}")
    xi = np.linspace(0.0, xi_max, samples)
    outdir = _out_dir(cfg)
    ok = True
    for c in comps:
        nu = nu_poly(spec, model, c, xi) if isinstance(spec, PolyatomicGas) \
            else nu_mix(spec, model, c, xi)
        path = outdir / f"nu_{c}.csv"
        lio.write_nu_csv(path, xi, nu)
        e = nu_envelope(xi, nu, (0.8 * xi_max, xi_max))
        ok = ok and e.c_minus > 0
        print(f"component {c}: c_minus={e.c_minus:.6g} c_plus={e.c_plus:.6g} "
              f"ratio={e.band_ratio:.4g} tail_variation={e.asymptotic_variation:.3g} -> {path}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_rho(m_alpha: float, m_beta: float, n: int, seed: int) -> int:
    b = rho_formula(m_alpha, m_beta)
    r = rho_sample_check(m_alpha, m_beta, n, seed)
    print(f"rho={b.rho!r}")
    print(f"min_ratio={r.min_ratio!r} tightness={r.min_ratio - r.rho:.3e}")
    print(f"violations={r.violations} energy_residual={r.max_energy_residual:.3e} samples={n}")
    return EXIT_OK if r.violations == 0 and r.max_energy_residual <= 1e-12 else EXIT_FAIL


PARTS_POLY = ("k", "k1", "k2")
PARTS_MIX = ("k", "loss", "same", "gain")


def kernel_values(spec, model, part: str, xa, xb, rules=None) -> np.ndarray:
    """Kernel tables of shape ``(P, n, n)`` for the requested part."""
    if isinstance(spec, PolyatomicGas):
        if part not in PARTS_POLY:
            raise UsageError(f"part must be one of {PARTS_POLY} for a polyatomic gas")
        k1, k2 = kn.poly_kernel_table(spec, model, xa, xb, rules)
        return {"k": k2 - k1, "k1": k1, "k2": k2}[part]
    if part not in PARTS_MIX:
        raise UsageError(f"part must be one of {PARTS_MIX} for a mixture")
    loss, same, gain = kn.mix_kernel_table(spec, model, xa, xb, rules)
    if part == "k":
        return kn.compose_mix(loss, same, gain)
    return {"loss": loss, "same": same, "gain": gain}[part]


BATCH_COLUMNS = ("i", "j", "xi_x", "xi_y", "xi_z", "xs_x", "xs_y", "xs_z")


def cmd_kernel_eval(cfg: RunConfig, part: str, i, j, xi, xi_star, batch, out) -> int:
    spec, model = cfg.load_model()
    rules = cfg.kernel_rules_obj()
    n = spec.n_components
    if batch:
        with open(batch, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or any(c not in rows[0] for c in BATCH_COLUMNS):
            raise lio.FormatError(f"{batch}: need columns {', '.join(BATCH_COLUMNS)}")
        idx = np.array([[int(r["i"]), int(r["j"])] for r in rows])
        xa = np.array([[float(r[c]) for c in BATCH_COLUMNS[2:5]] for r in rows])
        xb = np.array([[float(r[c]) for c in BATCH_COLUMNS[5:]] for r in rows])
    else:
        if None in (i, j, xi, xi_star):
            raise UsageError("give --i, --j, --xi and --xi-star, or --batch")
        idx = np.array([[i, j]])
        xa, xb = _vec(xi)[None], _vec(xi_star)[None]
    if np.any(idx < 0) or np.any(idx >= n):
        raise UsageError(f"indices must lie in 0..{n - 1}")
    vals = kernel_values(spec, model, part, xa, xb, rules)[np.arange(len(idx)), idx[:, 0],
                                                            idx[:, 1]]
    if not batch:
        print(repr(float(vals[0])))
        return EXIT_OK
    dest = Path(out) if out else Path(cfg.out) / "kernel_values.csv"
    dest.parent.mkdir(parents=True, exist_ok=True)
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BATCH_COLUMNS + (part,))
        for (a, b), p, q, v in zip(idx, xa, xb, vals):
            w.writerow([a, b, *map(repr, p.tolist()), *map(repr, q.tolist()), repr(float(v))])
    print(f"wrote {len(vals)} values to {dest}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p, model=True):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory")
    if model:
        p.add_argument("--model", help="model JSON file")


def _add_grid(p):
    p.add_argument("--N", type=int, help="grid nodes per axis (even)")
    p.add_argument("--R", type=float, help="grid half width")
    p.add_argument("--size-cap", dest="size_cap", type=int, help="maximum matrix rows")
    p.add_argument("--diagonal", choices=("local", "zero"),
                   help="treatment of the singular same-node blocks")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="linboltz", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int,
                    help=f"cap worker threads (default from ${_backend.THREADS_ENV})")
    ap.add_argument("--backend", choices=("numba", "numpy"),
                    help=f"compute backend (default from ${_backend.BACKEND_ENV})")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="assemble the discrete operator")
    _add_common(p)
    _add_grid(p)

    p = sub.add_parser("spectrum", help="smallest eigenvalues and null-space report")
    p.add_argument("matrix", help="matrix file written by 'assemble'")
    p.add_argument("--k", type=int, default=10, help="number of eigenvalues (default 10)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="run the verification suite")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--mixture-model", dest="mixture_model", help="mixture model JSON file")
    p.add_argument("--N-refined", dest="N_refined", type=int, help="refined grid for the "
                   "oracle comparison")
    p.add_argument("--seed", type=int)
    p.add_argument("--suites", help=f"comma-separated subset of {','.join(SUITES)}")
    p.add_argument("--rho-samples", dest="rho_samples", type=int)
    p.add_argument("--n-random-f", dest="n_random_f", type=int)

    p = sub.add_parser("nu", help="collision-frequency profile")
    _add_common(p)
    p.add_argument("--component", default="all", help="component index or 'all'")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--xi-max", dest="xi_max", type=float, default=10.0)

    p = sub.add_parser("rho", help="sampled check of the energy-ratio bound")
    p.add_argument("--m-alpha", dest="m_alpha", type=float, required=True)
    p.add_argument("--m-beta", dest="m_beta", type=float, required=True)
    p.add_argument("--n", type=int, default=1_000_000, help="number of samples")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("kernel", help="kernel evaluation")
    ksub = p.add_subparsers(dest="kernel_command", required=True)
    e = ksub.add_parser("eval", help="evaluate one kernel value or a CSV batch")
    _add_common(e)
    e.add_argument("--part", default="k", help="k, k1, k2 (polyatomic) or k, loss, same, "
                   "gain (mixture)")
    e.add_argument("--i", type=int)
    e.add_argument("--j", type=int)
    e.add_argument("--xi", help="x,y,z")
    e.add_argument("--xi-star", dest="xi_star", help="x,y,z")
    e.add_argument("--batch", help="CSV with columns " + ",".join(BATCH_COLUMNS))
    e.add_argument("--output", help="CSV destination for --batch")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        if args.backend:
            _backend.set_backend(args.backend)
        _backend.set_threads(args.threads)
        if args.command == "assemble":
            return cmd_assemble(_config(args))
        if args.command == "spectrum":
            return cmd_spectrum(args.matrix, args.k, args.out, args.seed)
        if args.command == "verify":
            return cmd_verify(_config(args))
        if args.command == "nu":
            return cmd_nu(_config(args), args.component, args.samples, args.xi_max)
        if args.command == "rho":
            return cmd_rho(args.m_alpha, args.m_beta, args.n, args.seed)
        return cmd_kernel_eval(_config(args), args.part, args.i, args.j, args.xi, args.xi_star,
                               args.batch, args.output)
    except (UsageError, lio.FormatError, ResourceError, ValueError, OSError, KeyError) as exc:
        print(f"linboltz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
