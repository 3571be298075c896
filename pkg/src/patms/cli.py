"""``patms`` command line: phantom -> forward -> measure -> reconstruct -> render.

Exit codes: 0 success, 2 usage or invalid arguments, 3 file I/O failure,
4 numerical failure (including failed self-test assertions).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as afio
from .errors import DimensionMismatch
from .filters import TemporalFilterBank
from .grid import Grid2D, ScalarField2D
from .phantom import KINDS as PHANTOM_KINDS
from .phantom import PhantomSpec, make_phantom, render_image
from .recon import reconstruct_baseline_l1, reconstruct_landweber, reconstruct_multiscale
from .selftest import SUITES, run_suites
from .sensing import (CSData, MeasurementMatrix, gaussian_matrix, identity_matrix,
                      subsampling_matrix)
from .solvers import SolverConfig
from .wave import DetectorRing, TimeGrid, wave_operator

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(ValueError):
    pass


def _grid_of(values: np.ndarray) -> Grid2D:
    if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] % 2:
        raise DimensionMismatch(f"expected a square padded field, got shape {values.shape}")
    return Grid2D(values.shape[0] // 2)


def _dt(args, nx: int) -> float:
    return args.dt if args.dt is not None else 2.0 / nx


def cmd_phantom(args) -> int:
    grid = Grid2D(args.nx)
    field = make_phantom(PhantomSpec(args.kind, args.seed), grid)
    afio.write_array(args.out, field.values)
    return EXIT_OK


def cmd_forward(args) -> int:
    f = afio.read_array(args.inp)
    grid = _grid_of(f)
    op = wave_operator(grid, DetectorRing(args.detectors), TimeGrid(args.nt, _dt(args, grid.nx)))
    afio.write_array(args.out, op.forward(f))
    return EXIT_OK


def _build_matrix(args, n: int) -> MeasurementMatrix:
    if args.matrix == "subsample":
        return subsampling_matrix(n, args.factor)
    if args.matrix == "identity":
        return identity_matrix(n)
    return gaussian_matrix(args.m, n, args.seed)


def cmd_measure(args) -> int:
    g = afio.read_array(args.inp)
    if g.ndim != 2:
        raise DimensionMismatch(f"wave data must be 2D, got shape {g.shape}")
    M = _build_matrix(args, g.shape[0])
    if args.save_matrix:
        afio.write_array(args.save_matrix, M.entries)
    afio.write_array(args.out, M.apply(g))
    return EXIT_OK


def _solver_cfg(args, default_iters: int, sparse: bool) -> SolverConfig | None:
    if args.iters is None and (args.lam is None or not sparse):
        return None
    return SolverConfig(max_iters=args.iters or default_iters,
                        lam=args.lam if sparse else None)


def cmd_reconstruct(args) -> int:
    from .recon import BASELINE_ITERS, HIGH_ITERS, LOW_ITERS

    y = afio.read_array(args.y)
    if y.ndim != 2:
        raise DimensionMismatch(f"measurements must be 2D, got shape {y.shape}")
    if args.matrix:
        M = MeasurementMatrix.from_array(afio.read_array(args.matrix))
    else:
        M = subsampling_matrix(args.detectors, args.factor)
    if M.m != y.shape[0]:
        raise DimensionMismatch(f"matrix has {M.m} rows, measurements have {y.shape[0]}")
    truth = None
    nx = args.nx
    if args.truth:
        t = afio.read_array(args.truth)
        grid = _grid_of(t)
        if nx is not None and nx != grid.nx:
            raise UsageError(f"--nx {nx} disagrees with truth grid nx={grid.nx}")
        truth = ScalarField2D(grid, t)
    grid = truth.grid if truth is not None else Grid2D(nx or 100)
    data = CSData(TimeGrid(y.shape[1], _dt(args, grid.nx)), y)

    metrics: dict = {}
    if args.method == "multiscale":
        bank = TemporalFilterBank(j_max=args.scales - 1)
        cfgs = [_solver_cfg(args, LOW_ITERS if j == 0 else HIGH_ITERS, j > 0) for j in bank.scales]
        res = reconstruct_multiscale(data, M, grid, bank, cfgs, truth=truth)
        if args.save_factors:
            out_dir = Path(args.save_factors)
            out_dir.mkdir(parents=True, exist_ok=True)
            for j, fj in enumerate(res.factors.fields):
                afio.write_array(out_dir / f"factor_{j}.afb", fj.values)
        if res.rel_error is not None:
            metrics["rel_l2_error"] = res.rel_error
        for j, k in enumerate(res.factors.iterations):
            metrics[f"iters_scale_{j}"] = k
        metrics["iters_deconvolution"] = res.diagnostics["deconvolution"].iterations
    else:
        if args.save_factors:
            raise UsageError("--save-factors requires --method multiscale")
        if args.method == "l1":
            res = reconstruct_baseline_l1(data, M, grid, _solver_cfg(args, BASELINE_ITERS, True),
                                          truth=truth)
        else:
            res = reconstruct_landweber(data, M, grid, _solver_cfg(args, LOW_ITERS, False),
                                        truth=truth)
        if res.rel_error is not None:
            metrics["rel_l2_error"] = res.rel_error
        metrics["iters_scale_0"] = res.diagnostics["solve"].iterations
    metrics["method"] = res.method
    afio.write_array(args.out, res.f_hat.values)
    if args.metrics_out:
        afio.write_metrics_csv(args.metrics_out, metrics)
    return EXIT_OK


def cmd_render(args) -> int:
    v = afio.read_array(args.inp)
    if args.crop:
        v = ScalarField2D(_grid_of(v), v)
    data = render_image(v, args.norm)
    afio._atomic_write(args.out, data)
    return EXIT_OK


def cmd_selftest(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    ok = run_suites(names, args.nx)
    print("selftest:", "all checks passed" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_NUMERIC


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="patms", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("phantom", help="write a test phantom")
    s.add_argument("--out", required=True)
    s.add_argument("--kind", choices=PHANTOM_KINDS, default="disks")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--nx", type=_positive, default=100)
    s.set_defaults(func=cmd_phantom)

    s = sub.add_parser("forward", help="simulate detector traces")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--detectors", type=_positive, default=300)
    s.add_argument("--nt", type=_positive, default=200)
    s.add_argument("--dt", type=float, default=None, help="time step (default 2/nx)")
    s.set_defaults(func=cmd_forward)

    s = sub.add_parser("measure", help="apply a measurement matrix to traces")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--matrix", choices=("subsample", "gaussian", "identity"), default="subsample")
    s.add_argument("--factor", type=_positive, default=4)
    s.add_argument("--m", type=_positive, default=75)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--save-matrix", default=None)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("reconstruct", help="recover the initial pressure")
    s.add_argument("--y", required=True)
    s.add_argument("--out", required=True)
    src = s.add_mutually_exclusive_group()
    src.add_argument("--matrix", default=None, help="measurement matrix array file")
    src.add_argument("--factor", type=_positive, default=4)
    s.add_argument("--detectors", type=_positive, default=300)
    s.add_argument("--method", choices=("multiscale", "l1", "landweber"), default="multiscale")
    s.add_argument("--scales", type=_positive, default=3)
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--iters", type=_positive, default=None)
    s.add_argument("--nx", type=_positive, default=None)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--save-factors", default=None)
    s.add_argument("--metrics-out", default=None)
    s.add_argument("--truth", default=None)
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("render", help="write a 16-bit PGM image")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--norm", choices=("minmax", "symmetric"), default="minmax")
    s.add_argument("--crop", action="store_true", help="crop a padded field to the physical square")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("selftest", help="run built-in property checks")
    s.add_argument("--suite", choices=SUITES + ("all",), default="all")
    s.add_argument("--nx", type=_positive, default=64)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, afio.ArrayFileError) as exc:
        print(f"patms: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"patms: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"patms: invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
