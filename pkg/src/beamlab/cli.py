"""Command line entry point: ``beamlab <mode> --config <path> [--out <dir>] [--case <name>]``."""

import argparse
import csv
import os
import sys

import numpy as np

from .banded import SingularMatrixError
from .config import MODES, ConfigError, load_config
from .expr import ExprError
from .fem import CoefficientError, CoefficientSet
from .hmol import TimeGrid, UnsteadyProblem, run
from .mesh import Mesh1D, MeshError
from .steady import BoundaryData, SteadyProblem, solve_steady
from .verification import (
    BUILTIN_CASES,
    ManufacturingError,
    run_steady_study,
    run_unsteady_study,
    trajectory_errors,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def fmt(value):
    if value is None:
        return ""
    return f"{float(value):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])


def _or(value, default):
    return default if value is None else value


def _coefficients(cfg):
    return CoefficientSet(r=_or(cfg.r, 1.0), s=_or(cfg.s, 0.0), j=_or(cfg.j, 0.0),
                          eta=_or(cfg.eta, 0.0))


def run_steady(cfg, out):
    case = BUILTIN_CASES[cfg.case]() if cfg.case else None
    mesh = Mesh1D.uniform(case.length if case else cfg.l, cfg.elements())
    if case is not None:
        problem = case.steady_problem(mesh)
    else:
        bc = BoundaryData(_or(cfg.a, 0.0), _or(cfg.a_tilde, 0.0), _or(cfg.b, 0.0),
                          _or(cfg.b_tilde, 0.0))
        problem = SteadyProblem(mesh, _coefficients(cfg), _or(cfg.f, 0.0), bc)
    w = solve_steady(problem)
    x = np.linspace(0.0, mesh.length, cfg.sample_nx)
    cols = [x, w.eval(x), w.eval_dx(x), w.eval_dxx(x)]
    header = ["x", "w", "dx_w", "dxx_w"]
    if case is not None:
        exact = case.exact(x)
        cols += [exact, cols[1] - exact]
        header += ["exact", "error"]
    path = os.path.join(out, "solution.csv")
    _write_csv(path, header, zip(*cols))
    return [path]


def run_unsteady(cfg, out):
    case = BUILTIN_CASES[cfg.case]() if cfg.case else None
    length = case.length if case else cfg.l
    mesh = Mesh1D.uniform(length, cfg.elements())
    grid = TimeGrid(cfg.T, cfg.steps())
    if case is not None:
        problem = case.unsteady_problem(mesh, grid)
    else:
        problem = UnsteadyProblem(mesh, grid, _coefficients(cfg), _or(cfg.g, 0.0),
                                  _or(cfg.p, 0.0), _or(cfg.q, 0.0), _or(cfg.a, 0.0),
                                  _or(cfg.a_tilde, 0.0), _or(cfg.b, 0.0), _or(cfg.b_tilde, 0.0))
    traj = run(problem)
    x = np.linspace(0.0, length, cfg.sample_nx)
    times = np.linspace(0.0, grid.T, cfg.sample_nt)
    written = []
    for name, getter in (("W", traj.interp_W), ("Z", traj.interp_Z),
                         ("dxW", traj.interp_dxW), ("dxZ", traj.interp_dxZ)):
        rows = []
        for t in times:
            values = getter(x, t)
            rows.extend(zip(x, np.full_like(x, t), values))
        path = os.path.join(out, f"{name}.csv")
        _write_csv(path, ["x", "t", "value"], rows)
        written.append(path)
    if case is not None:
        errs = trajectory_errors(case, traj)
        path = os.path.join(out, "errors.csv")
        _write_csv(path, ["t", "err_W", "err_Z", "err_dxW", "err_dxZ"],
                   zip(grid.times, errs["W"], errs["Z"], errs["dxW"], errs["dxZ"]))
        written.append(path)
    return written


def _write_report(report, path):
    rows = [list(r) for r in report.rows]
    label = f"slope_vs_{report.fit_variable}"
    slope_W = report.slopes.get("W", (None, None))[0]
    slope_Z = report.slopes.get("Z", (None, None))[0]
    rows.append([label, "", slope_W, slope_Z])
    _write_csv(path, ["h", "tau", "err_W", "err_Z"], rows)


def run_converge(cfg, out):
    case = BUILTIN_CASES[cfg.case]()
    if cfg.mode == "converge-steady":
        report = run_steady_study(case, cfg.h_list)
    else:
        report = run_unsteady_study(case, cfg.pair_list)
    path = os.path.join(out, "report.csv")
    _write_report(report, path)
    return [path]


RUNNERS = {
    "steady": run_steady,
    "unsteady": run_unsteady,
    "converge-steady": run_converge,
    "converge-unsteady": run_converge,
}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems are configuration errors, not numerical ones
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _ArgumentParser(
        prog="beamlab",
        description="Hinged Euler-Bernoulli beam solver (Hermite cubic FEM + Crank-Nicolson).",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--case", help="builtin case: " + ", ".join(BUILTIN_CASES))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.mode, args.case)
    except (ConfigError, ExprError, MeshError) as exc:
        print(f"beamlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        print(f"beamlab: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = RUNNERS[args.mode](cfg, args.out)
    except ConfigError as exc:
        print(f"beamlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularMatrixError, CoefficientError, ManufacturingError, ExprError,
            ArithmeticError, ValueError) as exc:
        print(f"beamlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
