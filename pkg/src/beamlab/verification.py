"""Manufactured-solution cases, convergence sweeps and observed-order fits.

Closed-form loads and boundary data are never trusted on their own: each case
carries mpmath versions of its exact solution and coefficients, and
``check_manufactured`` compares the closed forms against high-precision
numerical differentiation of the exact solution.
"""

import math
from dataclasses import dataclass, field
from functools import partial

import mpmath
import numpy as np

from .fem import CoefficientSet, l2_norm_error
from .hmol import TimeGrid, UnsteadyProblem, run
from .mesh import Mesh1D
from .steady import BoundaryData, SteadyProblem, solve_steady


class ManufacturingError(AssertionError):
    pass


@dataclass(frozen=True)
class ManufacturedCase:
    """A test problem built from a known exact solution.

    Steady cases use functions of x and a BoundaryData; unsteady cases use
    functions of (x, t), initial data p, q and end data as functions of t.
    ``oracle`` holds mpmath callables (w, r, s, j, eta) for the residual gate.
    """

    name: str
    coeffs: CoefficientSet
    length: float
    exact: object
    exact_dx: object
    load: object
    bc: object
    oracle: dict = field(repr=False)
    final_time: float = None
    exact_dt: object = None
    exact_dxt: object = None
    p: object = None
    q: object = None

    @property
    def unsteady(self):
        return self.final_time is not None

    def steady_problem(self, mesh):
        return SteadyProblem(mesh, self.coeffs, self.load, self.bc)

    def unsteady_problem(self, mesh, grid):
        a, a_tilde, b, b_tilde = self.bc
        return UnsteadyProblem(mesh, grid, self.coeffs, self.load, self.p, self.q,
                               a, a_tilde, b, b_tilde)


# phi(x) = 1 - x + sin^2 x and its derivatives, shared by both builtin cases
def _phi(x, lib=np):
    return 1 - x + lib.sin(x) ** 2


def _dphi(x):
    return -1.0 + np.sin(2 * x)


def _d2phi(x):
    return 2.0 * np.cos(2 * x)


def _d3phi(x):
    return -4.0 * np.sin(2 * x)


def _d4phi(x):
    return -8.0 * np.cos(2 * x)


def _bend_linear_r(x):
    """(r phi'')'' for r = 1 + x."""
    return 2.0 * _d3phi(x) + (1.0 + x) * _d4phi(x)


def manufacture_steady():
    """r = 1 + x, s = cos x, j = 3 with exact w = 1 - x + sin^2 x on (0, 1)."""
    coeffs = CoefficientSet(r=lambda x: 1.0 + x, s=np.cos, j=3.0, dr=1.0, ddr=0.0, dj=0.0)

    def f(x):
        return _bend_linear_r(x) + np.cos(x) * _phi(x) - 3.0 * _d2phi(x)

    bc = BoundaryData(a=_phi(0.0), a_tilde=1.0 * _d2phi(0.0),
                      b=_phi(1.0), b_tilde=2.0 * _d2phi(1.0))
    oracle = dict(w=partial(_phi, lib=mpmath), r=lambda x: 1 + x, s=mpmath.cos,
                  j=lambda x: 3, eta=lambda x: 0)
    case = ManufacturedCase("paper-steady", coeffs, 1.0, _phi, _dphi, f, bc, oracle)
    check_manufactured(case)
    return case


def manufacture_unsteady():
    """r = 1 + x, eta = 2, j = 3x, s = cos x with exact w = (1 - x + sin^2 x) sin t on (0,1) x (0,1)."""
    coeffs = CoefficientSet(r=lambda x: 1.0 + x, s=np.cos, j=lambda x: 3.0 * x, eta=2.0,
                            dr=1.0, ddr=0.0, dj=3.0)

    def spatial(x):
        # (r phi'')'' - (3x phi')' + cos(x) phi
        return _bend_linear_r(x) - 3.0 * (_dphi(x) + x * _d2phi(x)) + np.cos(x) * _phi(x)

    def g(x, t):
        return (-_phi(x) * np.sin(t) + 2.0 * _phi(x) * np.cos(t)
                + np.sin(t) * spatial(x))

    def exact(x, t):
        return _phi(x) * np.sin(t)

    def exact_dx(x, t):
        return _dphi(x) * np.sin(t)

    def exact_dt(x, t):
        return _phi(x) * np.cos(t)

    def exact_dxt(x, t):
        return _dphi(x) * np.cos(t)

    bc = (
        np.sin,
        lambda t: 2.0 * np.sin(t),
        lambda t: math.sin(1.0) ** 2 * np.sin(t),
        lambda t: 2.0 * _d2phi(1.0) * np.sin(t),
    )
    oracle = dict(w=lambda x, t: _phi(x, mpmath) * mpmath.sin(t), r=lambda x: 1 + x,
                  s=mpmath.cos, j=lambda x: 3 * x, eta=lambda x: 2)
    case = ManufacturedCase(
        "paper-unsteady", coeffs, 1.0, exact, exact_dx, g, bc, oracle,
        final_time=1.0, exact_dt=exact_dt, exact_dxt=exact_dxt,
        p=lambda x: np.zeros_like(np.asarray(x, dtype=float)), q=_phi,
    )
    check_manufactured(case)
    return case


def _diff(fn, x, n=1):
    return mpmath.diff(fn, x, n)


def _strong_form_oracle(case, x, t=None):
    """Left-hand side of the beam equation applied to the exact solution, by mpmath differentiation."""
    o = case.oracle
    if case.unsteady:
        w = lambda y: o["w"](y, t)  # noqa: E731
    else:
        w = o["w"]
    bend = _diff(lambda y: o["r"](y) * _diff(w, y, 2), x, 2)
    pull = _diff(lambda y: o["j"](y) * _diff(w, y, 1), x, 1)
    value = bend - pull + o["s"](x) * w(x)
    if case.unsteady:
        wt = lambda s: o["w"](x, s)  # noqa: E731
        value += _diff(wt, t, 2) + o["eta"](x) * _diff(wt, t, 1)
    return value


def strong_residuals(case, samples=50, seed=0):
    """Largest |closed-form load - oracle| over random sample points, plus data checks."""
    rng = np.random.default_rng(seed)
    l = case.length
    worst = 0.0
    with mpmath.workdps(40):
        for _ in range(samples):
            x = float(rng.uniform(0.0, l))
            if case.unsteady:
                t = float(rng.uniform(0.0, case.final_time))
                ref = _strong_form_oracle(case, mpmath.mpf(x), mpmath.mpf(t))
                got = case.load(np.float64(x), np.float64(t))
                w = lambda y: case.oracle["w"](y, mpmath.mpf(t))  # noqa: E731
                wt = lambda s: case.oracle["w"](mpmath.mpf(x), s)  # noqa: E731
                derivs = [
                    (case.exact_dx(x, t), _diff(w, mpmath.mpf(x), 1)),
                    (case.exact_dt(x, t), _diff(wt, mpmath.mpf(t), 1)),
                    (case.exact_dxt(x, t),
                     _diff(lambda s: _diff(lambda y: case.oracle["w"](y, s), mpmath.mpf(x), 1),
                           mpmath.mpf(t), 1)),
                    (case.q(x), _diff(lambda s: case.oracle["w"](mpmath.mpf(x), s), 0, 1)),
                    (case.p(x), case.oracle["w"](mpmath.mpf(x), 0)),
                ]
            else:
                ref = _strong_form_oracle(case, mpmath.mpf(x))
                got = case.load(np.float64(x))
                derivs = [(case.exact_dx(x), _diff(case.oracle["w"], mpmath.mpf(x), 1))]
            worst = max(worst, abs(float(got) - float(ref)))
            for closed, oracle in derivs:
                worst = max(worst, abs(float(closed) - float(oracle)))
        worst = max(worst, _boundary_residual(case))
    return worst


def _boundary_residual(case):
    o = case.oracle
    l = mpmath.mpf(case.length)
    checks = []
    if case.unsteady:
        a, a_tilde, b, b_tilde = case.bc
        for t in (0.3, 0.77, 1.0):
            tm = mpmath.mpf(t)
            w = lambda y: o["w"](y, tm)  # noqa: E731
            checks += [
                (a(t), w(0)),
                (b(t), w(l)),
                (a_tilde(t), o["r"](0) * _diff(w, 0, 2)),
                (b_tilde(t), o["r"](l) * _diff(w, l, 2)),
            ]
    else:
        w, bc = o["w"], case.bc
        checks = [
            (bc.a, w(0)),
            (bc.b, w(l)),
            (bc.a_tilde, o["r"](0) * _diff(w, 0, 2)),
            (bc.b_tilde, o["r"](l) * _diff(w, l, 2)),
        ]
    return max(abs(float(c) - float(ref)) for c, ref in checks)


def check_manufactured(case, tol=1e-8, samples=50):
    worst = strong_residuals(case, samples)
    if not worst <= tol:
        raise ManufacturingError(f"{case.name}: manufactured data disagree with the "
                                 f"exact solution by {worst:.3e} (> {tol:g})")
    return worst


def fit_order(points):
    """Least-squares slope of log(error) against log(step).

    Returns (slope, residual) with residual the largest absolute deviation in
    log space.
    """
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least two points to fit an order")
    steps = np.array([p[0] for p in pts], dtype=float)
    errs = np.array([p[1] for p in pts], dtype=float)
    if np.any(steps <= 0) or np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise ValueError("steps and errors must be positive")
    X, Y = np.log(steps), np.log(errs)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = float(np.max(np.abs(Y - (slope * X + intercept))))
    return float(slope), resid


@dataclass
class ConvergenceReport:
    """Rows of (h, tau, err_W, err_Z); tau and err_Z are None for steady studies."""

    rows: list
    norm: str
    slopes: dict = field(default_factory=dict)

    def __post_init__(self):
        # stable, so equal h keeps input order (tau sweeps)
        self.rows = sorted(self.rows, key=lambda r: -r[0])
        self.slopes = self._fit()

    @property
    def fit_variable(self):
        hs = {r[0] for r in self.rows}
        return "h" if len(hs) > 1 else "tau"

    def _fit(self):
        if len(self.rows) < 3:
            return {}
        col = 0 if self.fit_variable == "h" else 1
        out = {}
        for name, k in (("W", 2), ("Z", 3)):
            pts = [(r[col], r[k]) for r in self.rows if r[k] is not None]
            if len(pts) >= 3:
                out[name] = fit_order(pts)
        return out

    def column(self, name):
        k = {"h": 0, "tau": 1, "err_W": 2, "err_Z": 3}[name]
        return [r[k] for r in self.rows]


def run_steady_study(case, h_list):
    if len(h_list) < 3:
        raise ValueError("a steady study needs at least three mesh sizes")
    rows = []
    for h in h_list:
        mesh = Mesh1D.from_step(case.length, h)
        w_h = solve_steady(case.steady_problem(mesh))
        rows.append((float(h), None, l2_norm_error(w_h, case.exact), None))
    return ConvergenceReport(rows, "L2(0,l)")


def trajectory_errors(case, traj):
    """Per-node L2 errors of W, Z, dx W and dx Z; arrays of length N + 1."""
    errs = {"W": [], "Z": [], "dxW": [], "dxZ": []}
    for t, W, Z in zip(traj.grid.times, traj.fields_W, traj.fields_Z):
        errs["W"].append(l2_norm_error(W, lambda x: case.exact(x, t)))
        errs["Z"].append(l2_norm_error(Z, lambda x: case.exact_dt(x, t)))
        errs["dxW"].append(l2_norm_error(W, lambda x: case.exact_dx(x, t), deriv=1))
        errs["dxZ"].append(l2_norm_error(Z, lambda x: case.exact_dxt(x, t), deriv=1))
    return {k: np.array(v) for k, v in errs.items()}


def solve_case(case, h, tau):
    mesh = Mesh1D.from_step(case.length, h)
    grid = TimeGrid.from_step(case.final_time, tau)
    return run(case.unsteady_problem(mesh, grid))


def run_unsteady_study(case, pairs):
    """max over time nodes of the L2 errors in W and Z, for each (h, tau)."""
    if not pairs:
        raise ValueError("need at least one (h, tau) pair")
    rows = []
    for h, tau in pairs:
        errs = trajectory_errors(case, solve_case(case, h, tau))
        rows.append((float(h), float(tau), float(errs["W"].max()), float(errs["Z"].max())))
    return ConvergenceReport(rows, "C(0,T;L2(0,l)) at time nodes")


BUILTIN_CASES = {
    "paper-steady": manufacture_steady,
    "paper-unsteady": manufacture_unsteady,
}
