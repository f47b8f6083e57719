"""Horizontal method of lines for w_tt + eta w_t + (r w'')'' - (j w')' + s w = g.

Time is discretised first with the trapezium (Crank-Nicolson) rule applied to
the first-order system w_t = z, z_t = -eta z - L w + g. Eliminating z_{n+1}
leaves one steady beam problem per step,

    (r W'')'' + (4/tau^2 + 2 eta/tau + s) W - (j W')'
        = -(r W_n'')'' + (4/tau^2 + 2 eta/tau - s) W_n + (j W_n')'
          + (4/tau) Z_n + G_n + G_{n+1},

followed by Z_{n+1} = (2/tau)(W_{n+1} - W_n) - Z_n.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .banded import lu_factor
from .fem import (
    MASS_ORDER,
    CoefficientError,
    CoefficientSet,
    HermiteField,
    as_function,
    assemble_mass,
    assemble_operator,
    essential_rows,
    l2_project,
    load_vector,
)
from .mesh import OutOfRangeError


class TimeGrid:
    """Uniform partition t_n = (n - 1) tau, n = 1..N+1, of [0, T]."""

    def __init__(self, T, N):
        if T <= 0:
            raise ValueError("final time must be positive")
        if int(N) != N or N < 1:
            raise ValueError("number of steps must be a positive integer")
        self.T = float(T)
        self.N = int(N)
        self.tau = self.T / self.N

    @classmethod
    def from_step(cls, T, tau):
        count = T / tau
        N = int(round(count))
        if N < 1 or abs(count - N) > 1e-9 * max(1.0, count):
            raise ValueError(f"tau={tau!r} does not divide T={T!r} evenly")
        return cls(T, N)

    @property
    def times(self):
        t = self.tau * np.arange(self.N + 1)
        t[-1] = self.T
        return t

    def __repr__(self):
        return f"TimeGrid(T={self.T!r}, N={self.N})"


def _time_function(value):
    if callable(value):
        return value
    c = float(value)
    return lambda t: c


@dataclass(frozen=True)
class UnsteadyProblem:
    """Beam problem with rho = 1, load g(x, t), initial data p, q and end data a, a~, b, b~ in t."""

    mesh: object
    grid: TimeGrid
    coeffs: CoefficientSet
    g: object
    p: object
    q: object
    a: object = 0.0
    a_tilde: object = 0.0
    b: object = 0.0
    b_tilde: object = 0.0

    def __post_init__(self):
        x = np.array([0.0, 0.5, 1.0]) * self.mesh.length
        if not np.allclose(np.asarray(self.coeffs.rho(x), dtype=float), 1.0, rtol=0, atol=0):
            raise CoefficientError("only unit density rho = 1 is supported")
        for name in ("p", "q"):
            object.__setattr__(self, name, as_function(getattr(self, name)))
        g = self.g
        if not callable(g):
            c = float(g)
            g = lambda x, t: np.full(np.shape(x), c)  # noqa: E731
        object.__setattr__(self, "g", g)
        for name in ("a", "a_tilde", "b", "b_tilde"):
            object.__setattr__(self, name, _time_function(getattr(self, name)))
        l = self.mesh.length
        if abs(float(self.p(np.array(0.0))) - self.a(0.0)) > 1e-10 or \
                abs(float(self.p(np.array(l))) - self.b(0.0)) > 1e-10:
            warnings.warn("initial displacement is incompatible with the end displacements at t = 0",
                          stacklevel=2)


class Trajectory:
    """Fields W_{h,n}, Z_{h,n} at every time node, linear in t between nodes."""

    def __init__(self, grid, fields_W, fields_Z):
        if len(fields_W) != grid.N + 1 or len(fields_Z) != grid.N + 1:
            raise ValueError("trajectory needs one field per time node")
        self.grid = grid
        self.fields_W = tuple(fields_W)
        self.fields_Z = tuple(fields_Z)

    def _bracket(self, t):
        T, tau = self.grid.T, self.grid.tau
        if t < 0.0 or t > T * (1 + 1e-14):
            raise OutOfRangeError(f"t={t!r} outside [0, {T!r}]")
        n = min(int(t // tau), self.grid.N - 1)
        t0 = self.grid.times[n]
        t1 = self.grid.times[n + 1]
        return n, (t - t0) / (t1 - t0)

    def _interp(self, fields, x, t, deriv):
        n, theta = self._bracket(float(t))
        lo = fields[n].evaluate(x, deriv)
        if theta == 0.0:
            return lo
        hi = fields[n + 1].evaluate(x, deriv)
        if theta == 1.0:
            return hi
        return (1.0 - theta) * lo + theta * hi

    def interp_W(self, x, t):
        return self._interp(self.fields_W, x, t, 0)

    def interp_Z(self, x, t):
        return self._interp(self.fields_Z, x, t, 0)

    def interp_dxW(self, x, t):
        return self._interp(self.fields_W, x, t, 1)

    def interp_dxZ(self, x, t):
        return self._interp(self.fields_Z, x, t, 1)


def initialize(problem):
    """L2 projections of the initial displacement and velocity."""
    return l2_project(problem.mesh, problem.p), l2_project(problem.mesh, problem.q)


class CNStepper:
    """Crank-Nicolson stepping operator, assembled and factored once."""

    def __init__(self, problem):
        mesh, c = problem.mesh, problem.coeffs
        tau = problem.grid.tau
        if tau <= 0:
            raise ValueError("time step must be positive")
        self.problem = problem
        self.tau = tau
        k = 4.0 / tau**2
        s_tilde = lambda x: k + (2.0 / tau) * c.eta(x) + c.s(x)  # noqa: E731
        s_back = lambda x: k + (2.0 / tau) * c.eta(x) - c.s(x)  # noqa: E731
        lhs = assemble_operator(mesh, c, s_override=s_tilde)
        # bending and traction parts act on W_n with a minus sign
        self.stiff = assemble_operator(mesh, c, s_override=0.0)
        self.back_mass = assemble_mass(mesh, s_back)
        self.mass = assemble_mass(mesh)
        self.first, self.last = essential_rows(mesh)
        lhs.set_unit_row(self.first)
        lhs.set_unit_row(self.last)
        self.lu = lu_factor(lhs)

    def rhs(self, n, W_prev, Z_prev, load=None):
        """Right-hand side for advancing from t_n (0-based n) to t_{n+1}."""
        p = self.problem
        t = p.grid.times
        t0, t1 = t[n], t[n + 1]
        w, z = W_prev.dofs, Z_prev.dofs
        b = (self.back_mass.matvec(w) - self.stiff.matvec(w)
             + (4.0 / self.tau) * self.mass.matvec(z))
        if load is None:
            load = load_vector(p.mesh, lambda x: p.g(x, t0) + p.g(x, t1), MASS_ORDER)
        b += load
        # natural moment terms from both time levels
        b[1] -= p.a_tilde(t1) + p.a_tilde(t0)
        b[-1] += p.b_tilde(t1) + p.b_tilde(t0)
        b[self.first] = p.a(t1)
        b[self.last] = p.b(t1)
        return b

    def step(self, n, W_prev, Z_prev):
        W = self.lu.solve(self.rhs(n, W_prev, Z_prev))
        Z = (2.0 / self.tau) * (W - W_prev.dofs) - Z_prev.dofs
        mesh = self.problem.mesh
        return HermiteField(mesh, W), HermiteField(mesh, Z)


def cn_step(problem, n, W_prev, Z_prev):
    """Advance one step from t_n to t_{n+1}; n counts from 1 as t_1 = 0."""
    if not 1 <= n <= problem.grid.N:
        raise ValueError(f"step index {n} outside 1..{problem.grid.N}")
    return CNStepper(problem).step(n - 1, W_prev, Z_prev)


def run(problem, reuse=True):
    """Full trajectory: projection of the initial data, then N Crank-Nicolson steps.

    With ``reuse=False`` the stepping operator is rebuilt at every step
    (for checking that reuse changes nothing).
    """
    W, Z = initialize(problem)
    Ws, Zs = [W], [Z]
    stepper = CNStepper(problem)
    for n in range(problem.grid.N):
        if not reuse:
            stepper = CNStepper(problem)
        W, Z = stepper.step(n, W, Z)
        Ws.append(W)
        Zs.append(Z)
    return Trajectory(problem.grid, Ws, Zs)
