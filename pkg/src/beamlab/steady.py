"""Stationary hinged beam: (r w'')'' + s w - (j w')' = f on (0, l)."""

from dataclasses import dataclass

import numpy as np

from .fem import (
    STIFFNESS_ORDER,
    AssembledSystem,
    CapabilityError,
    CoefficientSet,
    HermiteField,
    apply_essential_bc,
    as_function,
    assemble_load,
    assemble_operator,
)


@dataclass(frozen=True)
class BoundaryData:
    """Hinged-end data: displacements a, b and moments a_tilde = r(0)w''(0), b_tilde = r(l)w''(l)."""

    a: float = 0.0
    a_tilde: float = 0.0
    b: float = 0.0
    b_tilde: float = 0.0


@dataclass(frozen=True)
class SteadyProblem:
    mesh: object
    coeffs: CoefficientSet
    f: object
    bc: BoundaryData = BoundaryData()

    def __post_init__(self):
        object.__setattr__(self, "f", as_function(self.f))


def solve_steady(problem, load_order=STIFFNESS_ORDER):
    mesh, bc = problem.mesh, problem.bc
    R = assemble_operator(mesh, problem.coeffs)
    C = assemble_load(mesh, problem.f, bc.a_tilde, bc.b_tilde, order=load_order)
    system = apply_essential_bc(AssembledSystem(R, C), bc.a, bc.b)
    return HermiteField(mesh, system.solve())


class Cubic:
    """Cubic polynomial c0 + c1 x + c2 x^2 + c3 x^3, callable with derivatives."""

    def __init__(self, coefs):
        self.coefs = np.asarray(coefs, dtype=float)

    def __call__(self, x, deriv=0):
        p = np.polynomial.Polynomial(self.coefs).deriv(deriv)
        return p(np.asarray(x, dtype=float))

    def d1(self, x):
        return self(x, 1)

    def d2(self, x):
        return self(x, 2)

    def d3(self, x):
        return self(x, 3)


def auxiliary_theta(length, r0, rl, bc):
    """Cubic lifting with theta(0)=a, r0 theta''(0)=a_tilde, theta(l)=b, rl theta''(l)=b_tilde."""
    l = float(length)
    ca = bc.a_tilde / r0
    cb = bc.b_tilde / rl
    P = np.polynomial.Polynomial
    lin = P([bc.a, (bc.b - bc.a) / l])
    # (l - x)^3 / (6 l) - (l / 6)(l - x)
    left = P([l, -1.0]) ** 3 / (6.0 * l) - P([l, -1.0]) * (l / 6.0)
    # x^3 / (6 l) - x l / 6
    right = P([0.0, -l / 6.0, 0.0, 1.0 / (6.0 * l)])
    total = lin + ca * left + cb * right
    coefs = np.zeros(4)
    coefs[: total.coef.size] = total.coef
    return Cubic(coefs)


def solve_steady_homogenized(problem, load_order=STIFFNESS_ORDER):
    """Solve for w - theta with homogeneous data, then add the cubic lifting back.

    Needs exact r', r'' and j' on the coefficient set.
    """
    c = problem.coeffs
    if c.dr is None or c.ddr is None or c.dj is None:
        raise CapabilityError("homogenised solve needs coefficient derivatives dr, ddr and dj")
    mesh, bc = problem.mesh, problem.bc
    l = mesh.length
    r0 = float(c.r(np.array(0.0)))
    rl = float(c.r(np.array(l)))
    theta = auxiliary_theta(l, r0, rl, bc)

    def f_tilde(x):
        # (r theta'')'' = r'' theta'' + 2 r' theta''' since theta'''' = 0
        bend = c.ddr(x) * theta.d2(x) + 2.0 * c.dr(x) * theta.d3(x)
        pull = c.dj(x) * theta.d1(x) + c.j(x) * theta.d2(x)
        return problem.f(x) - bend - c.s(x) * theta(x) + pull

    shifted = SteadyProblem(mesh, c, f_tilde, BoundaryData())
    w_tilde = solve_steady(shifted, load_order=load_order)
    # a cubic lies in the Hermite space, so nodal interpolation is exact
    lift = HermiteField.interpolate(mesh, theta, theta.d1)
    return w_tilde + lift
