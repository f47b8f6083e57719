"""Galerkin assembly, projection, evaluation and norms for Hermite cubic fields."""

from dataclasses import dataclass, replace

import numpy as np

from .banded import BandedMatrix, lu_factor
from .mesh import OutOfRangeError, gauss_rule, hermite_local

# quadrature orders: bending/traction terms follow the original 3-point element
# loop; terms with two undifferentiated cubics (degree 6) need 5 points
STIFFNESS_ORDER = 3
MASS_ORDER = 5
NORM_ORDER = 5

BANDWIDTH = 3


class CoefficientError(ValueError):
    pass


class CapabilityError(RuntimeError):
    pass


class StateError(RuntimeError):
    pass


def as_function(value):
    """Wrap a constant as a vectorised function of x; callables pass through."""
    if value is None or callable(value):
        return value
    c = float(value)

    def const(x, *rest):
        return np.full(np.shape(x), c)

    const.constant = c
    return const


@dataclass(frozen=True)
class CoefficientSet:
    """Spatial coefficients of (r w'')'' - (j w')' + s w with damping eta and density rho.

    Every function must accept numpy arrays. ``dr``, ``ddr`` and ``dj`` are
    optional exact derivatives used only by the homogenised steady path.
    """

    r: object = 1.0
    s: object = 0.0
    j: object = 0.0
    eta: object = 0.0
    rho: object = 1.0
    dr: object = None
    ddr: object = None
    dj: object = None

    def __post_init__(self):
        for name in ("r", "s", "j", "eta", "rho", "dr", "ddr", "dj"):
            object.__setattr__(self, name, as_function(getattr(self, name)))

    def with_(self, **changes):
        return replace(self, **changes)

    def check_positive(self, mesh, name="r"):
        x, _ = mesh.quadrature_points(gauss_rule(STIFFNESS_ORDER))
        vals = np.asarray(getattr(self, name)(x), dtype=float)
        bad = ~(vals > 0)
        if np.any(bad):
            where = float(x[bad].flat[0])
            raise CoefficientError(f"coefficient {name} must be positive; {name}({where!r}) = "
                                   f"{float(vals[bad].flat[0])!r}")


def _shapes(mesh, order):
    """Shape values and derivatives at the mapped Gauss points: three (4, M, q) arrays."""
    cache = mesh.__dict__.setdefault("_shape_cache", {})
    if order not in cache:
        rule = gauss_rule(order)
        x, w = mesh.quadrature_points(rule)
        xbar = x - mesh.nodes[:-1, None]
        cache[order] = (x, w) + hermite_local(xbar, mesh.sizes[:, None])
    return cache[order]


def _scatter(mesh, blocks):
    a = BandedMatrix(mesh.ndofs, BANDWIDTH, BANDWIDTH)
    for m in range(mesh.element_count):
        a.add_block(2 * m, blocks[m])
    return a


def element_blocks(mesh, coeffs, s_override=None, check=True):
    """Per-element 4x4 blocks of the bilinear form, shape (M, 4, 4)."""
    if check:
        coeffs.check_positive(mesh)
    x3, w3, _, d1, d2 = _shapes(mesh, STIFFNESS_ORDER)
    r = np.asarray(coeffs.r(x3), dtype=float) * w3
    blocks = np.einsum("amq,bmq,mq->mab", d2, d2, r)
    jw = np.asarray(coeffs.j(x3), dtype=float) * w3
    if np.any(jw):
        blocks += np.einsum("amq,bmq,mq->mab", d1, d1, jw)
    react = coeffs.s if s_override is None else as_function(s_override)
    x5, w5, v5, _, _ = _shapes(mesh, MASS_ORDER)
    sw = np.asarray(react(x5), dtype=float) * w5
    if np.any(sw):
        blocks += np.einsum("amq,bmq,mq->mab", v5, v5, sw)
    return blocks


def assemble_operator(mesh, coeffs, s_override=None, check=True):
    """Banded matrix of (r u'', v'') + (j u', v') + (s u, v) over the whole mesh."""
    return _scatter(mesh, element_blocks(mesh, coeffs, s_override, check))


def assemble_mass(mesh, weight=None):
    """Weighted mass matrix (c u, v); c defaults to 1."""
    x5, w5, v5, _, _ = _shapes(mesh, MASS_ORDER)
    if weight is not None:
        w5 = np.asarray(as_function(weight)(x5), dtype=float) * w5
    return _scatter(mesh, np.einsum("amq,bmq,mq->mab", v5, v5, w5))


def _element_dofs(mesh, dofs):
    idx = 2 * np.arange(mesh.element_count)[:, None] + np.arange(4)[None, :]
    return dofs[idx]


def load_vector(mesh, f, order=STIFFNESS_ORDER):
    """Entries (f, phi_i) integrated element by element."""
    x, w, v, _, _ = _shapes(mesh, order)
    fw = np.asarray(f(x), dtype=float) * w
    local = np.einsum("amq,mq->ma", v, fw)
    out = np.zeros(mesh.ndofs)
    for a in range(4):
        np.add.at(out, 2 * np.arange(mesh.element_count) + a, local[:, a])
    return out


def assemble_load(mesh, f, a_tilde=0.0, b_tilde=0.0, order=STIFFNESS_ORDER):
    """C_i = (f, phi_i) + b_tilde phi_i'(l) - a_tilde phi_i'(0).

    Only the slope functions at the two end nodes have nonzero end slopes.
    """
    c = load_vector(mesh, as_function(f), order)
    c[1] -= a_tilde
    c[-1] += b_tilde
    return c


@dataclass(frozen=True)
class AssembledSystem:
    R: BandedMatrix
    C: np.ndarray
    bc_applied: bool = False

    def solve(self):
        return lu_factor(self.R).solve(self.C)


def essential_rows(mesh):
    """Indices of the displacement DOFs at x = 0 and x = l."""
    return 0, mesh.ndofs - 2


def apply_essential_bc(system, a, b):
    """Replace the end displacement rows by unit rows carrying a and b."""
    if system.bc_applied:
        raise StateError("essential boundary conditions already applied")
    n = system.R.n
    first, last = 0, n - 2
    R = system.R.copy()
    C = np.array(system.C, dtype=float)
    R.set_unit_row(first)
    R.set_unit_row(last)
    C[first] = a
    C[last] = b
    return AssembledSystem(R, C, True)


class HermiteField:
    """Piecewise cubic C1 function given by nodal (value, slope) pairs."""

    def __init__(self, mesh, dofs):
        dofs = np.array(dofs, dtype=float)
        if dofs.shape != (mesh.ndofs,):
            raise ValueError(f"expected {mesh.ndofs} dofs, got shape {dofs.shape}")
        dofs.setflags(write=False)
        self.mesh = mesh
        self.dofs = dofs

    @classmethod
    def interpolate(cls, mesh, u, du):
        """Nodal Hermite interpolant from a function and its derivative."""
        dofs = np.empty(mesh.ndofs)
        dofs[0::2] = u(mesh.nodes)
        dofs[1::2] = du(mesh.nodes)
        return cls(mesh, dofs)

    @property
    def values(self):
        return self.dofs[0::2]

    @property
    def slopes(self):
        return self.dofs[1::2]

    def __add__(self, other):
        return HermiteField(self.mesh, self.dofs + other.dofs)

    def __sub__(self, other):
        return HermiteField(self.mesh, self.dofs - other.dofs)

    def __mul__(self, c):
        return HermiteField(self.mesh, self.dofs * float(c))

    __rmul__ = __mul__

    def evaluate(self, x, deriv=0):
        """Field (deriv=0), slope (1) or curvature (2) at the points x."""
        mesh = self.mesh
        xs = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xs).ravel()
        if flat.size and (flat.min() < 0.0 or flat.max() > mesh.length):
            raise OutOfRangeError(f"evaluation point outside [0, {mesh.length!r}]")
        m = np.searchsorted(mesh.nodes, flat, side="left") - 1
        m = np.clip(m, 0, mesh.element_count - 1)
        shapes = hermite_local(flat - mesh.nodes[m], mesh.sizes[m])[deriv]
        local = _element_dofs(mesh, self.dofs)[m]
        out = np.einsum("ap,pa->p", shapes, local)
        return out.reshape(xs.shape) if xs.ndim else float(out[0])

    def eval(self, x):
        return self.evaluate(x, 0)

    def eval_dx(self, x):
        return self.evaluate(x, 1)

    def eval_dxx(self, x):
        return self.evaluate(x, 2)

    def at_quadrature(self, order=NORM_ORDER, deriv=0):
        """Values at the mapped Gauss points, shape (M, q)."""
        x, w, *shapes = _shapes(self.mesh, order)
        local = _element_dofs(self.mesh, self.dofs)
        return np.einsum("amq,ma->mq", shapes[deriv], local)

    def __repr__(self):
        return f"HermiteField({self.mesh!r})"


def l2_project(mesh, u):
    """L2 projection of u onto the Hermite space (all DOFs free)."""
    mass = assemble_mass(mesh)
    rhs = load_vector(mesh, u, MASS_ORDER)
    return HermiteField(mesh, lu_factor(mass).solve(rhs))


def l2_norm_error(field, u_exact, deriv=0):
    """||d^k field - u_exact||_{L2(0,l)} with the 5-point rule on every element."""
    x, w, *_ = _shapes(field.mesh, NORM_ORDER)
    diff = field.at_quadrature(NORM_ORDER, deriv) - np.asarray(u_exact(x), dtype=float)
    return float(np.sqrt(np.sum(w * diff * diff)))


def l2_norm(field, deriv=0):
    return l2_norm_error(field, lambda x: np.zeros_like(x), deriv)
