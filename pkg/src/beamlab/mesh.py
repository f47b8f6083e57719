"""1D meshes, Gauss-Legendre rules and Hermite cubic shape functions."""

from dataclasses import dataclass

import numpy as np


class MeshError(ValueError):
    pass


class OutOfRangeError(ValueError):
    pass


class Mesh1D:
    """Partition 0 = x_1 < x_2 < ... < x_{M+1} = l of the beam axis."""

    def __init__(self, nodes):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise MeshError("a mesh needs at least two nodes")
        if nodes[0] != 0.0:
            raise MeshError(f"first node must be 0, got {nodes[0]!r}")
        sizes = np.diff(nodes)
        if np.any(sizes <= 0.0):
            bad = int(np.argmin(sizes))
            raise MeshError(f"nodes must be strictly increasing (element {bad})")
        nodes.setflags(write=False)
        sizes.setflags(write=False)
        self._nodes = nodes
        self._sizes = sizes

    @classmethod
    def uniform(cls, length, elements):
        if length <= 0:
            raise MeshError("length must be positive")
        if elements < 1:
            raise MeshError("need at least one element")
        nodes = np.linspace(0.0, length, int(elements) + 1)
        return cls(nodes)

    @classmethod
    def from_step(cls, length, h):
        """Uniform mesh with element size h; h must divide length."""
        count = length / h
        elements = int(round(count))
        if elements < 1 or abs(count - elements) > 1e-9 * max(1.0, count):
            raise MeshError(f"h={h!r} does not divide l={length!r} evenly")
        return cls.uniform(length, elements)

    @property
    def nodes(self):
        return self._nodes

    @property
    def sizes(self):
        return self._sizes

    @property
    def element_count(self):
        return self._sizes.size

    @property
    def length(self):
        return float(self._nodes[-1])

    @property
    def ndofs(self):
        return 2 * self._nodes.size

    def element_size(self, m):
        return float(self._sizes[m])

    def locate(self, x):
        """Index of the element containing x; shared nodes go to the left element."""
        x = float(x)
        if x < 0.0 or x > self.length:
            raise OutOfRangeError(f"x={x!r} outside [0, {self.length!r}]")
        m = int(np.searchsorted(self._nodes, x, side="left")) - 1
        return min(max(m, 0), self.element_count - 1)

    def quadrature_points(self, rule):
        """Physical points (M, q) and weights (M, q) of `rule` mapped to every element."""
        half = 0.5 * self._sizes[:, None]
        x = self._nodes[:-1, None] + half * (rule.points[None, :] + 1.0)
        w = half * rule.weights[None, :]
        return x, w

    def __repr__(self):
        return f"Mesh1D(M={self.element_count}, l={self.length!r})"


@dataclass(frozen=True)
class GaussRule:
    points: np.ndarray
    weights: np.ndarray
    degree_exact: int

    def integrate(self, q):
        """Integral of q over [-1, 1]."""
        return float(np.dot(self.weights, q(self.points)))


_RULES = {}


def gauss_rule(order):
    """Gauss-Legendre rule with 3 or 5 points on [-1, 1]."""
    if order not in (3, 5):
        raise ValueError(f"unsupported Gauss rule order {order!r}; use 3 or 5")
    if order not in _RULES:
        pts, wts = np.polynomial.legendre.leggauss(order)
        # enforce exact symmetry
        pts = 0.5 * (pts - pts[::-1])
        wts = 0.5 * (wts + wts[::-1])
        pts.setflags(write=False)
        wts.setflags(write=False)
        _RULES[order] = GaussRule(pts, wts, 2 * order - 1)
    return _RULES[order]


@dataclass(frozen=True)
class ShapeValues:
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def hermite_local(xbar, h):
    """Hermite cubics and their first/second x-derivatives at local offsets xbar.

    Returns three arrays of shape (4,) + xbar.shape, ordered (H1, H2, H3, H4);
    H2 and H4 are the physical-slope shapes.
    """
    s = np.asarray(xbar, dtype=float) / h
    s2 = s * s
    s3 = s2 * s
    vals = np.array([
        1.0 - 3.0 * s2 + 2.0 * s3,
        h * (s - 2.0 * s2 + s3),
        3.0 * s2 - 2.0 * s3,
        h * (-s2 + s3),
    ])
    d1 = np.array([
        (-6.0 * s + 6.0 * s2) / h,
        1.0 - 4.0 * s + 3.0 * s2,
        (6.0 * s - 6.0 * s2) / h,
        -2.0 * s + 3.0 * s2,
    ])
    d2 = np.array([
        (-6.0 + 12.0 * s) / h**2,
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / h**2,
        (-2.0 + 6.0 * s) / h,
    ])
    return vals, d1, d2


def shape_eval(mesh, m, x):
    """Local Hermite shapes of element m at physical point x."""
    lo, hi = mesh.nodes[m], mesh.nodes[m + 1]
    if not lo <= x <= hi:
        raise OutOfRangeError(f"x={x!r} outside element {m} = [{lo!r}, {hi!r}]")
    vals, d1, d2 = hermite_local(x - lo, mesh.element_size(m))
    return ShapeValues(vals, d1, d2)


def reference_second_derivatives(h, xi):
    """Second x-derivatives of the four shapes at reference point xi in [-1, 1].

    Same vector as the element-quadrature loop of the original MATLAB code:
    (6 xi/h, 3 xi - 1, -6 xi/h, 3 xi + 1) / h.
    """
    if h <= 0:
        raise ValueError(f"element size must be positive, got {h!r}")
    xi = np.asarray(xi, dtype=float)
    return np.array([6.0 * xi / h, 3.0 * xi - 1.0, -6.0 * xi / h, 3.0 * xi + 1.0]) / h
