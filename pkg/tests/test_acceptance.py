"""Exit criteria, one test per criterion, each with its runtime budget."""

import time

import numpy as np
import pytest
import sympy as sp

from beamlab.banded import BandedMatrix, lu_factor
from beamlab.fem import CoefficientSet, HermiteField, assemble_operator, l2_norm_error
from beamlab.hmol import CNStepper, TimeGrid, UnsteadyProblem
from beamlab.mesh import Mesh1D
from beamlab.steady import BoundaryData, SteadyProblem, solve_steady
from beamlab.verification import (
    fit_order,
    manufacture_steady,
    manufacture_unsteady,
    run_steady_study,
    run_unsteady_study,
    solve_case,
    strong_residuals,
    trajectory_errors,
)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f}s, budget {self.seconds}s"


def _exact_blocks():
    """Symbolic element stiffness (r = 1) and mass matrices as functions of h."""
    x, h = sp.symbols("x h", positive=True)
    phi = [1 - 3 * x**2 / h**2 + 2 * x**3 / h**3, x - 2 * x**2 / h + x**3 / h**2,
           3 * x**2 / h**2 - 2 * x**3 / h**3, -x**2 / h + x**3 / h**2]
    K = sp.Matrix(4, 4, lambda a, b: sp.integrate(sp.diff(phi[a], x, 2) * sp.diff(phi[b], x, 2), (x, 0, h)))
    M = sp.Matrix(4, 4, lambda a, b: sp.integrate(phi[a] * phi[b], (x, 0, h)))
    return sp.lambdify(h, K, "numpy"), sp.lambdify(h, M, "numpy")


def test_1_element_matrix_oracle(rng):
    K_of, M_of = _exact_blocks()
    with Budget(1.0):
        for _ in range(50):
            h = float(rng.uniform(1e-3, 5.0))
            r = float(rng.uniform(0.1, 10.0))
            mesh = Mesh1D([0.0, h])
            K = assemble_operator(mesh, CoefficientSet(r=r)).to_dense()
            K_ref = r * np.array(K_of(h), dtype=float)
            assert np.max(np.abs(K - K_ref)) <= 1e-12 * np.max(np.abs(K_ref))
            M = assemble_operator(mesh, CoefficientSet(r=0.0, s=1.0), check=False).to_dense()
            M_ref = np.array(M_of(h), dtype=float)
            assert np.max(np.abs(M - M_ref)) <= 1e-12 * np.max(np.abs(M_ref))


def test_2_cubic_patch_test(rng):
    with Budget(1.0):
        for M in (1, 2, 5):
            for _ in range(10):
                coefs = rng.normal(size=4)
                r = float(rng.uniform(0.2, 5.0))
                length = float(rng.uniform(0.5, 3.0))
                p = np.polynomial.Polynomial(coefs)
                d2 = p.deriv(2)
                bc = BoundaryData(p(0.0), r * d2(0.0), p(length), r * d2(length))
                problem = SteadyProblem(Mesh1D.uniform(length, M), CoefficientSet(r=r), 0.0, bc)
                w = solve_steady(problem)
                norm = l2_norm_error(w * 0.0, p)
                assert l2_norm_error(w, p) <= 1e-10 * norm


def test_3_steady_order():
    with Budget(5.0):
        case = manufacture_steady()
        report = run_steady_study(case, [1 / 4, 1 / 8, 1 / 16, 1 / 32, 1 / 64])
        slope = report.slopes["W"][0]
    print(f"steady slope {slope:.3f}")
    assert abs(slope - 4.0) <= 0.3


TABLE_PAIRS = [(1 / 10, 1 / 50), (1 / 20, 1 / 200), (1 / 40, 1 / 800), (1 / 80, 1 / 3200)]
REFERENCE_W = [1.78e-6, 1.12e-7, 6.99e-9, 4.34e-10]
REFERENCE_Z = [4.48e-5, 2.79e-6, 1.78e-7]


def test_4_unsteady_table():
    with Budget(120.0):
        report = run_unsteady_study(manufacture_unsteady(), TABLE_PAIRS)
    err_W = report.column("err_W")
    err_Z = report.column("err_Z")
    for got, ref in zip(err_W, REFERENCE_W):
        print(f"err_W {got:.3e} vs {ref:.2e}")
        assert ref / 3 <= got <= ref * 3
    for k in range(3):
        assert 10 <= err_W[k] / err_W[k + 1] <= 24
    for got, ref in zip(err_Z[:3], REFERENCE_Z):
        print(f"err_Z {got:.3e} vs {ref:.2e}")
        assert ref / 3 <= got <= ref * 3
    assert err_Z[3] <= 1e-6


def test_5_temporal_order():
    with Budget(30.0):
        report = run_unsteady_study(manufacture_unsteady(),
                                    [(1 / 50, tau) for tau in (1 / 25, 1 / 50, 1 / 100, 1 / 200)])
    slope = report.slopes["W"][0]
    print(f"temporal slope {slope:.3f}")
    assert report.fit_variable == "tau"
    assert abs(slope - 2.0) <= 0.3


def test_6_spatial_order():
    with Budget(60.0):
        report = run_unsteady_study(manufacture_unsteady(),
                                    [(h, 1 / 3200) for h in (1 / 5, 1 / 10, 1 / 20)])
    slope = report.slopes["W"][0]
    print(f"spatial slope {slope:.3f}")
    assert report.fit_variable == "h"
    assert abs(slope - 4.0) <= 0.4


def test_7_stationary_fixed_point():
    with Budget(5.0):
        mesh = Mesh1D.uniform(1.0, 50)
        coeffs = CoefficientSet(r=lambda x: 1 + x, s=np.cos, j=lambda x: 3 * x, eta=2.0)
        load = lambda x: np.exp(x) - 2 * x  # noqa: E731
        bc = BoundaryData(a=1.0, a_tilde=-0.4, b=0.5, b_tilde=2.0)
        W0 = solve_steady(SteadyProblem(mesh, coeffs, load, bc), load_order=5)
        problem = UnsteadyProblem(mesh, TimeGrid(1.0, 100), coeffs, lambda x, t: load(x),
                                  W0.eval, 0.0, bc.a, bc.a_tilde, bc.b, bc.b_tilde)
        stepper = CNStepper(problem)
        W, Z = W0, HermiteField(mesh, np.zeros(mesh.ndofs))
        drift = 0.0
        for n in range(100):
            W, Z = stepper.step(n, W, Z)
            drift = max(drift, float(np.max(np.abs(W.dofs - W0.dofs))))
    print(f"max drift {drift:.2e}")
    assert drift <= 1e-9


def test_8_manufacturing_gate():
    with Budget(5.0):
        res_s = strong_residuals(manufacture_steady(), samples=50)
        res_u = strong_residuals(manufacture_unsteady(), samples=50)
    print(f"residuals {res_s:.2e} {res_u:.2e}")
    assert res_s <= 1e-8 and res_u <= 1e-8


def test_9_derivative_fidelity():
    with Budget(60.0):
        case = manufacture_unsteady()
        errs = trajectory_errors(case, solve_case(case, 1 / 50, 1 / 1250))
    dxW, dxZ = errs["dxW"].max(), errs["dxZ"].max()
    print(f"dxW {dxW:.2e}  dxZ {dxZ:.2e}")
    assert dxW <= 1e-4 and dxZ <= 1e-4


def _random_banded(rng, n, kl, ku):
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - kl), min(n, i + ku + 1)):
            a[i, j] = rng.normal()
        a[i, i] += np.sign(a[i, i] or 1.0) * (kl + ku + 1)
    return a


def _dense_oracle(a, b):
    a, b = a.copy(), b.copy()
    n = len(b)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        a[[k, p]], b[[k, p]] = a[[p, k]], b[[p, k]]
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:] -= np.outer(f, a[k])
        b[k + 1:] -= f * b[k]
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def test_10_linear_solver_suite(rng):
    with Budget(5.0):
        for _ in range(100):
            n = int(rng.integers(1, 21))
            kl, ku = int(rng.integers(0, 4)), int(rng.integers(0, 4))
            a = _random_banded(rng, n, kl, ku)
            b = rng.normal(size=n)
            x = lu_factor(BandedMatrix.from_dense(a, kl, ku)).solve(b)
            ref = _dense_oracle(a, b)
            assert np.max(np.abs(x - ref)) <= 1e-11 * np.max(np.abs(ref))
        for _ in range(100):
            n = int(rng.integers(1, 200))
            kl, ku = int(rng.integers(0, 4)), int(rng.integers(0, 4))
            a = _random_banded(rng, n, kl, ku)
            b = rng.normal(size=n)
            x = lu_factor(BandedMatrix.from_dense(a, kl, ku)).solve(b)
            bound = 1e-10 * (np.max(np.abs(a).sum(axis=1)) * np.max(np.abs(x)) + np.max(np.abs(b)))
            assert np.max(np.abs(a @ x - b)) <= bound
