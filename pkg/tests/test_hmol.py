import warnings

import numpy as np
import pytest

from beamlab.fem import CoefficientError, CoefficientSet, HermiteField, l2_norm_error
from beamlab.hmol import CNStepper, TimeGrid, UnsteadyProblem, cn_step, initialize, run
from beamlab.mesh import Mesh1D, OutOfRangeError
from beamlab.steady import BoundaryData, SteadyProblem, solve_steady

BEAM_COEFFS = CoefficientSet(r=lambda x: 1 + x, s=np.cos, j=lambda x: 3 * x, eta=2.0)


def test_time_grid():
    grid = TimeGrid(1.0, 50)
    assert grid.tau == 0.02
    t = grid.times
    assert t[0] == 0.0 and t.size == 51 and abs(t[-1] - 1.0) <= 1e-12
    assert TimeGrid.from_step(1.0, 1 / 1250).N == 1250
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0)
    with pytest.raises(ValueError):
        TimeGrid.from_step(1.0, 0.3)


def zero_problem(M=6, N=4):
    return UnsteadyProblem(Mesh1D.uniform(1.0, M), TimeGrid(1.0, N), BEAM_COEFFS, 0.0, 0.0, 0.0)


def test_initialize_zero():
    W, Z = initialize(zero_problem())
    assert not np.any(W.dofs) and not np.any(Z.dofs)


def test_initialize_linear_is_exact():
    mesh = Mesh1D.uniform(1.0, 5)
    problem = UnsteadyProblem(mesh, TimeGrid(1.0, 2), BEAM_COEFFS, 0.0, lambda x: x, 0.0,
                              a=0.0, b=1.0)
    W, _ = initialize(problem)
    assert np.allclose(W.values, mesh.nodes, rtol=0, atol=1e-11)
    assert np.allclose(W.slopes, 1.0, rtol=0, atol=1e-11)


def test_initial_velocity_projection_order(unsteady_case):
    errs = []
    for M in (5, 10, 20):
        problem = unsteady_case.unsteady_problem(Mesh1D.uniform(1.0, M), TimeGrid(1.0, 1))
        W, Z = initialize(problem)
        assert not np.any(W.dofs)
        errs.append(l2_norm_error(Z, unsteady_case.q))
    assert 12 < errs[0] / errs[1] < 20
    assert 14 < errs[1] / errs[2] < 18


def test_zero_step():
    p = zero_problem()
    W, Z = initialize(p)
    W1, Z1 = cn_step(p, 1, W, Z)
    assert not np.any(W1.dofs) and not np.any(Z1.dofs)


def test_step_index_checked():
    p = zero_problem(N=3)
    W, Z = initialize(p)
    with pytest.raises(ValueError):
        cn_step(p, 4, W, Z)
    with pytest.raises(ValueError):
        cn_step(p, 0, W, Z)


def stationary_setup(M=20, N=100, T=1.0):
    mesh = Mesh1D.uniform(1.0, M)
    load = lambda x: 1 + np.sin(3 * x)  # noqa: E731
    bc = BoundaryData(a=0.3, a_tilde=-0.5, b=-0.2, b_tilde=1.25)
    # same 5-point load rule as the stepper, so the discrete steady state is exact
    W0 = solve_steady(SteadyProblem(mesh, BEAM_COEFFS, load, bc), load_order=5)
    problem = UnsteadyProblem(mesh, TimeGrid(T, N), BEAM_COEFFS, lambda x, t: load(x),
                              W0.eval, 0.0, bc.a, bc.a_tilde, bc.b, bc.b_tilde)
    return problem, W0


def test_stationary_fixed_point_single_step():
    problem, W0 = stationary_setup()
    Z0 = HermiteField(problem.mesh, np.zeros(problem.mesh.ndofs))
    W1, Z1 = cn_step(problem, 1, W0, Z0)
    assert np.max(np.abs(W1.dofs - W0.dofs)) <= 1e-10
    assert l2_norm_error(Z1, np.zeros_like) <= 1e-10


def test_stationary_invariance_over_100_steps():
    problem, W0 = stationary_setup(N=100)
    stepper = CNStepper(problem)
    W = W0
    Z = HermiteField(problem.mesh, np.zeros(problem.mesh.ndofs))
    drift = 0.0
    for n in range(100):
        W, Z = stepper.step(n, W, Z)
        drift = max(drift, np.max(np.abs(W.dofs - W0.dofs)))
    assert drift <= 1e-9


def test_one_step_of_builtin_case(unsteady_case):
    problem = unsteady_case.unsteady_problem(Mesh1D.uniform(1.0, 10), TimeGrid(1.0, 50))
    W, Z = initialize(problem)
    W1, _ = cn_step(problem, 1, W, Z)
    tau = problem.grid.tau
    assert l2_norm_error(W1, lambda x: unsteady_case.exact(x, tau)) <= 1e-5


def test_run_single_step_matches_cn_step(unsteady_case):
    problem = unsteady_case.unsteady_problem(Mesh1D.uniform(1.0, 8), TimeGrid(0.1, 1))
    traj = run(problem)
    W, Z = initialize(problem)
    W1, Z1 = cn_step(problem, 1, W, Z)
    assert np.array_equal(traj.fields_W[1].dofs, W1.dofs)
    assert np.array_equal(traj.fields_Z[1].dofs, Z1.dofs)


def test_reuse_matches_reassembly(unsteady_case):
    problem = unsteady_case.unsteady_problem(Mesh1D.uniform(1.0, 10), TimeGrid(0.5, 25))
    a = run(problem)
    b = run(problem, reuse=False)
    diff = max(np.max(np.abs(x.dofs - y.dofs)) for x, y in zip(a.fields_W, b.fields_W))
    assert diff <= 1e-13


def test_essential_bc_every_step(unsteady_case):
    problem = unsteady_case.unsteady_problem(Mesh1D.uniform(1.0, 10), TimeGrid(1.0, 40))
    traj = run(problem)
    assert len(traj.fields_W) == len(traj.fields_Z) == 41
    for t, W in list(zip(problem.grid.times, traj.fields_W))[1:]:
        assert abs(W.eval(0.0) - problem.a(t)) <= 1e-12
        assert abs(W.eval(1.0) - problem.b(t)) <= 1e-12


@pytest.mark.parametrize("h,tau,reference", [(1 / 10, 1 / 50, 1.78e-6), (1 / 20, 1 / 200, 1.12e-7)])
def test_reference_table_first_columns(unsteady_case, h, tau, reference):
    problem = unsteady_case.unsteady_problem(Mesh1D.from_step(1.0, h), TimeGrid.from_step(1.0, tau))
    traj = run(problem)
    err = max(l2_norm_error(W, lambda x: unsteady_case.exact(x, t))
              for t, W in zip(problem.grid.times, traj.fields_W))
    assert reference / 3 <= err <= reference * 3


@pytest.fixture(scope="module")
def small_traj(unsteady_case):
    problem = unsteady_case.unsteady_problem(Mesh1D.uniform(1.0, 5), TimeGrid(1.0, 10))
    return run(problem)


def test_interp_at_nodes(small_traj):
    x = np.linspace(0, 1, 7)
    for n, t in enumerate(small_traj.grid.times):
        assert np.array_equal(small_traj.interp_W(x, t), small_traj.fields_W[n].eval(x))
        assert np.array_equal(small_traj.interp_dxZ(x, t), small_traj.fields_Z[n].eval_dx(x))


def test_interp_midpoint_and_linearity(small_traj):
    x = np.linspace(0, 1, 7)
    t = small_traj.grid.times
    for n in (0, 4, 9):
        mid = 0.5 * (t[n] + t[n + 1])
        mean = 0.5 * (small_traj.fields_Z[n].eval(x) + small_traj.fields_Z[n + 1].eval(x))
        assert np.allclose(small_traj.interp_Z(x, mid), mean, rtol=0, atol=1e-13)
        s = [t[n] + f * (t[n + 1] - t[n]) for f in (0.1, 0.45, 0.8)]
        v = [small_traj.interp_dxW(x, si) for si in s]
        slope = (v[2] - v[0]) / (s[2] - s[0])
        assert np.allclose(v[1], v[0] + slope * (s[1] - s[0]), rtol=0, atol=1e-13)


def test_interp_out_of_range(small_traj):
    with pytest.raises(OutOfRangeError):
        small_traj.interp_W(0.5, 1.5)
    with pytest.raises(OutOfRangeError):
        small_traj.interp_W(1.5, 0.5)


def test_incompatible_initial_data_warns():
    with pytest.warns(UserWarning, match="incompatible"):
        UnsteadyProblem(Mesh1D.uniform(1.0, 4), TimeGrid(1.0, 4), BEAM_COEFFS, 0.0,
                        lambda x: 1 + x, 0.0, a=0.0, b=0.0)


def test_compatible_initial_data_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        zero_problem()


def test_unit_density_required():
    with pytest.raises(CoefficientError):
        UnsteadyProblem(Mesh1D.uniform(1.0, 4), TimeGrid(1.0, 4), BEAM_COEFFS.with_(rho=2.0),
                        0.0, 0.0, 0.0)
