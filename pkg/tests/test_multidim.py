import numpy as np
import pytest

import nlslab as nl
from nlslab import diagnostics as diag
from nlslab import potentials as pot


def gaussian_2d(grid):
    X, Y = grid.meshes
    return nl.ComplexField(np.pi**-0.5 * np.exp(-(X**2 + Y**2) / 2), grid)


def test_sigma_norm_2d_separable_gaussian():
    g = nl.SpatialGrid(2, 128, 8.0)
    u = gaussian_2d(g)
    assert nl.l2_norm(u) == pytest.approx(1.0, abs=1e-12)
    # terms: ||u||, ||x u||, ||y u||, ||du/dx||, ||du/dy|| = 1 + 4/sqrt(2)
    assert nl.sigma_norm(u, 1) == pytest.approx(1.0 + 4.0 / np.sqrt(2.0), abs=1e-10)
    assert nl.j_norm(u, 0.0) == pytest.approx(1.0, abs=1e-10)


def test_record_2d_oracle_values():
    g = nl.SpatialGrid(2, 128, 8.0)
    u = gaussian_2d(g)
    cfg = nl.SolverConfig(sigma=1.0, dt=1e-3, t_end=1.0)
    rec = nl.compute_record(u, 0.0, pot.potential_zero(), cfg,
                            diag.DiagnosticsConfig(max_k=2))
    # kinetic = (1/2)(||u_x||^2 + ||u_y||^2) = 1/2; ||u||_4^4 = 1/(2 pi)
    assert rec.kinetic == pytest.approx(0.5, abs=1e-10)
    assert rec.nonlinear_term == pytest.approx(0.25 / np.pi, abs=1e-10)
    assert rec.momenta[0] ** 2 == pytest.approx(1.0, abs=1e-10)  # || |x| u ||^2
    assert rec.sigma_norms[1] <= rec.sigma_norms[2]


def test_matrix_trap_2d_linear_evolution():
    # anisotropic static trap diag(1, 4): energy conserved, dE/dt = 0
    g = nl.SpatialGrid(2, 64, 6.0)
    u0 = gaussian_2d(g)
    q = np.diag([1.0, 4.0])
    vp = pot.potential_matrix(lambda t: q, q_dot=lambda t: np.zeros((2, 2)))
    cfg = nl.SolverConfig(sigma=1.0, dt=1e-3, t_end=0.5,
                          coefficient=nl.coefficient_zero(), diagnostics_stride=25)
    traj = nl.evolve(u0, cfg, vp)
    mass = traj.series("mass")
    assert np.max(np.abs(mass - mass[0])) / mass[0] <= 1e-10
    energy = traj.series("energy")
    assert np.max(np.abs(energy - energy[0])) <= 1e-6
    rep = nl.energy_rate_check(traj)
    assert rep["passes"]
    assert rep["max_defect"] <= 1e-4


def test_3d_linear_free_smoke():
    g = nl.SpatialGrid(3, 16, 4.0)
    X, Y, Z = g.meshes
    u0 = nl.ComplexField(np.pi**-0.75 * np.exp(-(X**2 + Y**2 + Z**2) / 2), g)
    cfg = nl.SolverConfig(sigma=1.0, dt=5e-3, t_end=0.3,
                          coefficient=nl.coefficient_zero(), diagnostics_stride=20)
    traj = nl.evolve(u0, cfg, pot.potential_zero())
    mass = traj.series("mass")
    assert np.max(np.abs(mass - mass[0])) / mass[0] <= 1e-10
    # d = 3 admits sigma = 1 but not sigma = 2
    nl.SolverConfig(sigma=1.0, dt=1e-3, t_end=0.1).validate(3)


def test_assumption_third_order_vanishes_for_quadratic():
    spec = pot.potential_isotropic(pot.omega_constant(1.0))
    rep = pot.verify_assumption(spec, [0.0, 1.0], np.linspace(-4, 4, 7)[:, None],
                                max_order=3)
    assert rep["passes"]
    assert rep["worst_bounds"][3] <= 1e-6


def test_pseudo_conformal_conservation_quintic():
    # For the potential-free quintic line equation the pseudo-conformal
    # quantity (1/2)||J(t)v||^2 + t^2/(sigma+1)||v||_6^6 is exactly conserved.
    g = nl.SpatialGrid(1, 2048, 40.0)
    x = g.meshes[0]
    v0 = nl.ComplexField(np.pi**-0.25 * np.exp(-x**2 / 2), g)
    cfg = nl.SolverConfig(sigma=2.0, dt=5e-4, t_end=3.0, diagnostics_stride=200)
    traj = nl.evolve(v0, cfg, pot.potential_zero())
    q = np.array([0.5 * rec.j_norm**2 + rec.t**2 * rec.nonlinear_term
                  for rec in traj.records])
    assert q[0] == pytest.approx(0.25, abs=1e-8)  # (1/2)||x v0||^2
    assert np.max(np.abs(q - q[0])) <= 5e-6


def test_2d_resample_and_continuum_transform():
    g = nl.SpatialGrid(2, 64, 8.0)
    u = gaussian_2d(g)
    half = nl.resample_scaled(u, 0.5)
    X, Y = g.meshes
    expect = np.pi**-0.5 * np.exp(-((0.5 * X) ** 2 + (0.5 * Y) ** 2) / 2)
    assert np.max(np.abs(half.values - expect)) <= 1e-9
    # continuum transform of the 2-d Gaussian at the origin:
    # (2 i pi)^{-1} * integral = e^{-i pi/2} (2 pi)^{-1} * (2 pi) * pi^{-1/2} / ...
    from nlslab.grid import continuum_fourier_at
    val = continuum_fourier_at(u, [np.array([0.0]), np.array([0.0])])[0, 0]
    # integral of pi^{-1/2} e^{-r^2/2} over R^2 = 2 sqrt(pi); prefactor
    # (2 pi)^{-1} e^{-i pi/2}
    expect0 = 2.0 * np.sqrt(np.pi) / (2.0 * np.pi) * np.exp(-0.5j * np.pi)
    assert val == pytest.approx(expect0, abs=1e-10)
