"""nlslab: pseudo-spectral workbench for the defocusing NLS equation with
time-dependent, at-most-quadratic potentials.

Simulates i u_t + (1/2) Lap u = V(t,x) u + c(t) |u|^{2 sigma} u on periodic
boxes, tracks weighted-Sobolev growth diagnostics, and mechanizes the
Hill-equation / lens-transform machinery that links quadratic traps with
potential-free non-autonomous equations.
"""

from .bounds import (ExponentSet, admissible, classify, double_exp_ledger,
                     exponent_set, gronwall_envelope, growth_fit)
from .diagnostics import (DiagnosticsConfig, DiagnosticsRecord, compute_record,
                          decay_check, energy_rate_check, hk_norm, j_norm,
                          pseudo_energy_rate_check, sigma_norm)
from .grid import (ComplexField, SpatialGrid, apply_multiplier,
                   boundary_amplitude_ratio, derivative, field_from_function,
                   forward_transform, inverse_transform, l2_inner, l2_norm,
                   lp_norm, moment_weight, resample_scaled)
from .lens import (HillSolution, LensMap, build_lens_map,
                   construct_scattering_pair, lens_forward, lens_inverse,
                   solve_hill, solve_hill_two_sided)
from .potentials import (Omega, PotentialSpec, omega_constant, omega_custom,
                         omega_oscillatory, omega_power_decay,
                         potential_custom, potential_isotropic,
                         potential_matrix, potential_repulsive,
                         potential_tabulated, potential_zero,
                         sharpness_classifier, verify_assumption)
from .scattering import (asymptotic_profile, asymptotic_profile_error,
                         cauchy_convergence, free_pullback, repulsive_reference)
from .scenarios import (Scenario, bundled_scenarios, load_scenario,
                        run_scenario, scenario_from_toml, scenario_to_toml,
                        sweep)
from .solver import (Coefficient, ConfigError, NumericalGuardError,
                     SolverConfig, Trajectory, coefficient_constant,
                     coefficient_timefun, coefficient_zero, evolve,
                     initial_condition, step_strang)

__version__ = "0.1.0"
