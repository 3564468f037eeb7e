"""Free-flow pullback, Cauchy-convergence detection, asymptotic-profile
comparison, and the analytic reference for the repulsive quadratic trap.

The scattering verdict is a finite-horizon heuristic, clearly labeled as
such in outputs: the pullbacks w(t) = e^{-i t Lap / 2} u(t) are declared
convergent when successive differences decrease at least like 1/t (factor
two per doubling of time).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .grid import ComplexField, SpatialGrid, apply_multiplier, continuum_fourier_at, l2_norm


def free_pullback(u: ComplexField, t: float) -> ComplexField:
    """w = e^{-i t Lap / 2} u via the unimodular multiplier e^{+i t |xi|^2 / 2}."""
    if t == 0.0:
        return u.copy()
    phase = np.exp(0.5j * t * u.grid.wavenumber_squared)
    return apply_multiplier(u, phase)


@dataclass
class CauchyReport:
    times: np.ndarray
    differences: np.ndarray
    verdict: str                  # "scattering" | "not-scattering"
    u_plus: ComplexField
    tail_estimate: float
    monotone_decreasing: bool
    note: str = ("finite-horizon heuristic: 'scattering' means pullback differences "
                 "decay at least like 1/t over the sampled window")


def cauchy_convergence(snapshots: Sequence[tuple[float, ComplexField]],
                       atol: float = 1e-9, slack: float = 0.1) -> CauchyReport:
    """Difference sequence ||w(t_{j+1}) - w(t_j)||_L2 and a scattering verdict.

    Needs >= 4 snapshots at increasing times.  Differences below atol count
    as converged outright; otherwise each consecutive difference must drop
    by at least the ratio of interval start times (factor 2 per doubling of
    time, i.e. a 1/t envelope), within the multiplicative `slack`.  The
    slack exists because genuine 1/t-decaying tails approach the factor-2
    asymptote from below; plateauing sequences sit far under the threshold
    either way.  The tail estimate extrapolates the last observed decay
    ratio geometrically.
    """
    if len(snapshots) < 4:
        raise ValueError("cauchy_convergence needs at least 4 snapshots")
    times = np.array([float(t) for t, _ in snapshots])
    if np.any(np.diff(times) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    pullbacks = [free_pullback(u, t) for t, u in snapshots]
    diffs = np.array([l2_norm(pullbacks[j + 1] - pullbacks[j])
                      for j in range(len(pullbacks) - 1)])
    u_plus = pullbacks[-1]

    if np.all(diffs <= atol):
        verdict = "scattering"
        monotone = True
    else:
        monotone = bool(np.all(np.diff(diffs) < 0))
        ok = True
        for j in range(len(diffs) - 1):
            if times[j] <= 0:
                continue
            required = diffs[j] * (times[j] / times[j + 1]) * (1.0 + slack)
            if diffs[j + 1] > required:
                ok = False
                break
        verdict = "scattering" if ok else "not-scattering"

    if len(diffs) >= 2 and diffs[-2] > 0 and diffs[-1] < diffs[-2]:
        rho = diffs[-1] / diffs[-2]
        tail = float(diffs[-1] * rho / (1.0 - rho))
    elif np.all(diffs <= atol):
        tail = float(diffs[-1])
    else:
        tail = math.inf
    return CauchyReport(times=times, differences=diffs, verdict=verdict,
                        u_plus=u_plus, tail_estimate=tail, monotone_decreasing=monotone)


def asymptotic_profile(u_plus: ComplexField, t: float,
                       target_grid: Optional[SpatialGrid] = None) -> ComplexField:
    """The free-dispersion profile t^{-d/2} uhat_+(x/t) e^{i |x|^2 / (2t)}."""
    if t <= 0.0:
        raise ValueError("profile requires t > 0")
    grid = target_grid or u_plus.grid
    d = grid.dim
    pts = [grid.axis_nodes(a) / t for a in range(d)]
    fhat = continuum_fourier_at(u_plus, pts)
    chirp = np.exp(0.5j * grid.radius_squared / t)
    return ComplexField(t ** (-d / 2.0) * fhat * chirp, grid, check=False)


def asymptotic_profile_error(u: ComplexField, t: float, u_plus: ComplexField) -> float:
    """Relative L2 distance of u(t) from the standard free asymptotics."""
    prof = asymptotic_profile(u_plus, t, target_grid=u.grid)
    return l2_norm(u - prof) / l2_norm(u)


def repulsive_reference(u_plus: ComplexField, t: float, omega: float = 1.0,
                        target_grid: Optional[SpatialGrid] = None) -> ComplexField:
    """Large-time profile of the repulsive-trap linear flow, frequency omega.

    reference(t, x) = (omega / sinh(omega t))^{d/2}
                      F(u_+ e^{i omega |.|^2 / 2})(omega x / sinh(omega t))
                      e^{i omega coth(omega t) |x|^2 / 2},

    an L2-unitary evaluation whose Sigma norm grows like e^{omega t}; the
    frequency omega = sqrt(2) corresponds to V = -|x|^2 (Omega == -2) and
    omega = 1 to the half-strength trap usually quoted.
    """
    if t < 1.0:
        raise ValueError("reference is asymptotic; use t >= 1")
    grid = target_grid or u_plus.grid
    d = grid.dim
    sh = math.sinh(omega * t)
    ch = math.cosh(omega * t)
    chirped = ComplexField(
        u_plus.values * np.exp(0.5j * omega * u_plus.grid.radius_squared),
        u_plus.grid, check=False)
    pts = [omega * grid.axis_nodes(a) / sh for a in range(d)]
    fhat = continuum_fourier_at(chirped, pts)
    outer = np.exp(0.5j * omega * (ch / sh) * grid.radius_squared)
    return ComplexField((omega / sh) ** (d / 2.0) * fhat * outer, grid, check=False)
