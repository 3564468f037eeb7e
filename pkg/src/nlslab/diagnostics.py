"""Per-time-slice functionals and exact-identity checks.

A DiagnosticsRecord collects, at one time t: mass, kinetic/potential/
nonlinear energy pieces, the energy E and pseudo-energy (kinetic +
nonlinear + (1/2)||x u||^2), weighted-Sobolev sums sigma_k = sum over
|alpha|+|beta| <= k of ||x^alpha d^beta u||, radial momenta || |x|^k u ||,
Sobolev sums h_k, configured Lebesgue norms, the Galilean norm
||(x + i t grad) u||, and the rate integrands used by the identity checks.

Conventions: mixed terms apply the moment weight after the derivative
(x^alpha d^beta u); h_k sums the |alpha|=0 subset of sigma_k terms, so
h_k <= sigma_k holds exactly.  The nonlinear energy carries the run's
coefficient, (c(t)/(sigma+1))||u||^{2s+2}; with c == 1 this is the plain
defocusing energy term and with c == 0 it vanishes, which is exactly what
makes the E and pseudo-energy identities hold across linear and
non-autonomous runs alike.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
import numpy as np

from . import potentials as pot
from .grid import (ComplexField, SpatialGrid, boundary_amplitude_ratio,
                   l2_norm, l2_norm_values, lp_norm, moment_weight)


@dataclass(frozen=True)
class DiagnosticsConfig:
    max_k: int = 3                      # highest sigma/momentum/Sobolev order
    lr_exponents: tuple = ()            # extra Lebesgue norms to record
    boundary_metric: bool = True

    def __post_init__(self):
        if self.max_k < 1:
            raise ValueError("diagnostics order K must be >= 1")


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    kinetic: float
    potential_term: float
    nonlinear_term: float
    energy: float
    pseudo_energy: float
    sigma_norms: tuple          # k = 0 .. K
    momenta: tuple              # || |x|^k u ||, k = 1 .. K
    hk_norms: tuple             # k = 1 .. K
    lr_norms: dict
    j_norm: float
    y_value: float              # t^2 * nonlinear_term, v-frame runs only (else nan)
    pseudo_rate: float          # Im <u, (x - grad V) . grad u>
    energy_rate: float          # int dV/dt |u|^2 (nan if dV/dt unavailable)
    boundary_ratio: float

    _SCALARS = ("t", "mass", "kinetic", "potential_term", "nonlinear_term",
                "energy", "pseudo_energy", "j_norm", "y_value", "pseudo_rate",
                "energy_rate", "boundary_ratio")

    def get(self, name: str) -> float:
        """Column accessor: scalar names, 'sigma1', 'mom2', 'h1', 'L4', ..."""
        if name in self._SCALARS:
            return getattr(self, name)
        if name.startswith("sigma"):
            return self.sigma_norms[int(name[5:])]
        if name.startswith("mom"):
            return self.momenta[int(name[3:]) - 1]
        if name.startswith("h"):
            return self.hk_norms[int(name[1:]) - 1]
        if name.startswith("L"):
            return self.lr_norms[float(name[1:])]
        raise KeyError(name)


def multi_index_pairs(dim: int, max_total: int):
    """All (alpha, beta) pairs of d-dim multi-indices with |alpha|+|beta| <= max_total."""
    singles = []
    for total in range(max_total + 1):
        for combo in itertools.combinations_with_replacement(range(dim), total):
            idx = [0] * dim
            for a in combo:
                idx[a] += 1
            singles.append(tuple(idx))
    out = []
    for alpha in singles:
        for beta in singles:
            if sum(alpha) + sum(beta) <= max_total:
                out.append((alpha, beta))
    return out


def _derivative_values(spec_values: np.ndarray, grid: SpatialGrid, beta) -> np.ndarray:
    m = None
    for a, b in enumerate(beta):
        if b:
            term = (1j * grid.wavenumber_meshes[a]) ** b
            m = term if m is None else m * term
    if m is None:
        return np.fft.ifftn(spec_values, norm="ortho")
    return np.fft.ifftn(spec_values * m, norm="ortho")


def sigma_norm(u: ComplexField, k: int) -> float:
    """sum over |alpha|+|beta| <= k of ||x^alpha d^beta u||_L2."""
    grid = u.grid
    spec = np.fft.fftn(u.values, norm="ortho")
    total = 0.0
    cache = {}
    for alpha, beta in multi_index_pairs(grid.dim, k):
        if beta not in cache:
            cache[beta] = _derivative_values(spec, grid, beta)
        vals = cache[beta]
        if any(alpha):
            vals = moment_weight(grid, alpha) * vals
        total += l2_norm_values(vals, grid)
    return total


def hk_norm(u: ComplexField, k: int) -> float:
    """sum over |beta| <= k of ||d^beta u||_L2 (the alpha = 0 slice of sigma_k)."""
    grid = u.grid
    spec = np.fft.fftn(u.values, norm="ortho")
    total = 0.0
    for alpha, beta in multi_index_pairs(grid.dim, k):
        if any(alpha):
            continue
        total += l2_norm_values(_derivative_values(spec, grid, beta), grid)
    return total


def j_norm(v: ComplexField, t: float) -> float:
    """|| (x + i t grad) v ||_L2; at t=0 this is ||x v||."""
    grid = v.grid
    spec = np.fft.fftn(v.values, norm="ortho")
    acc = 0.0
    for a in range(grid.dim):
        dv = _derivative_values(spec, grid, tuple(1 if b == a else 0 for b in range(grid.dim)))
        comp = grid.meshes[a] * v.values + 1j * t * dv
        acc += l2_norm_values(comp, grid) ** 2
    return math.sqrt(acc)


def compute_record(u: ComplexField, t: float, potential: pot.PotentialSpec,
                   config, diagnostics: DiagnosticsConfig) -> DiagnosticsRecord:
    """All per-slice functionals; one spectral transform shared throughout."""
    grid = u.grid
    vol = grid.cell_volume
    values = u.values
    K = diagnostics.max_k
    sigma = config.sigma
    coeff = config.coefficient(t)

    rho = values.real**2 + values.imag**2
    mass = float(np.sum(rho) * vol)

    spec = np.fft.fftn(values, norm="ortho")
    spec_mod2 = spec.real**2 + spec.imag**2
    kinetic = 0.5 * float(np.sum(grid.wavenumber_squared * spec_mod2) * vol)

    v_field = pot.evaluate(potential, t, grid)
    potential_term = float(np.sum(v_field * rho) * vol)

    q = 2.0 * sigma + 2.0
    lq = float((np.sum(rho ** (q / 2.0)) * vol))  # ||u||_{L^q}^q
    nonlinear_term = coeff / (sigma + 1.0) * lq

    mom_sq = grid.radius_squared
    xnorm_sq = float(np.sum(mom_sq * rho) * vol)  # ||x u||^2 = || |x| u ||^2

    energy = kinetic + nonlinear_term + potential_term
    pseudo = kinetic + nonlinear_term + 0.5 * xnorm_sq

    # sigma_k, momenta, h_k (share the derivative cache)
    cache = {}
    sig = [0.0] * (K + 1)
    hk = [0.0] * (K + 1)
    for alpha, beta in multi_index_pairs(grid.dim, K):
        order = sum(alpha) + sum(beta)
        if beta not in cache:
            cache[beta] = _derivative_values(spec, grid, beta)
        vals = cache[beta]
        if any(alpha):
            vals = moment_weight(grid, alpha) * vals
        nrm = l2_norm_values(vals, grid)
        for k in range(order, K + 1):
            sig[k] += nrm
            if not any(alpha):
                hk[k] += nrm
    momenta = []
    for k in range(1, K + 1):
        momenta.append(float(np.sqrt(np.sum(mom_sq**k * rho) * vol)))

    lr = {}
    for r in diagnostics.lr_exponents:
        lr[float(r)] = lp_norm(u, float(r))

    # J norm (gradient components from the cached first derivatives)
    jacc = 0.0
    pseudo_rate_acc = 0.0j
    gradV = pot.gradient(potential, t, grid)
    for a in range(grid.dim):
        beta = tuple(1 if b == a else 0 for b in range(grid.dim))
        if beta not in cache:
            cache[beta] = _derivative_values(spec, grid, beta)
        da = cache[beta]
        comp = grid.meshes[a] * values + 1j * t * da
        jacc += float(np.sum(comp.real**2 + comp.imag**2) * vol)
        pseudo_rate_acc += np.sum(np.conj(values) * (grid.meshes[a] - gradV[a]) * da) * vol
    jn = math.sqrt(jacc)
    pseudo_rate = float(np.imag(pseudo_rate_acc))

    dtv = pot.time_derivative_field(potential, t, grid)
    energy_rate = float(np.sum(dtv * rho) * vol) if dtv is not None else float("nan")

    y_value = t * t * nonlinear_term if config.coefficient.kind == "timefun" else float("nan")

    boundary = boundary_amplitude_ratio(u) if diagnostics.boundary_metric else float("nan")

    return DiagnosticsRecord(
        t=float(t), mass=mass, kinetic=kinetic, potential_term=potential_term,
        nonlinear_term=nonlinear_term, energy=energy, pseudo_energy=pseudo,
        sigma_norms=tuple(sig), momenta=tuple(momenta), hk_norms=tuple(hk[1:]),
        lr_norms=lr, j_norm=jn, y_value=y_value, pseudo_rate=pseudo_rate,
        energy_rate=energy_rate, boundary_ratio=boundary,
    )


def _rate_defects(times: np.ndarray, series: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """|centered difference of series - rate| at interior record times."""
    if len(times) < 3:
        raise ValueError("rate check needs at least 3 records")
    num = series[2:] - series[:-2]
    den = times[2:] - times[:-2]
    return np.abs(num / den - rates[1:-1])


def pseudo_energy_rate_check(trajectory, tol_coefficient: float = 0.1) -> dict:
    """Check d(pseudoE)/dt = Im <u, (x - grad V) . grad u> along a run.

    Supported for constant nonlinearity coefficients (the time-function
    case picks up an extra cdot term not recorded here).  Passes when the
    max interior defect is below tol_coefficient * (record spacing)^2.
    """
    cfg = trajectory.config
    if cfg.coefficient.kind != "constant":
        raise ValueError("pseudo-energy rate check requires a constant nonlinearity coefficient")
    times = trajectory.times
    pe = trajectory.series("pseudo_energy")
    rate = trajectory.series("pseudo_rate")
    defects = _rate_defects(times, pe, rate)
    spacing = float(np.median(np.diff(times)))
    tol = tol_coefficient * spacing**2
    return {
        "max_defect": float(defects.max()),
        "tolerance": tol,
        "passes": bool(defects.max() <= tol),
        "record_spacing": spacing,
        "defects": defects,
    }


def energy_rate_check(trajectory, tol_coefficient: float = 0.1) -> dict:
    """Check dE/dt = int dV/dt |u|^2 (requires a differentiable-in-t potential)."""
    cfg = trajectory.config
    if cfg.coefficient.kind != "constant":
        raise ValueError("energy rate check requires a constant nonlinearity coefficient")
    times = trajectory.times
    e = trajectory.series("energy")
    rate = trajectory.series("energy_rate")
    if np.any(np.isnan(rate)):
        raise ValueError("potential does not provide an analytic time derivative")
    defects = _rate_defects(times, e, rate)
    spacing = float(np.median(np.diff(times)))
    tol = tol_coefficient * spacing**2
    return {
        "max_defect": float(defects.max()),
        "tolerance": tol,
        "passes": bool(defects.max() <= tol),
        "record_spacing": spacing,
        "defects": defects,
    }


def decay_check(trajectory, r: float, t_min: float = 1.0, slack: float = 0.2) -> dict:
    """Check the dispersive bound ||v||_Lr <= C t^-delta ||v||^(1-delta) ||J v||^delta.

    delta = d(1/2 - 1/r).  Reports the fitted (maximal) constant over
    t >= t_min and flags a power-law violation when the ratio series grows
    beyond (1 + slack) of its running minimum-based envelope.
    """
    grid_dim = trajectory.grid.dim
    if r < 2:
        raise ValueError("r must be >= 2")
    if grid_dim >= 3 and r > 2.0 * grid_dim / (grid_dim - 2.0):
        raise ValueError("r outside the Gagliardo-Nirenberg range for this dimension")
    delta = grid_dim * (0.5 - 1.0 / r)
    times = trajectory.times
    sel = times >= t_min
    if sel.sum() < 3:
        raise ValueError("not enough records beyond t_min")
    ts = times[sel]
    mass = trajectory.series("mass")[sel]
    l2 = np.sqrt(mass)
    if float(r) == 2.0:
        lr = l2.copy()
    else:
        lr = np.array([rec.lr_norms[float(r)] for rec, keep in
                       zip(trajectory.records, sel) if keep])
    jns = trajectory.series("j_norm")[sel]
    denom = l2 ** (1.0 - delta) * np.where(jns > 0, jns, 1.0) ** delta
    ratios = lr * ts**delta / denom
    fitted_c = float(ratios.max())
    ok = bool(ratios[-1] <= (1.0 + slack) * max(ratios[0], ratios.min()))
    return {
        "delta": delta,
        "fitted_constant": fitted_c,
        "power_law_ok": ok,
        "times": ts,
        "ratios": ratios,
    }
