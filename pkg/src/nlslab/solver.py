"""Strang-split pseudo-spectral time integration of

    i u_t + (1/2) Lap u = V(t,x) u + c(t) |u|^{2 sigma} u,

with c == 1 (autonomous defocusing), c == 0 (linear), or c = H(t)
(non-autonomous, produced by the lens machinery).

Each step is phase(dt/2 at t) -> kinetic(dt) -> phase(dt/2 at t+dt).  Both
substeps are exact flows: the phase multiplier leaves |u| pointwise
invariant and the kinetic step is a unimodular Fourier multiplier, so the
discrete mass is conserved to roundoff by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import potentials as pot
from .diagnostics import DiagnosticsConfig, compute_record
from .grid import ComplexField, SpatialGrid, l2_norm


class ConfigError(ValueError):
    """Invalid solver/scenario configuration."""


class NumericalGuardError(RuntimeError):
    """Raised when a run trips a discretization guard (blow-up or drift)."""

    def __init__(self, message: str, t: float, report: dict, trajectory=None):
        super().__init__(message)
        self.t = t
        self.report = report
        self.trajectory = trajectory


@dataclass(frozen=True)
class Coefficient:
    """Nonlinearity coefficient c(t): a constant or a time function."""

    kind: str  # "constant" | "timefun"
    value: float = 1.0
    fn: Optional[Callable[[float], float]] = None
    derivative: Optional[Callable[[float], float]] = None
    label: str = ""

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return self.value
        return float(self.fn(t))

    @property
    def is_zero(self) -> bool:
        return self.kind == "constant" and self.value == 0.0

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"


def coefficient_constant(value: float) -> Coefficient:
    return Coefficient("constant", value=float(value))


def coefficient_zero() -> Coefficient:
    return coefficient_constant(0.0)


def coefficient_timefun(fn, derivative=None, label="H") -> Coefficient:
    return Coefficient("timefun", fn=fn, derivative=derivative, label=label)


@dataclass(frozen=True)
class SolverConfig:
    sigma: float
    dt: float
    t_end: float
    coefficient: Coefficient = field(default_factory=lambda: coefficient_constant(1.0))
    dealias: Optional[bool] = None  # None -> on iff sigma >= 2
    snapshot_times: tuple = ()
    diagnostics_stride: int = 10
    start_time: float = 0.0
    mass_drift_tol: float = 1e-8
    gradient_blowup_factor: float = 1e6

    def validate(self, dim: int) -> None:
        if not (self.sigma > 0):
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if dim == 3 and not (self.sigma < 2.0):
            raise ConfigError(
                f"sigma={self.sigma} violates the energy-subcriticality constraint sigma < 2/(d-2) for d=3"
            )
        if not (self.dt > 0):
            raise ConfigError("dt must be positive")
        if self.t_end < self.start_time:
            raise ConfigError("t_end must be >= start time")
        if self.diagnostics_stride < 1:
            raise ConfigError("diagnostics stride must be >= 1")
        if self.coefficient.kind == "timefun":
            if abs(self.sigma - round(self.sigma)) > 1e-12 or self.sigma < 2.0 / dim:
                raise ConfigError(
                    "time-dependent nonlinearity coefficient requires integer sigma >= 2/d"
                )
        for ts in self.snapshot_times:
            if ts < self.start_time - 1e-12 or ts > self.t_end + 1e-12:
                raise ConfigError(f"snapshot time {ts} outside [{self.start_time}, {self.t_end}]")

    def dealias_enabled(self) -> bool:
        if self.dealias is None:
            return self.sigma >= 2
        return bool(self.dealias)


@dataclass
class Trajectory:
    """Recorded output of one evolution."""

    times: np.ndarray
    records: list
    snapshots: dict  # time -> ComplexField
    config: SolverConfig
    grid: SpatialGrid
    aborted: bool = False
    abort_report: Optional[dict] = None

    def series(self, name: str) -> np.ndarray:
        return np.array([rec.get(name) for rec in self.records])

    @property
    def final_state(self) -> Optional[ComplexField]:
        return self._final_state

    def __post_init__(self):
        self._final_state = None


def _expi(theta: np.ndarray) -> np.ndarray:
    """exp(-i theta) via separate cos/sin (faster than complex np.exp)."""
    out = np.empty(theta.shape, dtype=np.complex128)
    out.real = np.cos(theta)
    out.imag = np.sin(theta)
    np.conj(out, out=out)
    return out


def _density_power(values: np.ndarray, sigma: float) -> np.ndarray:
    rho = values.real**2 + values.imag**2
    if sigma == 1.0:
        return rho
    if sigma == 2.0:
        return rho * rho
    if sigma == 3.0:
        return rho * rho * rho
    return rho**sigma


class _Stepper:
    """Holds the precomputed multipliers for a fixed (grid, dt) pair."""

    def __init__(self, grid: SpatialGrid, potential: pot.PotentialSpec,
                 config: SolverConfig, dt: float):
        self.grid = grid
        self.potential = potential
        self.config = config
        self.dt = dt
        kin = np.exp(-0.5j * dt * grid.wavenumber_squared)
        if config.dealias_enabled():
            kin = kin * grid.dealias_mask
        self.kinetic = kin
        self.static_v = (
            pot.evaluate(potential, 0.0, grid) if potential.is_static else None
        )
        self.c = config.coefficient
        self.sigma = config.sigma

    def _phase(self, values: np.ndarray, t: float) -> np.ndarray:
        half = 0.5 * self.dt
        ct = self.c(t)
        if self.potential.variant == "zero" and ct == 0.0:
            return values
        v = self.static_v if self.static_v is not None else pot.evaluate(self.potential, t, self.grid)
        if ct != 0.0:
            theta = half * (v + ct * _density_power(values, self.sigma))
        else:
            theta = half * v
        return values * _expi(theta)

    def step(self, values: np.ndarray, t: float) -> np.ndarray:
        values = self._phase(values, t)
        spec = np.fft.fftn(values, norm="ortho")
        spec *= self.kinetic
        values = np.fft.ifftn(spec, norm="ortho")
        return self._phase(values, t + self.dt)


def step_strang(u: ComplexField, t: float, dt: float, potential: pot.PotentialSpec,
                config: SolverConfig) -> ComplexField:
    """One Strang step of length dt starting at time t."""
    stepper = _Stepper(u.grid, potential, config, dt)
    out = stepper.step(u.values.copy(), t)
    if not np.all(np.isfinite(out.view(np.float64))):
        raise NumericalGuardError("non-finite state after step (blow-up guard)", t + dt,
                                  {"reason": "non_finite"})
    return ComplexField(out, u.grid, check=False)


def evolve(u0: ComplexField, config: SolverConfig, potential: pot.PotentialSpec,
           diagnostics: DiagnosticsConfig | None = None) -> Trajectory:
    """Integrate from start_time to t_end with diagnostics every stride steps.

    Snapshot times are hit exactly: the step is shortened as needed at
    segment boundaries (dt acts as a ceiling), and a record is forced at
    every boundary.  Aborts with NumericalGuardError on non-finite states,
    gradient blow-up beyond gradient_blowup_factor times its initial value,
    or relative mass drift beyond mass_drift_tol (discretization failure).
    """
    grid = u0.grid
    config.validate(grid.dim)
    diagnostics = diagnostics or DiagnosticsConfig()

    t0, t1 = config.start_time, config.t_end
    snap_times = sorted(set(float(s) for s in config.snapshot_times))
    boundaries = sorted(set([t0, t1] + [s for s in snap_times if t0 < s < t1]))
    record_every = config.diagnostics_stride

    values = u0.values.astype(np.complex128).copy()
    rec0 = compute_record(ComplexField(values, grid, check=False), t0, potential,
                          config, diagnostics)
    mass0 = rec0.mass
    grad0 = math.sqrt(2.0 * rec0.kinetic)

    times = [t0]
    records = [rec0]
    snapshots = {}
    if snap_times and abs(snap_times[0] - t0) < 1e-12:
        snapshots[t0] = ComplexField(values.copy(), grid, check=False)

    traj = Trajectory(np.array(times), records, snapshots, config, grid)

    def guarded_record(t_now: float) -> None:
        if not np.all(np.isfinite(values.view(np.float64))):
            traj.aborted = True
            raise NumericalGuardError(
                "blow-up detected: non-finite state", t_now,
                {"reason": "non_finite", "t": t_now}, traj)
        rec = compute_record(ComplexField(values, grid, check=False), t_now,
                             potential, config, diagnostics)
        drift = abs(rec.mass - mass0) / mass0 if mass0 > 0 else 0.0
        if drift > config.mass_drift_tol:
            traj.aborted = True
            raise NumericalGuardError(
                f"mass drift {drift:.3e} exceeds tolerance (discretization failure)",
                t_now, {"reason": "mass_drift", "drift": drift, "t": t_now}, traj)
        grad = math.sqrt(2.0 * max(rec.kinetic, 0.0))
        if grad0 > 0 and grad > config.gradient_blowup_factor * grad0:
            traj.aborted = True
            raise NumericalGuardError(
                f"gradient norm grew by {grad / grad0:.3e} (blow-up guard)", t_now,
                {"reason": "gradient_blowup", "ratio": grad / grad0, "t": t_now}, traj)
        if t_now > times[-1] + 1e-14:
            times.append(t_now)
            records.append(rec)
            traj.times = np.array(times)

    step_index = 0
    for seg_start, seg_end in zip(boundaries[:-1], boundaries[1:]):
        seg_len = seg_end - seg_start
        n_steps = max(1, math.ceil(seg_len / config.dt - 1e-12))
        dt = seg_len / n_steps
        stepper = _Stepper(grid, potential, config, dt)
        for j in range(n_steps):
            values = stepper.step(values, seg_start + j * dt)
            step_index += 1
            is_boundary = j == n_steps - 1
            t_now = seg_end if is_boundary else seg_start + (j + 1) * dt
            if step_index % record_every == 0 or is_boundary:
                guarded_record(t_now)
        for s in snap_times:
            if abs(s - seg_end) < 1e-12:
                snapshots[s] = ComplexField(values.copy(), grid, check=False)

    traj.times = np.array(times)
    traj._final_state = ComplexField(values.copy(), grid, check=False)
    return traj


def initial_condition(kind: str, grid: SpatialGrid, **params) -> ComplexField:
    """Bundled initial data.

    gaussian(center, width, velocity): exp(-|x-c|^2/(2 w^2) + i v.x),
    normalized so the discrete L2 norm is exactly 1.
    plane_wave(amplitude, mode): A e^{i kappa.x} with kappa an exact grid
    mode (pi/L)*k.
    custom(values): verbatim values.
    """
    d = grid.dim
    if kind == "gaussian":
        center = np.atleast_1d(np.asarray(params.get("center", np.zeros(d)), dtype=float))
        width = float(params.get("width", 1.0))
        velocity = np.atleast_1d(np.asarray(params.get("velocity", np.zeros(d)), dtype=float))
        if center.size == 1 and d > 1:
            center = np.full(d, center[0])
        if velocity.size == 1 and d > 1:
            velocity = np.full(d, velocity[0])
        arg = np.zeros(grid.shape)
        phase = np.zeros(grid.shape)
        for a, X in enumerate(grid.meshes):
            arg = arg + (X - center[a]) ** 2
            phase = phase + velocity[a] * X
        values = np.exp(-arg / (2.0 * width**2) + 1j * phase)
        f = ComplexField(values, grid, check=False)
        nrm = l2_norm(f)
        if nrm == 0.0:
            raise ConfigError("gaussian initial state underflowed to zero on this grid")
        return ComplexField(values / nrm, grid, check=False)
    if kind == "plane_wave":
        amplitude = float(params.get("amplitude", 1.0))
        mode = params.get("mode", 1)
        kappa = grid.mode_wavenumber(mode)
        phase = np.zeros(grid.shape)
        for a, X in enumerate(grid.meshes):
            phase = phase + kappa[a] * X
        return ComplexField(amplitude * np.exp(1j * phase), grid, check=False)
    if kind == "custom":
        return ComplexField(np.asarray(params["values"], dtype=np.complex128), grid)
    raise ConfigError(f"unknown initial condition kind {kind!r}")
