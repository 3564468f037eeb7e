"""Time-dependent potential catalog, smoothness/uniformity falsifier, and
the t^2*Omega(t) sharpness classifier.

Potentials are at most quadratic in space: V(t,x) = (1/2) <Q(t) x, x> in the
harmonic variants, with the isotropic special case V = (1/2) Omega(t) |x|^2.
The "assumption verifier" is a sampler, not a prover: it reports sampled sup
bounds of |d^a V| for 2 <= |a| <= max_order and of |V| on the unit ball and
compares them with a configured threshold.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import SpatialGrid


def japanese_bracket(t):
    """<t> = sqrt(1 + t^2)."""
    return np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2)


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class Omega:
    """Scalar time profile Omega(t) with an optional analytic derivative."""

    fn: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    @property
    def differentiable(self) -> bool:
        return self.derivative is not None


def omega_constant(c: float) -> Omega:
    return Omega(lambda t: np.full_like(np.asarray(t, dtype=float), c),
                 lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                 "constant", {"c": float(c)})


def omega_power_decay(c: float, gamma: float) -> Omega:
    """Omega(t) = c / <t>^gamma."""
    c, gamma = float(c), float(gamma)

    def fn(t):
        return c * japanese_bracket(t) ** (-gamma)

    def dfn(t):
        t = np.asarray(t, dtype=float)
        return -c * gamma * t * japanese_bracket(t) ** (-gamma - 2.0)

    return Omega(fn, dfn, "power_decay", {"c": c, "gamma": gamma})


def omega_oscillatory() -> Omega:
    """Omega(t) = cos(e^t) / <t>^3, rapidly oscillatory but decaying."""

    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.cos(np.exp(t)) * japanese_bracket(t) ** (-3.0)

    def dfn(t):
        t = np.asarray(t, dtype=float)
        jb = japanese_bracket(t)
        return -np.exp(t) * np.sin(np.exp(t)) * jb ** (-3.0) - 3.0 * t * np.cos(np.exp(t)) * jb ** (-5.0)

    # The derivative exists but is wildly oscillatory; time-stepping order
    # guarantees degrade for this entry (see solver notes).
    return Omega(fn, dfn, "oscillatory", {})


def omega_custom(fn, derivative=None, label="custom", **params) -> Omega:
    return Omega(fn, derivative, label, dict(params))


@dataclass(frozen=True)
class PotentialSpec:
    """One entry of the potential catalog.

    variant: "zero" | "isotropic" | "matrix" | "repulsive" | "tabulated" | "custom"
      isotropic : V = (1/2) Omega(t) |x|^2
      matrix    : V = (1/2) <Q(t) x, x>, Q symmetric
      repulsive : V = -|x|^2  (Omega == -2)
      tabulated : V linearly interpolated in t between sampled node fields
      custom    : arbitrary callable V(t, points) for analysis paths
    """

    variant: str
    omega: Optional[Omega] = None
    q_matrix: Optional[Callable] = None
    q_matrix_dot: Optional[Callable] = None
    tab_times: Optional[np.ndarray] = None
    tab_values: Optional[np.ndarray] = None
    custom_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.variant not in ("zero", "isotropic", "matrix", "repulsive", "tabulated", "custom"):
            raise PotentialError(f"unknown potential variant {self.variant!r}")
        if self.variant == "isotropic" and self.omega is None:
            raise PotentialError("isotropic variant requires an Omega profile")
        if self.variant == "matrix" and self.q_matrix is None:
            raise PotentialError("matrix variant requires Q(t)")
        if self.variant == "tabulated" and (self.tab_times is None or self.tab_values is None):
            raise PotentialError("tabulated variant requires times and values")
        if self.variant == "custom" and self.custom_fn is None:
            raise PotentialError("custom variant requires a callable")

    @property
    def is_static(self) -> bool:
        if self.variant in ("zero", "repulsive"):
            return True
        if self.variant == "isotropic":
            return self.omega.label == "constant"
        return False

    def effective_omega(self) -> Optional[Omega]:
        if self.variant == "isotropic":
            return self.omega
        if self.variant == "repulsive":
            return omega_constant(-2.0)
        if self.variant == "zero":
            return omega_constant(0.0)
        return None


def potential_zero() -> PotentialSpec:
    return PotentialSpec("zero")


def potential_isotropic(omega: Omega) -> PotentialSpec:
    return PotentialSpec("isotropic", omega=omega)


def potential_repulsive() -> PotentialSpec:
    return PotentialSpec("repulsive")


def potential_matrix(q: Callable, q_dot: Callable | None = None) -> PotentialSpec:
    return PotentialSpec("matrix", q_matrix=q, q_matrix_dot=q_dot)


def potential_tabulated(times, values) -> PotentialSpec:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    if times.ndim != 1 or len(times) != values.shape[0]:
        raise PotentialError("tabulated samples need matching times and values")
    return PotentialSpec("tabulated", tab_times=times, tab_values=values)


def potential_custom(fn: Callable) -> PotentialSpec:
    return PotentialSpec("custom", custom_fn=fn)


def _symmetrized_q(spec: PotentialSpec, t: float) -> np.ndarray:
    q = np.asarray(spec.q_matrix(t), dtype=float)
    return 0.5 * (q + q.T)


def evaluate(spec: PotentialSpec, t: float, grid: SpatialGrid) -> np.ndarray:
    """Real field V(t, .) on the grid nodes (exact for harmonic variants)."""
    if spec.variant == "zero":
        return np.zeros(grid.shape)
    if spec.variant == "repulsive":
        return -grid.radius_squared
    if spec.variant == "isotropic":
        return 0.5 * float(spec.omega(t)) * grid.radius_squared
    if spec.variant == "matrix":
        q = _symmetrized_q(spec, t)
        X = grid.meshes
        out = np.zeros(grid.shape)
        for a in range(grid.dim):
            for b in range(grid.dim):
                out += q[a, b] * X[a] * X[b]
        return 0.5 * out
    if spec.variant == "custom":
        pts = np.stack([X.ravel() for X in grid.meshes], axis=-1)
        return np.asarray(spec.custom_fn(t, pts), dtype=float).reshape(grid.shape)
    # tabulated
    times, vals = spec.tab_times, spec.tab_values
    if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise PotentialError(f"tabulated potential queried at t={t} outside [{times[0]}, {times[-1]}]")
    if vals.shape[1:] != grid.shape:
        raise PotentialError("tabulated values do not match grid shape")
    i = int(np.clip(np.searchsorted(times, t) - 1, 0, len(times) - 2))
    w = (t - times[i]) / (times[i + 1] - times[i]) if times[i + 1] > times[i] else 0.0
    w = float(np.clip(w, 0.0, 1.0))
    return (1.0 - w) * vals[i] + w * vals[i + 1]


def evaluate_at_points(spec: PotentialSpec, t: float, points: np.ndarray) -> np.ndarray:
    """V(t, .) at arbitrary points (m, d); used by the assumption sampler."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if spec.variant == "zero":
        return np.zeros(len(points))
    if spec.variant == "repulsive":
        return -np.sum(points**2, axis=1)
    if spec.variant == "isotropic":
        return 0.5 * float(spec.omega(t)) * np.sum(points**2, axis=1)
    if spec.variant == "matrix":
        q = _symmetrized_q(spec, t)
        return 0.5 * np.einsum("mi,ij,mj->m", points, q, points)
    if spec.variant == "custom":
        return np.asarray(spec.custom_fn(t, points), dtype=float)
    raise PotentialError("tabulated potentials support grid evaluation only")


def gradient(spec: PotentialSpec, t: float, grid: SpatialGrid) -> list[np.ndarray]:
    """grad V(t, .) on the grid, analytic for the quadratic catalog."""
    if spec.variant == "zero":
        return [np.zeros(grid.shape) for _ in range(grid.dim)]
    if spec.variant == "repulsive":
        return [-2.0 * X for X in grid.meshes]
    if spec.variant == "isotropic":
        w = float(spec.omega(t))
        return [w * X for X in grid.meshes]
    if spec.variant == "matrix":
        q = _symmetrized_q(spec, t)
        X = grid.meshes
        return [sum(q[a, b] * X[b] for b in range(grid.dim)) for a in range(grid.dim)]
    # Fall back to spectral differentiation of the sampled field.
    from . import grid as g

    V = g.ComplexField(evaluate(spec, t, grid).astype(complex), grid, check=False)
    out = []
    for a in range(grid.dim):
        beta = [0] * grid.dim
        beta[a] = 1
        out.append(g.derivative(V, beta).values.real)
    return out


def time_derivative_field(spec: PotentialSpec, t: float, grid: SpatialGrid) -> Optional[np.ndarray]:
    """d/dt V(t, .) when an analytic time derivative is available, else None."""
    if spec.variant in ("zero", "repulsive"):
        return np.zeros(grid.shape)
    if spec.variant == "isotropic" and spec.omega.differentiable:
        return 0.5 * float(spec.omega.derivative(t)) * grid.radius_squared
    if spec.variant == "matrix" and spec.q_matrix_dot is not None:
        qd = np.asarray(spec.q_matrix_dot(t), dtype=float)
        qd = 0.5 * (qd + qd.T)
        X = grid.meshes
        out = np.zeros(grid.shape)
        for a in range(grid.dim):
            for b in range(grid.dim):
                out += qd[a, b] * X[a] * X[b]
        return 0.5 * out
    return None


def _multi_indices(dim: int, order: int):
    """All multi-indices of exact total order."""
    for combo in itertools.combinations_with_replacement(range(dim), order):
        alpha = [0] * dim
        for a in combo:
            alpha[a] += 1
        yield tuple(alpha)


def _central_difference(spec, t, points, alpha, h):
    """Nested central differences for d^alpha V at each point."""
    # Build the tensor-product stencil (offsets, coefficients).
    offsets = [np.zeros(len(alpha))]
    coeffs = [1.0]
    for axis, order in enumerate(alpha):
        for _ in range(order):
            new_offsets, new_coeffs = [], []
            for off, cf in zip(offsets, coeffs):
                for sgn in (+1.0, -1.0):
                    shifted = off.copy()
                    shifted[axis] += sgn * h
                    new_offsets.append(shifted)
                    new_coeffs.append(cf * sgn / (2.0 * h))
            offsets, coeffs = new_offsets, new_coeffs
    acc = np.zeros(len(points))
    for off, cf in zip(offsets, coeffs):
        acc += cf * evaluate_at_points(spec, t, points + off)
    return acc


def _unit_ball_points(dim: int, x_samples: np.ndarray) -> np.ndarray:
    pts = [np.zeros(dim)]
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = 1.0
        pts.extend([e, -e])
    norms = np.linalg.norm(x_samples, axis=1)
    for x, r in zip(x_samples, norms):
        if r > 1e-12:
            u = x / r
            for s in (0.25, 0.5, 0.75, 1.0):
                pts.append(s * u)
    return np.unique(np.round(np.array(pts), 12), axis=0)


def verify_assumption(spec: PotentialSpec, t_samples, x_samples, max_order: int = 3,
                      h: float = 1e-3, threshold: float = 100.0) -> dict:
    """Sampled falsifier of the at-most-quadratic-uniformly-in-time hypothesis.

    Reports sup over samples of |d^alpha V| for 2 <= |alpha| <= max_order
    (central finite differences, step h) and sup |V| on the unit ball;
    passes iff every sampled bound is finite and below `threshold`.
    """
    t_samples = np.atleast_1d(np.asarray(t_samples, dtype=float))
    x_samples = np.atleast_2d(np.asarray(x_samples, dtype=float))
    if t_samples.size == 0 or x_samples.size == 0:
        raise PotentialError("verify_assumption needs nonempty samples")
    if max_order < 2:
        raise PotentialError("max_order must be >= 2")
    dim = x_samples.shape[1]

    worst = {}
    for order in range(2, max_order + 1):
        bound = 0.0
        for alpha in _multi_indices(dim, order):
            for t in t_samples:
                vals = _central_difference(spec, float(t), x_samples, alpha, h)
                bound = max(bound, float(np.max(np.abs(vals))))
        worst[order] = bound

    ball = _unit_ball_points(dim, x_samples)
    sup_ball = 0.0
    for t in t_samples:
        sup_ball = max(sup_ball, float(np.max(np.abs(evaluate_at_points(spec, float(t), ball)))))

    finite = all(math.isfinite(b) for b in worst.values()) and math.isfinite(sup_ball)
    passes = finite and all(b <= threshold for b in worst.values()) and sup_ball <= threshold
    return {
        "passes": bool(passes),
        "worst_bounds": worst,
        "sup_unit_ball": sup_ball,
        "threshold": threshold,
        "max_order": max_order,
    }


def sharpness_classifier(omega: Omega, t_max: float, n_samples: int = 20001,
                         margin: float = 0.05) -> dict:
    """Estimate limsup t^2 Omega(t) and classify against the 1/4 threshold.

    Below 1/4 the Hill solutions have finitely many zeros (non-oscillatory
    regime, lens transform available near infinity); above, infinitely many.
    """
    if t_max < 100.0:
        raise PotentialError("sharpness classifier needs a horizon t_max >= 100")
    ts = np.linspace(0.5 * t_max, t_max, n_samples)
    estimate = float(np.max(ts**2 * omega(ts)))
    if estimate < 0.25 - margin:
        regime = "non_oscillatory"
    elif estimate > 0.25 + margin:
        regime = "oscillatory"
    else:
        regime = "inconclusive"
    return {"limsup_estimate": estimate, "regime": regime, "margin": margin, "t_max": t_max}
