"""Strichartz exponent bookkeeping, the Gronwall envelope of the pseudo
energy, the interval-splitting recursion that mechanizes the double
exponential bound, and growth-law fitting/classification.

The recursion ledger is numeric bookkeeping only: it evaluates the explicit
constants of the interval-splitting argument (absorption step size tau with
C tau^alpha e^{Ct} = 1/10, N = ceil(t/tau) intervals, per-interval factor
20C/9, or 10C/9 on the L-infinity branch) and is deliberately independent
of any PDE data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np


class BoundsError(ValueError):
    pass


def delta_exponent(q: float, d: int) -> float:
    """delta(q) = d (1/2 - 1/q); q = inf allowed."""
    if q == math.inf:
        return d * 0.5
    return d * (0.5 - 1.0 / q)


def admissible(q: float, d: int) -> dict:
    """Admissibility of the pair (p, q) with 2/p = delta(q).

    Range: 2 <= q <= inf for d = 1, 2 <= q < inf for d = 2, and
    2 <= q < 2d/(d-2) for d >= 3 (endpoint excluded).
    """
    if d not in (1, 2, 3):
        raise BoundsError("dimension must be 1, 2 or 3")
    if q < 2:
        return {"is_admissible": False, "p": math.nan, "delta": math.nan}
    if d == 1:
        ok = True
    elif d == 2:
        ok = q < math.inf
    else:
        ok = q < 2.0 * d / (d - 2.0)
    delta = delta_exponent(q, d)
    p = math.inf if delta == 0.0 else 2.0 / delta
    return {"is_admissible": bool(ok), "p": p, "delta": delta}


@dataclass(frozen=True)
class ExponentSet:
    """The exponent chain q = 2s+2, p = (4s+4)/(ds), theta = 2s(2s+2)/(2-(d-2)s)."""

    d: int
    sigma: float
    q: float
    p: float
    theta: float
    delta: float

    def holder_defects(self) -> dict:
        """Exactness of 1/q' = 2s/q + 1/q, 1/p' = 2s/theta + 1/p, 2/p = delta(q)."""
        s = self.sigma
        d1 = abs((1.0 - 1.0 / self.q) - (2.0 * s / self.q + 1.0 / self.q))
        d2 = abs((1.0 - 1.0 / self.p) - (2.0 * s / self.theta + 1.0 / self.p))
        d3 = abs(2.0 / self.p - self.delta)
        return {"q_conjugate": d1, "p_conjugate": d2, "admissibility": d3}

    @property
    def alpha(self) -> float:
        """Absorption exponent 2 sigma / theta (lies in (0,1) when subcritical)."""
        return 2.0 * self.sigma / self.theta


def exponent_set(d: int, sigma: float) -> ExponentSet:
    if d not in (1, 2, 3):
        raise BoundsError("dimension must be 1, 2 or 3")
    if sigma <= 0:
        raise BoundsError("sigma must be positive")
    if d == 3 and sigma >= 2.0 / (d - 2.0):
        raise BoundsError(f"sigma={sigma} is not energy-subcritical for d={d}")
    q = 2.0 * sigma + 2.0
    p = (4.0 * sigma + 4.0) / (d * sigma)
    theta = 2.0 * sigma * (2.0 * sigma + 2.0) / (2.0 - (d - 2.0) * sigma)
    es = ExponentSet(d=d, sigma=float(sigma), q=q, p=p, theta=theta,
                     delta=delta_exponent(q, d))
    chk = admissible(q, d)
    if not chk["is_admissible"]:
        raise BoundsError(f"(p,q)=({p},{q}) not admissible for d={d}")
    return es


# ---------------------------------------------------------------------------
# Gronwall envelope
# ---------------------------------------------------------------------------

def gronwall_envelope(times, values) -> dict:
    """Empirically minimal C0 with dE/dt <= C0 (1 + E) and its envelope.

    C0 is the largest per-interval slope of log(1 + E); by telescoping the
    envelope E(t) <= (1 + E(0)) e^{C0 t} - 1 then holds pointwise on the
    series, which is re-verified to guard the arithmetic.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 2:
        raise BoundsError("need at least two samples")
    if np.any(values < -1.0):
        raise BoundsError("series must stay above -1 for the log-slope estimate")
    logs = np.log1p(values)
    slopes = np.diff(logs) / np.diff(times)
    c0 = float(slopes.max())
    envelope = (1.0 + values[0]) * np.exp(c0 * (times - times[0])) - 1.0
    ok = bool(np.all(values <= envelope * (1.0 + 1e-12) + 1e-12))
    return {"C0_min": c0, "envelope_ok": ok, "envelope": envelope}


# ---------------------------------------------------------------------------
# Interval-splitting recursion ledger
# ---------------------------------------------------------------------------

@dataclass
class LedgerResult:
    C: float
    alpha: float
    tau0: float
    t: float
    w0: float
    f_of_t: float
    tau: float
    n_intervals: int
    factor: float           # 20/9 (Lp branch) or 10/9 (Linf branch)
    bound: float
    trace: np.ndarray       # rows (j, t_j, B_j)
    C1: float
    variant: str
    absorb_ratio: float

    def double_exp_envelope(self, t: float) -> float:
        return self.C1 * math.exp(math.exp(self.C1 * t)) * (self.w0 + self.f_of_t)


def _geometric_bound(k: float, C: float, n: int, w0: float, ft: float) -> float:
    """Closed form of the recursion, evaluated in log space: may return inf."""
    if w0 == 0.0 and ft == 0.0:
        return 0.0
    kc = k * C
    if kc == 1.0:
        return w0 + k * ft * n
    log_kcn = n * math.log(kc)
    if log_kcn > 700.0:
        return math.inf if (w0 > 0.0 or ft > 0.0) else 0.0
    kcn = math.exp(log_kcn)
    return kcn * w0 + k * ft * (kcn - 1.0) / (kc - 1.0)


def absorption_tau(C: float, alpha: float, t: float, absorb_ratio: float = 0.1,
                   variant: str = "general") -> float:
    """Solve C tau^alpha e^{Ct} = absorb_ratio (e^{Ct} dropped for 'confining')."""
    if variant == "general":
        return (absorb_ratio / C) ** (1.0 / alpha) * math.exp(-C * t / alpha)
    if variant == "confining":
        return (absorb_ratio / C) ** (1.0 / alpha)
    raise BoundsError(f"unknown ledger variant {variant!r}")


def double_exp_ledger(C: float, alpha: float, tau0: float, f, t: float, w0: float,
                      variant: str = "general", branch: str = "lp",
                      absorb_ratio: float = 0.1, trace_cap: int = 200_000) -> LedgerResult:
    """Evaluate the interval-splitting recursion B_j = k (C B_{j-1} + f(t)).

    tau solves C tau^alpha e^{Ct} = absorb_ratio exactly (clamped to tau0
    and to t so the ledger is total on t >= 0); N = ceil(t / tau);
    k = 20/9 for the Lp branch, 10/9 for the L-infinity branch.  The
    'confining' variant drops the e^{Ct} factor, making tau t-independent
    and N linear in t (single-exponential shape).  The reported C1 is the
    smallest constant with B_N <= C1 e^{e^{C1 t}} (w0 + f(t)).

    When N exceeds trace_cap the explicit recursion is replaced by its
    exact geometric closed form evaluated in log space (the trace is then
    truncated) so absurd parameter corners stay total instead of hanging.
    """
    if C <= 0 or alpha <= 0 or tau0 <= 0:
        raise BoundsError("C, alpha, tau0 must be positive")
    if t < 0 or w0 < 0:
        raise BoundsError("t and w0 must be nonnegative")
    f_fn = f if callable(f) else (lambda _t, _v=float(f): _v)
    ft = float(f_fn(t))
    if ft < 0:
        raise BoundsError("f must be nonnegative")

    k = {"lp": 20.0 / 9.0, "linf": 10.0 / 9.0}.get(branch)
    if k is None:
        raise BoundsError(f"unknown branch {branch!r}")

    tau_star = absorption_tau(C, alpha, t, absorb_ratio, variant)
    tau = min(tau0, tau_star) if t == 0.0 else min(tau0, tau_star, t)
    n = 0 if t == 0.0 else int(math.ceil(t / tau - 1e-12))

    if n <= trace_cap:
        rows = [(0, 0.0, w0)]
        b = float(w0)
        for j in range(1, n + 1):
            b = k * (C * b + ft)
            rows.append((j, min(j * tau, t), b))
        trace = np.array(rows)
        bound = b
    else:
        bound = _geometric_bound(k, C, n, w0, ft)
        trace = np.array([(0, 0.0, w0), (n, t, bound)])

    # Smallest C1 with C1 e^{e^{C1 t}} (w0 + ft) >= bound.
    if bound <= 0.0 or (w0 + ft) <= 0.0:
        c1 = 0.0
    elif not math.isfinite(bound):
        c1 = math.inf
    else:
        target = bound / (w0 + ft)

        def h(c1):
            return c1 * math.exp(min(math.exp(min(c1 * t, 700.0)), 700.0)) - target

        lo, hi = 1e-12, 1.0
        while h(hi) < 0 and hi < 1e6:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if h(mid) < 0:
                lo = mid
            else:
                hi = mid
        c1 = hi

    return LedgerResult(C=C, alpha=alpha, tau0=tau0, t=t, w0=w0, f_of_t=ft,
                        tau=tau, n_intervals=n, factor=k, bound=bound, trace=trace,
                        C1=c1, variant=variant, absorb_ratio=absorb_ratio)


def iterated_ledger(C: float, alpha: float, tau0: float, t: float, w0: float,
                    levels: int, base_f: float = 0.0, variant: str = "general") -> list:
    """Drive the ledger k times with f = previous level's bound.

    Numeric shadow of the order-by-order induction: level 1 uses f = base_f,
    level j feeds level j-1's bound in as its non-decreasing forcing term.
    """
    if levels < 1:
        raise BoundsError("levels must be >= 1")
    out = []
    f_prev = base_f
    for _ in range(levels):
        res = double_exp_ledger(C, alpha, tau0, f_prev, t, w0, variant=variant)
        out.append(res)
        f_prev = res.bound
    return out


# ---------------------------------------------------------------------------
# Growth-law fitting
# ---------------------------------------------------------------------------

MODELS = ("bounded", "poly", "exp", "double_exp")


@dataclass
class GrowthFit:
    model: str
    params: dict
    residual: float     # rms misfit of log y (common scale across models)

    def predict(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.model == "bounded":
            return np.full_like(t, p["level"])
        if self.model == "poly":
            return p["coefficient"] * t ** p["exponent"]
        if self.model == "exp":
            return p["prefactor"] * np.exp(p["rate"] * t)
        return np.exp(p["inner_prefactor"] * np.exp(p["rate"] * t))


def _lsq_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    A = np.vstack([x, np.ones_like(x)]).T
    slope, intercept = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(slope), float(intercept)


def growth_fit(times, values, model: str) -> GrowthFit:
    """Least-squares fit of one growth law; residual is rms in log y."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(t) < 10:
        raise BoundsError("growth_fit needs at least 10 samples")
    if np.any(y <= 0.0):
        raise BoundsError("growth_fit needs positive values")
    logy = np.log(y)
    if model == "bounded":
        level = float(np.exp(logy.mean()))
        resid = float(np.sqrt(np.mean((logy - logy.mean()) ** 2)))
        return GrowthFit("bounded", {"level": level}, resid)
    if model == "poly":
        mask = t > 0
        if mask.sum() < 10:
            raise BoundsError("poly fit needs at least 10 samples with t > 0")
        k, c = _lsq_line(np.log(t[mask]), logy[mask])
        resid = float(np.sqrt(np.mean((logy[mask] - (k * np.log(t[mask]) + c)) ** 2)))
        return GrowthFit("poly", {"exponent": k, "coefficient": float(np.exp(c))}, resid)
    if model == "exp":
        r, c = _lsq_line(t, logy)
        resid = float(np.sqrt(np.mean((logy - (r * t + c)) ** 2)))
        return GrowthFit("exp", {"rate": r, "prefactor": float(np.exp(c))}, resid)
    if model == "double_exp":
        if np.any(logy <= 0.0):
            return GrowthFit("double_exp", {"rate": math.nan, "inner_prefactor": math.nan},
                             math.inf)
        r, c = _lsq_line(t, np.log(logy))
        pred_logy = np.exp(r * t + c)
        # Residual evaluated in log-y units so all four models share a scale.
        resid = float(np.sqrt(np.mean((pred_logy - logy) ** 2)))
        return GrowthFit("double_exp", {"rate": r, "inner_prefactor": float(np.exp(c))}, resid)
    raise BoundsError(f"unknown model {model!r}")


def classify(times, values, margin: float = 0.1, flat_tol: float = 0.01) -> dict:
    """Pick the simplest model within (1 + margin) of the best residual.

    Simplicity order: bounded < poly < exp < double_exp.  Residuals below
    flat_tol (rms log units, i.e. ~1% variation) are treated as ties so
    that sub-percent drifts of an essentially flat series still classify
    as bounded.
    """
    fits = {}
    for m in MODELS:
        try:
            fits[m] = growth_fit(times, values, m)
        except BoundsError:
            continue
    if not fits:
        raise BoundsError("no model could be fitted")
    effective = {m: max(f.residual, flat_tol) for m, f in fits.items()}
    best = min(effective.values())
    chosen = None
    for m in MODELS:
        if m in fits and effective[m] <= (1.0 + margin) * best + 1e-15:
            chosen = m
            break
    return {"model": chosen, "fit": fits[chosen], "all_fits": fits}
