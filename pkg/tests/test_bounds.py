import math

import numpy as np
import pytest

from nlslab import bounds


def test_admissible_examples():
    rep = bounds.admissible(2.0, 2)
    assert rep["is_admissible"] and rep["delta"] == 0.0 and rep["p"] == math.inf

    rep = bounds.admissible(math.inf, 1)
    assert rep["is_admissible"]
    assert rep["delta"] == pytest.approx(0.5)
    assert rep["p"] == pytest.approx(4.0)

    rep = bounds.admissible(6.0, 3)  # endpoint excluded by the strict inequality
    assert not rep["is_admissible"]

    assert not bounds.admissible(1.5, 1)["is_admissible"]
    assert not bounds.admissible(math.inf, 2)["is_admissible"]


def test_exponent_set_worked_examples():
    es = bounds.exponent_set(2, 1.0)
    assert (es.q, es.p, es.theta) == (4.0, 4.0, 4.0)

    es = bounds.exponent_set(1, 2.0)
    assert (es.q, es.p, es.theta) == (6.0, 6.0, 6.0)

    es = bounds.exponent_set(3, 1.0)
    assert es.q == 4.0
    assert es.p == pytest.approx(8.0 / 3.0)
    # theta = 2*1*4/(2 - 1*1) = 8; forced by 1/p' = 2 sigma/theta + 1/p
    assert es.theta == pytest.approx(8.0)


def test_exponent_set_validation():
    with pytest.raises(bounds.BoundsError):
        bounds.exponent_set(3, 2.0)  # not energy-subcritical
    with pytest.raises(bounds.BoundsError):
        bounds.exponent_set(1, 0.0)


@pytest.mark.parametrize("d,sigma", [(d, s) for d in (1, 2) for s in (1, 2, 3, 4)]
                         + [(3, 1)])
def test_holder_identities_machine_precision(d, sigma):
    es = bounds.exponent_set(d, float(sigma))
    defects = es.holder_defects()
    for value in defects.values():
        assert value <= 1e-14
    assert 0.0 < es.alpha < 1.0
    assert bounds.admissible(es.q, d)["is_admissible"]


def test_gronwall_constant_series():
    t = np.linspace(0.0, 5.0, 50)
    rep = bounds.gronwall_envelope(t, np.full_like(t, 2.5))
    assert abs(rep["C0_min"]) <= 1e-14
    assert rep["envelope_ok"]
    assert np.allclose(rep["envelope"], 2.5)


def test_gronwall_exponential_series():
    t = np.linspace(0.0, 3.0, 60)
    vals = (1.0 + 0.7) * np.exp(0.9 * t) - 1.0
    rep = bounds.gronwall_envelope(t, vals)
    assert rep["C0_min"] == pytest.approx(0.9, abs=1e-10)
    assert rep["envelope_ok"]


def test_absorption_tau_identity():
    # C tau^alpha e^{Ct} = 1/10 exactly
    for C, alpha, t in ((1.0, 1.0, 1.0), (0.4, 0.7, 3.0), (2.0, 0.25, 0.5)):
        tau = bounds.absorption_tau(C, alpha, t)
        assert C * tau**alpha * math.exp(C * t) == pytest.approx(0.1, rel=1e-12)


def test_ledger_worked_example():
    res = bounds.double_exp_ledger(C=1.0, alpha=1.0, tau0=1.0, f=0.0, t=1.0, w0=1.0)
    assert res.tau == pytest.approx(0.1 * math.exp(-1.0), rel=1e-12)
    assert res.n_intervals == 28
    amplification = (20.0 / 9.0) ** 28
    assert 5.0e9 <= amplification <= 5.3e9
    assert res.bound == pytest.approx(amplification, rel=1e-12)
    assert res.double_exp_envelope(1.0) >= res.bound


def test_ledger_zero_inputs():
    for t in (0.0, 0.5, 3.0, 10.0):
        res = bounds.double_exp_ledger(1.0, 1.0, 1.0, 0.0, t, 0.0)
        assert res.bound == 0.0
        assert res.C1 == 0.0


def test_ledger_matches_geometric_closed_form():
    rng = np.random.default_rng(42)
    for _ in range(50):
        # ranges keep N modest so the float closed form stays in range
        C = float(rng.uniform(0.2, 1.0))
        alpha = float(rng.uniform(0.6, 1.0))
        tau0 = float(rng.uniform(0.1, 2.0))
        t = float(rng.uniform(0.1, 1.0))
        w0 = float(rng.uniform(0.0, 2.0))
        f = float(rng.uniform(0.0, 2.0))
        res = bounds.double_exp_ledger(C, alpha, tau0, f, t, w0)
        k = 20.0 / 9.0
        kc = k * C
        n = res.n_intervals
        geom = n if kc == 1.0 else (kc**n - 1.0) / (kc - 1.0)
        oracle = kc**n * w0 + k * f * geom
        assert res.bound == pytest.approx(oracle, rel=1e-12)


def test_ledger_loglog_growth_in_t():
    # double-exp shape: log log of the bound is ~affine in t (slope ~ C plus
    # a slowly decaying log correction); the float range caps t around 3
    ts = np.array([0.75, 1.5, 2.25, 3.0])
    loglog = []
    for t in ts:
        b = bounds.double_exp_ledger(1.0, 1.0, 1.0, 0.0, float(t), 1.0).bound
        assert math.isfinite(b)
        loglog.append(math.log(math.log(b)))
    loglog = np.array(loglog)
    incs = np.diff(loglog)
    assert np.all(incs > 0)
    slope = np.polyfit(ts, loglog, 1)[0]
    assert 0.9 <= slope <= 1.7
    line_resid = np.max(np.abs(np.polyval(np.polyfit(ts, loglog, 1), ts) - loglog))
    assert line_resid <= 0.25


def test_ledger_monotonicity_random_pairs():
    # amplifying regime 20 C / 9 >= 1: below it the per-interval factor
    # contracts and the bound is legitimately non-monotone in t and C
    rng = np.random.default_rng(7)
    for _ in range(200):
        C = float(rng.uniform(0.5, 1.2))
        alpha = float(rng.uniform(0.5, 1.0))
        tau0 = float(rng.uniform(0.2, 1.5))
        t = float(rng.uniform(0.1, 1.2))
        w0 = float(rng.uniform(0.0, 2.0))
        f = float(rng.uniform(0.0, 2.0))
        base = bounds.double_exp_ledger(C, alpha, tau0, f, t, w0).bound
        bump = 1.0 + float(rng.uniform(0.01, 0.25))
        assert bounds.double_exp_ledger(C, alpha, tau0, f, t * bump, w0).bound >= base * (1 - 1e-12)
        assert bounds.double_exp_ledger(C * bump, alpha, tau0, f, t, w0).bound >= base * (1 - 1e-12)
        assert bounds.double_exp_ledger(C, alpha, tau0, f * bump, t, w0).bound >= base * (1 - 1e-12)
        assert bounds.double_exp_ledger(C, alpha, tau0, f, t, w0 * bump).bound >= base * (1 - 1e-12)


def test_confining_variant_single_exponential_shape():
    # tau independent of t, N linear in t, and the trace fits a single
    # exponential far better than a double exponential
    ts = np.linspace(1.0, 20.0, 20)
    vals = []
    for t in ts:
        res = bounds.double_exp_ledger(1.0, 1.0, 1.0, 0.0, float(t), 1.0,
                                       variant="confining")
        assert res.tau == pytest.approx(0.1, rel=1e-12)
        assert res.n_intervals == math.ceil(t / 0.1 - 1e-12)
        vals.append(res.bound)
    vals = np.array(vals)
    fit_exp = bounds.growth_fit(ts, vals, "exp")
    fit_dexp = bounds.growth_fit(ts, vals, "double_exp")
    assert fit_exp.residual < 0.01 * fit_dexp.residual


def test_ledger_branches_and_validation():
    linf = bounds.double_exp_ledger(1.0, 1.0, 1.0, 0.0, 1.0, 1.0, branch="linf")
    assert linf.factor == pytest.approx(10.0 / 9.0)
    with pytest.raises(bounds.BoundsError):
        bounds.double_exp_ledger(1.0, -1.0, 1.0, 0.0, 1.0, 1.0)
    with pytest.raises(bounds.BoundsError):
        bounds.double_exp_ledger(0.0, 1.0, 1.0, 0.0, 1.0, 1.0)


def test_iterated_ledger_levels():
    out = bounds.iterated_ledger(1.0, 1.0, 1.0, 1.0, 1.0, levels=3)
    assert len(out) == 3
    assert out[1].f_of_t == pytest.approx(out[0].bound)
    assert out[0].bound <= out[1].bound <= out[2].bound


def test_growth_fit_recovers_planted_parameters():
    t = np.linspace(1.0, 10.0, 40)
    fit = bounds.growth_fit(t, np.full_like(t, 4.2), "bounded")
    assert fit.params["level"] == pytest.approx(4.2, rel=1e-12)

    fit = bounds.growth_fit(t, 3.0 * t**2, "poly")
    assert fit.params["exponent"] == pytest.approx(2.0, rel=1e-10)
    assert fit.params["coefficient"] == pytest.approx(3.0, rel=1e-10)

    fit = bounds.growth_fit(t, np.exp(0.7 * t), "exp")
    assert fit.params["rate"] == pytest.approx(0.7, rel=1e-10)

    fit = bounds.growth_fit(t, np.exp(0.3 * np.exp(0.5 * t)), "double_exp")
    assert fit.params["rate"] == pytest.approx(0.5, rel=1e-10)
    assert fit.params["inner_prefactor"] == pytest.approx(0.3, rel=1e-9)


def test_growth_fit_synthetic_poly_example():
    t = np.linspace(0.5, 8.0, 30)
    fit = bounds.growth_fit(t, 3.0 * t**2, "poly")
    assert abs(fit.params["exponent"] - 2.0) <= 0.05


def test_classify_model_selection():
    t = np.linspace(1.0, 10.0, 40)
    assert bounds.classify(t, np.full_like(t, 2.0))["model"] == "bounded"
    assert bounds.classify(t, 3.0 * t**2)["model"] == "poly"
    assert bounds.classify(t, np.exp(0.7 * t))["model"] == "exp"
    assert bounds.classify(t, np.exp(0.2 * np.exp(0.8 * t)))["model"] == "double_exp"
    # sub-percent drift still classifies as bounded
    drift = 2.0 * t**-0.004
    assert bounds.classify(t, drift)["model"] == "bounded"


def test_growth_fit_needs_points():
    with pytest.raises(bounds.BoundsError):
        bounds.growth_fit([1, 2, 3], [1, 2, 3], "exp")
