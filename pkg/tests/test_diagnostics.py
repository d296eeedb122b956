"""Stationarity certificates: KKT residuals, descent probes, audit helpers."""

import numpy as np
import pytest

from robustpath import (
    CdConfig,
    FitConfig,
    InputError,
    dataset_from_features,
    dini_stationarity_probe,
    fd_gradient_check,
    fit,
    intercept_only_fit,
    kkt_residual,
    loss_spec,
    majorization_audit,
    penalized_objective,
    penalty_spec,
)
from robustpath.data import CLASSIFICATION, REGRESSION


def _reg_data(rng, n, p):
    F = rng.normal(size=(n, p))
    y = 0.3 + 1.5 * F[:, 0] + 0.3 * rng.normal(size=n)
    return dataset_from_features(F, y, REGRESSION)


def _cls_data(rng, n, p):
    F = rng.normal(size=(n, p))
    score = 1.2 * F[:, 0] + 0.4 * rng.normal(size=n)
    return dataset_from_features(F, np.where(score >= 0, 1.0, -1.0), CLASSIFICATION)


def test_kkt_zero_model_certified_at_huge_lambda():
    rng = np.random.default_rng(42)
    data = _reg_data(rng, 30, 4)
    loss, pen = loss_spec("ls"), penalty_spec("lasso")
    phi = np.zeros(5)
    phi[0] = intercept_only_fit(data, loss)
    rep = kkt_residual(data, loss, pen, 1e6, phi)
    assert rep.max_residual <= 1e-8
    assert rep.active_set.size == 0
    assert rep.rules[0] == "intercept"
    assert all(r == "zero_subgradient_bound" for r in rep.rules[1:])


def test_kkt_residuals_match_directional_derivatives():
    # Independent check: a nonzero slope's residual is |dF/d beta_j|, a zero
    # slope's residual is the one-sided descent violation.  Both are
    # recoverable from difference quotients of the full objective.
    rng = np.random.default_rng(43)
    data = _cls_data(rng, 40, 2)
    loss, pen = loss_spec("logistic"), penalty_spec("lasso")
    lam = 0.08
    res = fit(data, loss, pen, lam, FitConfig(outer_tol=1e-12, max_outer=3000),
              CdConfig(standardize=False, tol=1e-13))
    assert res.converged
    rep = kkt_residual(data, loss, pen, lam, res.phi)
    assert rep.max_residual <= 1e-4
    h = 1e-6
    for j in range(1, 3):
        e = np.zeros(3)
        e[j] = 1.0
        if res.phi[j] != 0.0:
            up = penalized_objective(data, loss, pen, lam, res.phi + h * e)
            dn = penalized_objective(data, loss, pen, lam, res.phi - h * e)
            assert abs(abs(up - dn) / (2.0 * h) - rep.residuals[j]) <= 1e-5
        else:
            f0 = penalized_objective(data, loss, pen, lam, res.phi)
            for s in (+1.0, -1.0):
                ratio = (penalized_objective(data, loss, pen, lam, res.phi + s * h * e) - f0) / h
                assert ratio >= -(rep.residuals[j] + 1e-6)


def test_kkt_flags_perturbed_coefficient():
    rng = np.random.default_rng(44)
    data = _reg_data(rng, 50, 3)
    loss, pen = loss_spec("ls"), penalty_spec("lasso")
    lam = 0.1
    res = fit(data, loss, pen, lam, cd=CdConfig(standardize=False, tol=1e-13))
    rep0 = kkt_residual(data, loss, pen, lam, res.phi)
    assert rep0.max_residual <= 1e-4
    assert rep0.active_set.size >= 1
    bad = res.phi.copy()
    bad[rep0.active_set[0]] += 0.1
    rep1 = kkt_residual(data, loss, pen, lam, bad)
    assert rep1.max_residual > 1e-3


def test_kkt_report_fields_and_modes():
    rng = np.random.default_rng(45)
    data = _reg_data(rng, 20, 3)
    loss, pen = loss_spec("huber"), penalty_spec("scad")
    phi = np.array([0.1, 0.4, 0.0, -0.2])
    rep = kkt_residual(data, loss, pen, 0.05, phi)
    assert np.all(rep.residuals >= 0.0)
    assert rep.max_residual == np.max(rep.residuals)
    assert np.array_equal(rep.active_set, [1, 3])
    assert rep.rules == [
        "intercept", "nonzero_stationarity", "zero_subgradient_bound",
        "nonzero_stationarity",
    ]
    off = kkt_residual(data, loss, pen, 0.05, phi, fit_intercept=False)
    assert off.rules[0] == "not_estimated"
    assert off.residuals[0] == 0.0


def test_kkt_input_validation():
    rng = np.random.default_rng(46)
    data = _reg_data(rng, 10, 2)
    loss, pen = loss_spec("ls"), penalty_spec("lasso")
    with pytest.raises(InputError):
        kkt_residual(data, loss, pen, 0.1, np.zeros(5))
    with pytest.raises(InputError):
        kkt_residual(data, loss, pen, -0.1, np.zeros(3))


def _converged_ls_fit(rng):
    data = _reg_data(rng, 40, 3)
    loss, pen, lam = loss_spec("ls"), penalty_spec("lasso"), 0.05
    res = fit(data, loss, pen, lam, FitConfig(outer_tol=1e-12),
              CdConfig(standardize=False, tol=1e-13))
    return data, loss, pen, lam, res.phi


def test_probe_accepts_minimizer():
    rng = np.random.default_rng(47)
    data, loss, pen, lam, phi = _converged_ls_fit(rng)
    pr = dini_stationarity_probe(data, loss, pen, lam, phi, n_dirs=200, tau=1e-5)
    assert pr.ok
    assert pr.worst_ratio >= -10.0 * 1e-5
    assert pr.n_directions == 200 + 2 * 4


def test_probe_intercept_free_drops_intercept_axes():
    rng = np.random.default_rng(48)
    data, loss, pen, lam, _ = _converged_ls_fit(rng)
    res = fit(data, loss, pen, lam, FitConfig(outer_tol=1e-12, fit_intercept=False),
              CdConfig(standardize=False, tol=1e-13))
    pr = dini_stationarity_probe(
        data, loss, pen, lam, res.phi, n_dirs=50, tau=1e-5, fit_intercept=False
    )
    assert pr.ok
    assert pr.n_directions == 50 + 2 * 4 - 2
    assert pr.worst_direction[0] == 0.0


def test_probe_rejects_shifted_point():
    rng = np.random.default_rng(49)
    data, loss, pen, lam, phi = _converged_ls_fit(rng)
    shifted = phi.copy()
    shifted[1] += 0.5
    pr = dini_stationarity_probe(data, loss, pen, lam, shifted, n_dirs=200, tau=1e-5)
    assert not pr.ok
    assert pr.worst_ratio < -10.0 * 1e-5


def test_probe_stable_under_tau_halving():
    rng = np.random.default_rng(50)
    data, loss, pen, lam, phi = _converged_ls_fit(rng)
    for tau in (1e-5, 5e-6, 2.5e-6):
        pr = dini_stationarity_probe(data, loss, pen, lam, phi, n_dirs=100, tau=tau)
        assert pr.ok


def test_probe_axes_only_and_validation():
    rng = np.random.default_rng(51)
    data, loss, pen, lam, phi = _converged_ls_fit(rng)
    pr = dini_stationarity_probe(data, loss, pen, lam, phi, n_dirs=0)
    assert pr.n_directions == 2 * 4
    with pytest.raises(InputError):
        dini_stationarity_probe(data, loss, pen, lam, phi, tau=0.0)
    with pytest.raises(InputError):
        dini_stationarity_probe(data, loss, pen, lam, np.zeros(7))


ALL_LOSSES = [
    loss_spec("ls"), loss_spec("huber"), loss_spec("logistic"),
    loss_spec("clossr", sigma=1.0), loss_spec("closs", sigma=0.9),
    loss_spec("gloss", sigma=1.1), loss_spec("qloss", sigma=0.5),
]


@pytest.mark.parametrize("loss", ALL_LOSSES, ids=lambda s: s.family)
def test_fd_gradient_check_reports_small_error(loss):
    assert fd_gradient_check(loss, n_samples=1000, seed=0) <= 1e-6


@pytest.mark.parametrize("loss", ALL_LOSSES, ids=lambda s: s.family)
def test_majorization_audit_clean(loss):
    gap, touch = majorization_audit(loss, n_samples=1000, seed=0)
    assert gap >= -1e-10
    assert touch <= 1e-12


def test_majorization_audit_ls_surrogate_is_exact():
    gap, touch = majorization_audit(loss_spec("ls"), n_samples=500, seed=3)
    assert abs(gap) <= 1e-9
    assert touch == 0.0
