import math

import numpy as np
import pytest

from raytail import copulas as cp
from raytail import estimators as est
from raytail.errors import (
    DomainError,
    ExtrapolationError,
    InsufficientExceedancesError,
)
from raytail.margins import ExponentialSample, rank_transform

ETA_075_ALPHA = -math.log(0.75) / math.log(2.0)


def make_sample(points):
    return ExponentialSample(np.asarray(points, dtype=float), provenance="simulated")


# ---------------------------------------------------------------------------
# structure variable
# ---------------------------------------------------------------------------

def test_structure_variable_fixtures():
    s = make_sample([[2.0, 2.0], [3.0, 1.0], [1.0, 3.0]])
    assert np.array_equal(est.structure_variable(s, 0.5), [4.0, 2.0, 2.0])
    assert np.array_equal(est.structure_variable(s, 0.0), [2.0, 1.0, 3.0])
    assert np.array_equal(est.structure_variable(s, 1.0), [2.0, 3.0, 1.0])
    assert est.structure_variable(s, 0.25)[2] == 4.0  # min(1/0.25, 3/0.75)


def test_structure_variable_rejects_bad_omega():
    s = make_sample([[1.0, 1.0]])
    with pytest.raises(DomainError):
        est.structure_variable(s, 1.5)


# ---------------------------------------------------------------------------
# Hill fit of the angular index
# ---------------------------------------------------------------------------

def test_fit_lambda_reciprocal_mean_excess():
    # excesses {0.5, 1.0, 1.5, 1.0, 1.0} above u=1 have mean 1 -> rate 1
    t = np.array([0.1] * 10 + [1.5, 2.0, 2.5, 2.0, 2.0])
    fit = est._fit_lambda_from_t(t, 0.5, None, 1.0)
    assert fit.lambda_hat == 1.0
    assert fit.k == 5
    assert fit.u == 1.0
    assert math.isclose(fit.se, 1.0 / math.sqrt(5.0), rel_tol=1e-15)


def test_fit_lambda_constant_excesses():
    t = np.array([0.0] * 5 + [3.0] * 6)  # excesses all equal to 2 above u=1
    fit = est._fit_lambda_from_t(t, 0.5, None, 1.0)
    assert fit.lambda_hat == 0.5


def test_fit_lambda_insufficient_exceedances():
    s = make_sample([[1.0, 1.0]] * 20)
    with pytest.raises(InsufficientExceedancesError) as exc:
        est.fit_lambda(s, 0.5, u=100.0)
    assert exc.value.count == 0


def test_fit_lambda_default_threshold_keeps_ten_percent():
    s = cp.InvertedLogistic(0.5).sample(5000, 1)
    fit = est.fit_lambda(s, 0.35, frac=0.10)
    assert fit.k == 500


def test_fit_lambda_positive_and_finite_on_tiny_samples():
    s = make_sample([[0.1, 0.2], [0.5, 0.9], [1.0, 1.2], [2.0, 2.5], [3.0, 3.1],
                     [4.0, 4.4]])
    fit = est.fit_lambda(s, 0.5, u=0.0)
    assert 0.0 < fit.lambda_hat < math.inf


def test_fit_lambda_scales_exactly_with_growth():
    s = cp.BivariateNormal(0.5).sample(3000, 12)
    base = est.fit_lambda_growth(s, (0.35, 0.65))
    for h in (0.5, 2.0, 7.3):
        scaled = est.fit_lambda_growth(s, (h * 0.35, h * 0.65))
        assert math.isclose(scaled.lambda_hat, h * base.lambda_hat, rel_tol=1e-12)
        assert math.isclose(scaled.u, base.u / h, rel_tol=1e-12)


def test_fit_lambda_boundary_rays_recover_marginal_rate():
    s = rank_transform(cp.BivariateNormal(0.5).sample(5000, 77).points)
    for w in (0.0, 1.0):
        fit = est.fit_lambda(s, w)
        assert abs(fit.lambda_hat - 1.0) <= 2.0 * fit.se


def test_diagonal_fit_equals_half_reciprocal_eta():
    # the diagonal structure variable is exactly twice min(x, y), so the
    # fitted rate must be exactly half the reciprocal mean excess of the min
    s = cp.InvertedLogistic(ETA_075_ALPHA).sample(5000, 5)
    fit = est.fit_lambda(s, 0.5, frac=0.10)
    m = np.minimum(s.x, s.y)
    u = float(np.quantile(m, 0.9))
    exc = m[m > u] - u
    eta_hat = float(np.mean(exc))
    assert math.isclose(fit.lambda_hat, (1.0 / eta_hat) / 2.0, rel_tol=1e-12)


def test_fit_lambda_unbiased_for_exact_power_family():
    model = cp.InvertedLogistic(ETA_075_ALPHA)
    true = model.lam(0.35)
    lams = [
        est.fit_lambda(model.sample(5000, 1000 + r), 0.35).lambda_hat
        for r in range(60)
    ]
    # se of the mean is ~0.004; allow a generous band for 60 replications
    assert abs(float(np.mean(lams)) - true) <= 0.02


# ---------------------------------------------------------------------------
# ray-extrapolation probability
# ---------------------------------------------------------------------------

def test_wt_probability_closed_fixture():
    # lambda=1, v=log 2, base probability 0.1 -> estimate 0.05
    pts = [[0.1, 0.1]] * 9 + [[5.0, 5.0]]
    s = make_sample(pts)
    fit = est.AngularFit(omega=0.5, lambda_hat=1.0, u=4.0, k=1, se=1.0)
    p = est.wt_probability(s, 0.5, u_n=4.0, v=math.log(2.0), fit=fit)
    assert math.isclose(p.value, 0.05, rel_tol=1e-15)
    assert not p.is_zero


def test_wt_probability_v_zero_is_empirical():
    s = cp.InvertedLogistic(0.5).sample(2000, 9)
    fit = est.fit_lambda(s, 0.4)
    p = est.wt_probability(s, 0.4, v=0.0, fit=fit)
    base = np.mean((s.x > 0.4 * fit.u) & (s.y > 0.6 * fit.u))
    assert p.value == base
    # the base count at the fit threshold is the exceedance count itself
    assert p.meta["k"] == fit.k
    assert round(base * s.n) == fit.k


def test_wt_probability_zero_outcome_never_raises():
    s = make_sample([[0.5, 0.5]] * 50)
    fit = est.AngularFit(omega=0.5, lambda_hat=1.0, u=10.0, k=1, se=1.0)
    p = est.wt_probability(s, 0.5, u_n=10.0, v=1.0, fit=fit)
    assert p.is_zero and p.value == 0.0


def test_wt_probability_at_uses_ray_through_corner():
    s = cp.InvertedLogistic(0.5).sample(5000, 123)
    p = est.wt_probability_at(s, (4.0, 12.0))
    assert math.isclose(p.meta["omega"], 0.25, rel_tol=1e-12)
    assert p.value > 0.0


def test_wt_rejects_negative_extrapolation():
    s = cp.InvertedLogistic(0.5).sample(1000, 3)
    with pytest.raises(DomainError):
        est.wt_probability(s, 0.5, v=-0.5)


# ---------------------------------------------------------------------------
# diagonal-extrapolation probability
# ---------------------------------------------------------------------------

def test_lt_probability_inside_support_is_empirical():
    s = cp.BivariateNormal(0.5).sample(5000, 21)
    qx = float(np.quantile(s.x, 0.9))
    qy = float(np.quantile(s.y, 0.9))
    target = (qx - 0.5, qy - 0.5)  # inside the baseline: no shift applied
    p = est.lt_probability(s, target)
    emp = np.mean((s.x > target[0]) & (s.y > target[1]))
    assert p.value == emp
    assert p.meta["v"] == 0.0


def test_lt_probability_independence_rate():
    # independent exponential coordinates: eta = 1/2, so a diagonal shift v
    # costs a factor e^{-2v}
    rng = np.random.default_rng(8)
    pts = np.column_stack(
        (rng.standard_exponential(200_000), rng.standard_exponential(200_000))
    )
    s = make_sample(pts)
    a = 2.0
    v = 1.0
    p = est.lt_probability(s, (a + v, a + v), baseline=(a, a))
    emp_base = np.mean((s.x > a) & (s.y > a))
    expected = math.exp(-2.0 * v) * emp_base
    assert abs(p.value - expected) / expected < 0.08


def test_lt_probability_zero_outcome_recorded():
    s = cp.BivariateNormal(0.5).sample(500, 4)
    p = est.lt_probability(s, (2.0, 40.0))
    assert p.is_zero and p.value == 0.0


def test_lt_equals_wt_on_diagonal_with_matching_base():
    s = cp.InvertedLogistic(ETA_075_ALPHA).sample(5000, 99)
    fit = est.fit_lambda(s, 0.5, frac=0.10)
    v = 9.0
    t0 = (fit.u + v) / 2.0
    wt = est.wt_probability(s, 0.5, u_n=fit.u, v=v, fit=fit)
    lt = est.lt_probability(s, (t0, t0), baseline=(fit.u / 2.0, fit.u / 2.0))
    assert math.isclose(wt.value, lt.value, rel_tol=1e-12)
    assert math.isclose(
        lt.meta["lambda_half"], wt.meta["lambda_hat"], rel_tol=1e-15
    )


# ---------------------------------------------------------------------------
# conditional-tail fit and probability
# ---------------------------------------------------------------------------

def test_fit_ht_requires_enough_exceedances():
    s = cp.BivariateNormal(0.5).sample(100, 1)
    with pytest.raises(InsufficientExceedancesError):
        est.fit_ht(s, quantile=0.9)  # only ~10 exceedances


def test_fit_ht_recovers_location_slope_bvn():
    model = cp.BivariateNormal(0.5)
    alphas = []
    betas = []
    for rep in range(20):
        fit = est.fit_ht(model.sample(5000, 3000 + rep))
        alphas.append(fit.alpha)
        betas.append(fit.beta)
    # the conditional location grows like rho^2 * y with sqrt-scale spread
    assert abs(float(np.mean(alphas)) - 0.25) <= 0.12
    assert 0.1 <= float(np.mean(betas)) <= 0.8


def test_fit_ht_near_zero_location_for_weak_dependence():
    model = cp.Morgenstern(1.0)
    alphas = [est.fit_ht(model.sample(5000, 4000 + rep)).alpha for rep in range(20)]
    assert abs(float(np.mean(alphas))) <= 0.1


def test_fit_ht_scale_exponent_tracks_true_normalization():
    # the true conditional scale grows as u**(1 - alpha) for the reflected
    # logistic family; the fitted power picks that up within the wide
    # finite-threshold identification slack
    model = cp.InvertedLogistic(0.415)
    betas = [est.fit_ht(model.sample(5000, 8000 + rep)).beta for rep in range(30)]
    assert abs(float(np.mean(betas)) - (1.0 - 0.415)) <= 0.25


def test_fit_ht_independence_residuals_track_conditioned_variable():
    rng = np.random.default_rng(55)
    pts = np.column_stack(
        (rng.standard_exponential(5000), rng.standard_exponential(5000))
    )
    s = make_sample(pts)
    fit = est.fit_ht(s)
    assert fit.alpha <= 0.05
    x_cond = s.x[s.y > fit.u_y]
    corr = float(np.corrcoef(fit.residuals, x_cond)[0, 1])
    assert corr > 0.99


def test_ht_probability_deterministic_and_seed_sensitive():
    fit = est.fit_ht(cp.BivariateNormal(0.5).sample(5000, 17))
    a = est.ht_probability(fit, 0.3, 15.0, r=5000, seed=42)
    b = est.ht_probability(fit, 0.3, 15.0, r=5000, seed=42)
    c = est.ht_probability(fit, 0.3, 15.0, r=5000, seed=43)
    assert a.value == b.value
    assert a.value != c.value


def test_ht_probability_marginal_boundary():
    # at omega=0 with non-negative residuals the indicator is always true,
    # so the estimate is exactly the marginal survivor of the threshold
    fit = est.HTFit(
        alpha=0.5,
        beta=0.0,
        u_y=2.0,
        residuals=np.abs(np.random.default_rng(1).standard_normal(50)),
        mu=0.8,
        sigma=0.6,
        nll=0.0,
        grad_norm=0.0,
    )
    p = est.ht_probability(fit, 0.0, 7.0, r=2000, seed=0)
    assert p.value == math.exp(-7.0)


def test_ht_probability_below_fit_threshold_raises():
    fit = est.fit_ht(cp.BivariateNormal(0.5).sample(5000, 17))
    with pytest.raises(ExtrapolationError):
        est.ht_probability(fit, 0.5, 2.0 * fit.u_y * 0.5)


def test_ht_probability_monte_carlo_convergence():
    fit = est.HTFit(
        alpha=0.0,
        beta=0.0,
        u_y=1.0,
        residuals=np.array([1.0] * 30 + [-1.0] * 10),  # P(z = 1) = 0.75
        mu=0.5,
        sigma=1.0,
        nll=0.0,
        grad_norm=0.0,
    )
    # x threshold 0.5 sits between the two residual atoms, so the indicator
    # hits exactly when z = +1, with probability 3/4 independent of y
    p = est.ht_probability(fit, 0.05, 10.0, r=200_000, seed=3)
    cond = p.value / math.exp(-9.5)
    assert abs(cond - 0.75) < 0.005


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def test_diagnose_linearity_power_family():
    s = cp.InvertedLogistic(ETA_075_ALPHA).sample(5000, 10)
    out = est.diagnose_linearity(s, 0.5, np.arange(0.2, 0.85, 0.1))
    assert out["r_squared"] >= 0.95
    assert out["slope"] < 0.0
    # slope approximates -lambda(1/2) * log m
    expected = -cp.InvertedLogistic(ETA_075_ALPHA).lam(0.5) * math.log(5000)
    assert abs(out["slope"] - expected) / abs(expected) < 0.25


def test_diagnose_linearity_insufficient_sets():
    s = make_sample([[0.1, 0.1]] * 100)
    with pytest.raises(InsufficientExceedancesError):
        est.diagnose_linearity(s, 0.5, [5.0, 6.0, 7.0])


def test_diagnose_linearity_grid_validation():
    s = cp.InvertedLogistic(0.5).sample(100, 0)
    with pytest.raises(DomainError):
        est.diagnose_linearity(s, 0.5, [0.5, 0.4, 0.6])


def test_qq_excesses_small_fixture():
    pts = np.zeros((7, 2))
    pts[:, 0] = [0.0, 0.0, 0.0, 0.0, 1.5, 2.0, 2.5]
    pts[:, 1] = 100.0  # never binding at omega=1
    s = make_sample(pts)
    fit = est.AngularFit(omega=1.0, lambda_hat=2.0, u=1.0, k=3, se=1.0)
    pairs = est.qq_excesses(fit, s)
    theo = [-math.log(1.0 - i / 4.0) / 2.0 for i in (1, 2, 3)]
    assert np.allclose(pairs[:, 0], theo, rtol=1e-12)
    assert np.allclose(pairs[:, 1], [0.5, 1.0, 1.5], rtol=1e-12)


def test_qq_excesses_exponential_data_near_diagonal():
    rng = np.random.default_rng(2)
    t = rng.standard_exponential(20_000)
    pts = np.column_stack((t, np.full_like(t, 50.0)))
    s = make_sample(pts)
    fit = est.fit_lambda(s, 1.0, frac=0.2)
    pairs = est.qq_excesses(fit, s)
    resid = pairs[:, 1] - pairs[:, 0]
    # the extreme order statistics fluctuate; the bulk must hug the diagonal
    assert float(np.quantile(np.abs(resid), 0.9)) < 0.25
    assert abs(float(np.mean(resid))) < 0.05


def test_qq_excesses_heavy_tail_curves_upward():
    rng = np.random.default_rng(6)
    t = (1.0 / rng.random(20_000)) ** 0.8  # polynomial tail, not exponential
    pts = np.column_stack((t, np.full_like(t, 1e9)))
    s = make_sample(pts)
    fit = est.fit_lambda(s, 1.0, frac=0.1)
    pairs = est.qq_excesses(fit, s)
    k = pairs.shape[0]
    resid = pairs[:, 1] - pairs[:, 0]
    # convexity signature: bulk sags below the line, top decile overshoots
    assert float(np.mean(resid[: int(0.5 * k)])) < 0.0
    assert float(np.mean(resid[int(0.9 * k):])) > 0.0
