import math

import numpy as np
import pytest
from scipy.stats import kstest

from raytail import copulas as cp
from raytail.errors import DomainError

ETA_075_ALPHA = -math.log(0.75) / math.log(2.0)  # diagonal decay 0.75


def bivariate_models():
    return [
        cp.BivariateNormal(0.5),
        cp.BivariateNormal(-0.4),
        cp.InvertedLogistic(0.5),
        cp.InvertedLogistic(ETA_075_ALPHA),
        cp.Morgenstern(1.0),
        cp.Morgenstern(-0.7),
        cp.LogisticBEV(0.6),
        cp.ClaytonLowerTail(1.2),
    ]


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "family,params,msg",
    [
        ("bvn", {"rho": 1.5}, r"\(-1, 1\)"),
        ("bvn", {"rho": -1.0}, r"\(-1, 1\)"),
        ("invlog", {"alpha": 0.0}, r"\(0, 1\]"),
        ("invlog", {"alpha": 1.2}, r"\(0, 1\]"),
        ("morgenstern", {"alpha": -1.01}, r"\[-1, 1\]"),
        ("logistic", {"alpha": 2.0}, r"\(0, 1\]"),
        ("clayton", {"alpha": 0.0}, "> 0"),
    ],
)
def test_parameter_bounds_rejected(family, params, msg):
    with pytest.raises(DomainError, match=msg):
        cp.make_model(family, **params)


def test_unknown_family_rejected():
    with pytest.raises(DomainError, match="unknown family"):
        cp.make_model("gauss")


# ---------------------------------------------------------------------------
# exact survivor values
# ---------------------------------------------------------------------------

def test_inverted_logistic_survivor_closed_value():
    m = cp.InvertedLogistic(0.5)
    assert math.isclose(
        cp.survivor_exp(m, (1.0, 1.0)), math.exp(-math.sqrt(2.0)), rel_tol=1e-14
    )


def test_morgenstern_survivor_closed_value():
    m = cp.Morgenstern(1.0)
    got = cp.survivor_exp(m, (math.log(2.0), math.log(2.0)))
    assert math.isclose(got, 0.3125, rel_tol=1e-14)


@pytest.mark.parametrize("model", bivariate_models(), ids=lambda m: repr(m))
def test_marginal_corners(model):
    tol = 1e-9 if model.family == "bvn" else 1e-10
    for x in (0.3, 1.7, 4.0):
        assert math.isclose(
            cp.survivor_exp(model, (x, 0.0)), math.exp(-x), rel_tol=tol
        )
        assert math.isclose(
            cp.survivor_exp(model, (0.0, x)), math.exp(-x), rel_tol=tol
        )
    assert math.isclose(cp.survivor_exp(model, (0.0, 0.0)), 1.0, rel_tol=tol)


def test_log_survivor_matches_survivor(subtests=None):
    for model in bivariate_models():
        for c in [(0.5, 0.5), (1.0, 2.0), (3.0, 0.7)]:
            assert math.isclose(
                math.exp(cp.log_survivor_exp(model, c)),
                cp.survivor_exp(model, c),
                rel_tol=1e-12,
            )


def test_deep_corner_log_survivor_stays_finite():
    # beyond exp underflow the algebraic families still evaluate in logs
    assert math.isclose(
        cp.log_survivor_exp(cp.ClaytonLowerTail(1.0), (100.0, 130.0)),
        -130.0 - math.log1p(math.exp(-30.0) - math.exp(-130.0)),
        rel_tol=1e-12,
    )
    m = cp.Morgenstern(0.5)
    assert math.isclose(
        cp.log_survivor_exp(m, (400.0, 500.0)), -900.0 + math.log(1.5), rel_tol=1e-12
    )
    il = cp.InvertedLogistic(0.5)
    assert math.isclose(
        cp.log_survivor_exp(il, (800.0, 800.0)), -800.0 * math.sqrt(2.0), rel_tol=1e-12
    )


def test_logistic_bev_survivor_against_direct_formula():
    # direct (cancellation-prone) evaluation is fine at moderate corners and
    # serves as an independent route
    m = cp.LogisticBEV(0.6)
    for c in [(0.5, 0.5), (1.0, 2.0), (2.5, 0.3), (3.0, 3.0)]:
        x, y = c
        a, b = math.exp(-x), math.exp(-y)
        v = m.exponent_function(-1.0 / math.log1p(-a), -1.0 / math.log1p(-b))
        direct = a + b - 1.0 + math.exp(-v)
        assert math.isclose(cp.survivor_exp(m, c), direct, rel_tol=1e-10)


# frozen 30-digit references: mpmath.quad of the corner integral
# erfc((s - rho*y)/sqrt(2(1-rho^2)))/2 * npdf(y) over [t, t+45] with
# (s, t) the normal upper quantiles of exp(-x), exp(-y)
BVN_REFERENCE = [
    (0.5, 0.5, 0.5, 0.44644254964660133),
    (0.5, 1.0, 3.0, 0.039006228358321919),
    (0.5, 6.0, 6.0, 0.00018875198752689045),
    (0.5, 13.8, 13.8, 4.5708054637978749e-9),
    (0.5, 0.67, 12.78, 2.8083269640447526e-6),
    (-0.4, 0.5, 0.5, 0.30823392149463722),
    (-0.4, 1.0, 3.0, 0.0052276050520295691),
    (-0.4, 6.0, 6.0, 1.3628515784426117e-8),
    (-0.4, 13.8, 13.8, 1.2315535312645801e-19),
    (-0.4, 0.67, 12.78, 5.9515396487799879e-8),
]


def test_bvn_quadrature_against_high_precision_reference():
    for rho, x, y, ref in BVN_REFERENCE:
        got = cp.survivor_exp(cp.BivariateNormal(rho), (x, y))
        assert math.isclose(got, ref, rel_tol=1e-10), (rho, x, y, got, ref)


def test_bvn_quadrature_matches_monte_carlo():
    model = cp.BivariateNormal(0.5)
    n = 100_000
    s = model.sample(n, 2024)
    p = cp.survivor_exp(model, (1.0, 1.0))
    emp = float(np.mean((s.x > 1.0) & (s.y > 1.0)))
    se = math.sqrt(p * (1.0 - p) / n)
    assert abs(emp - p) <= 3.0 * se


# ---------------------------------------------------------------------------
# closed-form decay indices
# ---------------------------------------------------------------------------

def test_bvn_kappa_regimes():
    m = cp.BivariateNormal(0.5)
    assert math.isclose(m.kappa((1.0, 1.0)), 4.0 / 3.0, rel_tol=1e-15)
    # ray below the regime boundary collapses to the larger rate
    assert m.kappa((1.0, 0.2)) == 1.0
    # boundary is continuous
    assert math.isclose(m.kappa((1.0, 0.25)), 1.0, rel_tol=1e-12)
    mneg = cp.BivariateNormal(-0.5)
    assert math.isclose(mneg.kappa((1.0, 1.0)), 4.0, rel_tol=1e-15)
    assert mneg.kappa((1.0, 0.0)) == 1.0


def test_bvn_eta_link():
    # diagonal decay index eta = (1+rho)/2 = 1/kappa(1,1)
    m = cp.BivariateNormal(0.5)
    assert math.isclose(1.0 / m.kappa((1.0, 1.0)), (1.0 + 0.5) / 2.0, rel_tol=1e-15)


def test_morgenstern_kappa_is_sum():
    for alpha in (-1.0, 0.0, 0.7):
        assert cp.Morgenstern(alpha).kappa((2.0, 3.0)) == 5.0


def test_trivariate_kappa_branches_and_reductions():
    tri = cp.TrivariateMaxPareto()
    assert tri.kappa((1.0, 2.0, 1.0)) == 3.0
    assert tri.kappa((2.0, 1.0, 3.0)) == 5.0
    # exact two-dimensional reductions when one rate vanishes
    assert tri.kappa((1.0, 2.0, 0.0)) == 2.0
    assert tri.kappa((3.0, 2.0, 0.0)) == 3.0
    assert tri.kappa((1.0, 0.0, 2.0)) == 3.0
    assert tri.kappa((0.0, 2.0, 3.0)) == 3.0
    assert tri.kappa((0.0, 3.0, 2.0)) == 3.0


def test_true_lambda_values():
    il = cp.InvertedLogistic(0.5)
    assert math.isclose(cp.true_lambda(il, 0.5), 2.0 ** -0.5, rel_tol=1e-15)
    for model in bivariate_models():
        assert cp.true_lambda(model, 0.0) == 1.0
        assert cp.true_lambda(model, 1.0) == 1.0
    lb = cp.LogisticBEV(0.3)
    for w in (0.1, 0.3, 0.5, 0.8):
        assert cp.true_lambda(lb, w) == max(w, 1.0 - w)
    with pytest.raises(DomainError):
        cp.true_lambda(il, 1.2)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", bivariate_models(), ids=lambda m: repr(m))
def test_sampler_determinism(model):
    a = model.sample(200, 99).points
    b = model.sample(200, 99).points
    c = model.sample(200, 100).points
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_morgenstern_zero_alpha_is_independence():
    n = 100_000
    s = cp.Morgenstern(0.0).sample(n, 5)
    corr = float(np.corrcoef(s.x, s.y)[0, 1])
    assert abs(corr) <= 3.0 / math.sqrt(n)


def test_inverted_logistic_margins_exponential():
    s = cp.InvertedLogistic(0.415).sample(10_000, 11)
    assert kstest(s.x, "expon").pvalue > 0.01
    assert kstest(s.y, "expon").pvalue > 0.01


@pytest.mark.parametrize("model", bivariate_models(), ids=lambda m: repr(m))
def test_monte_carlo_consistency_nine_corners(model):
    n = 100_000
    s = model.sample(n, 314159)
    corners = [(a, b) for a in (0.5, 1.0, 2.0) for b in (0.5, 1.0, 2.0)]
    for c in corners:
        p = cp.survivor_exp(model, c)
        emp = float(np.mean((s.x > c[0]) & (s.y > c[1])))
        se = math.sqrt(p * (1.0 - p) / n)
        assert abs(emp - p) <= 4.0 * se, f"corner {c}: emp={emp}, p={p}"


def test_morgenstern_conditional_inversion_exact():
    model = cp.Morgenstern(0.8)
    n = 10_000
    s = model.sample(n, 77)
    u = 1.0 - np.exp(-s.x)
    v = 1.0 - np.exp(-s.y)
    # pushing the draws back through the conditional CDF must give uniforms
    p = model.conditional_cdf(u, v)
    assert kstest(p, "uniform").pvalue > 0.01


def _empirical_copula_matches(sample, copula_fn, n):
    u = 1.0 - np.exp(-sample.x)
    v = 1.0 - np.exp(-sample.y)
    grid = (0.1, 0.3, 0.5, 0.7, 0.9)
    for gu in grid:
        for gv in grid:
            c_true = copula_fn(gu, gv)
            c_emp = float(np.mean((u <= gu) & (v <= gv)))
            se = math.sqrt(c_true * (1.0 - c_true) / n)
            assert abs(c_emp - c_true) <= 4.0 * se, (gu, gv, c_emp, c_true)


def test_inverted_logistic_is_reflected_logistic():
    alpha = 0.5
    n = 50_000
    model = cp.InvertedLogistic(alpha)
    helper = cp.LogisticBEV(alpha)

    def printed_copula(u, v):
        vv = helper.exponent_function(-1.0 / math.log1p(-u), -1.0 / math.log1p(-v))
        return u + v - 1.0 + math.exp(-vv)

    _empirical_copula_matches(model.sample(n, 21), printed_copula, n)


def test_clayton_lower_tail_is_reflected_clayton():
    alpha = 1.2
    n = 50_000

    def printed_copula(u, v):
        inner = (1.0 - u) ** (-1.0 / alpha) + (1.0 - v) ** (-1.0 / alpha) - 1.0
        return u + v - 1.0 + inner**-alpha

    _empirical_copula_matches(
        cp.ClaytonLowerTail(alpha).sample(n, 22), printed_copula, n
    )


# ---------------------------------------------------------------------------
# trivariate construction
# ---------------------------------------------------------------------------

def test_trivariate_margins_exponential():
    s = cp.TrivariateMaxPareto().sample(10_000, 8)
    for j in range(3):
        assert kstest(s.points[:, j], "expon").pvalue > 0.01


def test_trivariate_formula_matches_enumeration_oracle():
    tri = cp.TrivariateMaxPareto()
    rng = np.random.default_rng(17)
    for _ in range(50):
        c = tuple(rng.uniform(0.2, 3.0, 3))
        tx, ty, tz = (tri._pareto_threshold(v) for v in c)
        oracle = tri._survivor_by_enumeration(tx, ty, tz)
        assert math.isclose(tri.survivor(c), oracle, rel_tol=1e-11), c


def test_trivariate_survivor_matches_monte_carlo():
    tri = cp.TrivariateMaxPareto()
    n = 1_000_000
    s = tri.sample(n, 4242)
    for c in [(0.5, 0.5, 0.5), (1.0, 1.0, 1.0), (2.0, 1.0, 0.5), (0.5, 2.0, 1.0)]:
        p = tri.survivor(c)
        emp = float(
            np.mean((s.x > c[0]) & (s.y > c[1]) & (s.points[:, 2] > c[2]))
        )
        se = math.sqrt(p * (1.0 - p) / n)
        assert abs(emp - p) <= 4.0 * se, (c, emp, p)


def test_trivariate_marginal_and_independence_reductions():
    tri = cp.TrivariateMaxPareto()
    for x in (0.7, 1.3, 2.1):
        assert math.isclose(tri.survivor((x, 0.0, 0.0)), math.exp(-x), rel_tol=1e-12)
        assert math.isclose(tri.survivor((0.0, x, 0.0)), math.exp(-x), rel_tol=1e-12)
        assert math.isclose(tri.survivor((0.0, 0.0, x)), math.exp(-x), rel_tol=1e-12)
    # the outer pair shares no component, so its joint survivor factorizes
    assert math.isclose(
        tri.survivor((1.0, 0.0, 2.0)), math.exp(-3.0), rel_tol=1e-12
    )


def test_trivariate_pairwise_tail_dependence_structure():
    # X,Y and Y,Z share a maximum component; X,Z do not
    tri = cp.TrivariateMaxPareto()
    n = 400_000
    s = tri.sample(n, 9)
    q = -math.log(0.02)  # marginal 98% level
    pxy = np.mean((s.x > q) & (s.y > q)) / 0.02
    pxz = np.mean((s.x > q) & (s.points[:, 2] > q)) / 0.02
    assert pxy > 0.25  # strongly dependent pair
    assert pxz < 0.10  # near-independent pair


# ---------------------------------------------------------------------------
# conditional-tail normalizations
# ---------------------------------------------------------------------------

def test_ht_normalization_forms():
    bvn = cp.BivariateNormal(0.5)
    norm = cp.true_ht_normalization(bvn)
    u = 10.0
    assert math.isclose(norm.location(u), 0.25 * u, rel_tol=1e-15)
    assert math.isclose(norm.scale(u), math.sqrt(2.0 * 0.25 * u), rel_tol=1e-15)
    from scipy.stats import norm as normal_dist

    assert math.isclose(
        norm.limit_survivor(0.5),
        float(normal_dist.sf(0.5 / math.sqrt(0.75))),
        rel_tol=1e-12,
    )

    mg = cp.true_ht_normalization(cp.Morgenstern(0.3))
    assert mg.location(7.0) == 0.0
    assert mg.scale(7.0) == 1.0
    w = 1.3
    assert math.isclose(
        mg.limit_survivor(w),
        math.exp(-w) * (1.0 + 0.3 * (1.0 - math.exp(-w))),
        rel_tol=1e-12,
    )

    il = cp.true_ht_normalization(cp.InvertedLogistic(0.4))
    assert il.location(9.0) == 0.0
    assert math.isclose(il.scale(9.0), 9.0**0.6, rel_tol=1e-15)
    assert math.isclose(
        il.limit_survivor(1.0), math.exp(-0.4), rel_tol=1e-12
    )

    cl = cp.true_ht_normalization(cp.ClaytonLowerTail(2.0))
    assert math.isclose(
        cl.limit_survivor(1.0), (math.exp(0.5) + 1.0) ** -2.0, rel_tol=1e-12
    )

    lb = cp.true_ht_normalization(cp.LogisticBEV(0.5))
    w = 0.0
    assert math.isclose(lb.limit_survivor(0.0), 2.0 - 2.0**0.5, rel_tol=1e-12)


def test_ht_normalization_limit_survivors_are_valid():
    for model in [
        cp.BivariateNormal(0.7),
        cp.InvertedLogistic(0.4),
        cp.Morgenstern(0.9),
        cp.LogisticBEV(0.5),
        cp.ClaytonLowerTail(1.5),
    ]:
        surv = cp.true_ht_normalization(model).limit_survivor
        grid = np.linspace(-8.0, 30.0, 200)
        vals = np.array([surv(w) for w in grid])
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        assert np.all(np.diff(vals) <= 1e-12)  # non-increasing
        assert vals[-1] < 1e-3


def test_ht_normalization_unsupported_cases():
    with pytest.raises(DomainError, match="rho > 0"):
        cp.true_ht_normalization(cp.BivariateNormal(-0.3))
    with pytest.raises(DomainError):
        cp.true_ht_normalization(cp.TrivariateMaxPareto())


def test_morgenstern_conditional_limit_matches_empirical():
    # location 0, scale 1: the conditional exceedance law needs no
    # normalization, so a finite-threshold empirical check is meaningful
    model = cp.Morgenstern(1.0)
    surv = cp.true_ht_normalization(model).limit_survivor
    n = 400_000
    s = model.sample(n, 33)
    thr = -math.log(0.01)  # y beyond its 99% level
    mask = s.y > thr
    xs = s.x[mask]
    for w in (0.5, 1.0, 2.0):
        emp = float(np.mean(xs > w))
        p = surv(w)
        se = math.sqrt(p * (1.0 - p) / mask.sum())
        assert abs(emp - p) <= 5.0 * se


def test_bvn_slowly_varying_lead_positive_and_regime_guarded():
    m = cp.BivariateNormal(0.5)
    val = m.slowly_varying_lead(1e6, (1.0, 1.0))
    assert val > 0.0
    with pytest.raises(DomainError, match="quadratic regime"):
        m.slowly_varying_lead(1e6, (1.0, 0.1))
