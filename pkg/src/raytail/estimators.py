"""Joint tail probability estimators and their fit diagnostics.

Three competing estimators of P(X_E > x0, Y_E > y0) for a corner deep in
the joint tail, all operating on standard exponential margins:

``wt`` (ray extrapolation)
    The tail index of the structure variable T = min(X_E/w, Y_E/(1-w))
    along the ray through the corner is estimated by the reciprocal mean
    excess above a high threshold u (the Hill estimator, here named
    lambda_hat). The target probability is exp(-lambda_hat * v) times the
    empirical probability of the base set at u, where v is the distance
    travelled outward along the ray.

``lt`` (diagonal extrapolation)
    Classical joint-tail extrapolation parallel to the diagonal: the
    corner is slid back by (v, v) until it reaches empirical support, and
    the empirical base probability is scaled by exp(-v/eta_hat) with the
    tail dependence coefficient eta estimated on the diagonal ray,
    1/eta_hat = 2*lambda_hat(1/2).

``ht`` (conditional simulation)
    A conditional-tail model for X_E given Y_E large, with location
    a(y) = alpha*y and scale b(y) = y**beta fitted by a working-normal
    likelihood. The probability factorizes into the exact marginal
    exceedance term and a Monte Carlo estimate over resampled residuals.

Zero estimates are recorded outcomes, never exceptions: downstream
benchmarking counts them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _kernels as knl
from .copulas import SurvivorSet
from .errors import (
    DomainError,
    ExtrapolationError,
    InsufficientExceedancesError,
    OptimizerError,
)
from .margins import ExponentialSample

_MIN_EXCEEDANCES = 5
_MIN_HT_EXCEEDANCES = 50
_HT_STARTS_ALPHA = (0.0, 0.25, 0.5, 0.75, 1.0)
_HT_STARTS_BETA = (-1.0, 0.0, 0.5)
_HT_GRAD_TOL = 1e-6


@dataclass(frozen=True)
class AngularFit:
    """Hill fit of the structure-variable tail along one ray."""

    omega: float
    lambda_hat: float
    u: float
    k: int
    se: float

    def __post_init__(self):
        if not (self.lambda_hat > 0.0 and math.isfinite(self.lambda_hat)):
            raise DomainError(f"lambda_hat must be positive, got {self.lambda_hat}")
        if self.k < 1:
            raise DomainError(f"exceedance count must be >= 1, got {self.k}")
        if self.u < 0.0:
            raise DomainError(f"threshold must be >= 0, got {self.u}")


@dataclass(frozen=True)
class HTFit:
    """Fitted conditional-tail model for X_E given Y_E > u_y.

    ``alpha`` scales the linear location term, ``beta`` the power-law
    scale; ``residuals`` are z_i = (x_i - alpha*y_i) / y_i**beta with
    empirical location ``mu`` and scale ``sigma``.
    """

    alpha: float
    beta: float
    u_y: float
    residuals: np.ndarray
    mu: float
    sigma: float
    nll: float
    grad_norm: float

    def __post_init__(self):
        if len(self.residuals) < 10:
            raise DomainError(
                f"need at least 10 residuals, got {len(self.residuals)}"
            )
        if not self.sigma > 0.0:
            raise DomainError(f"residual scale must be > 0, got {self.sigma}")

    @property
    def n_exceedances(self):
        return len(self.residuals)


@dataclass(frozen=True)
class ProbEstimate:
    """A tail probability estimate with its method tag and bookkeeping."""

    value: float
    method: str
    is_zero: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0.0 or self.value > 1.0:
            raise DomainError(f"probability estimate outside [0, 1]: {self.value}")
        if self.is_zero != (self.value == 0.0):
            raise DomainError("is_zero flag inconsistent with value")
        if self.method not in ("wt", "lt", "ht", "empirical"):
            raise DomainError(f"unknown method tag {self.method!r}")

    def as_dict(self):
        return {
            "value": self.value,
            "method": self.method,
            "is_zero": self.is_zero,
            **self.meta,
        }


def _require_bivariate(sample: ExponentialSample):
    if sample.dim != 2:
        raise DomainError("estimators operate on bivariate samples only")


def structure_variable(sample: ExponentialSample, omega) -> np.ndarray:
    """T_i = min(x_i/w, y_i/(1-w)); by convention T = Y_E at w = 0 and
    T = X_E at w = 1."""
    _require_bivariate(sample)
    if not 0.0 <= omega <= 1.0:
        raise DomainError(f"omega must lie in [0, 1], got {omega}")
    if omega == 0.0:
        return sample.y.copy()
    if omega == 1.0:
        return sample.x.copy()
    return knl.structure_min(sample.x, sample.y, omega, 1.0 - omega)


def _structure_general(sample, gx, gy):
    # general positive ray weights; used by the homogeneity property test
    if gx == 0.0:
        return sample.y / gy
    if gy == 0.0:
        return sample.x / gx
    return knl.structure_min(sample.x, sample.y, gx, gy)


def fit_lambda(sample, omega, frac=0.10, u=None) -> AngularFit:
    """Hill fit of the structure-variable tail index along the ray omega.

    The threshold is the empirical (1 - frac) quantile of T unless ``u``
    is given explicitly; lambda_hat = k / sum(T_i - u over T_i > u) with
    standard error lambda_hat / sqrt(k).
    """
    t = structure_variable(sample, omega)
    return _fit_lambda_from_t(t, omega, frac, u)


def fit_lambda_growth(sample, growth, frac=0.10, u=None) -> AngularFit:
    """Hill fit along a general growth direction (gx, gy); the estimator
    scales exactly as lambda_hat(h*g) = h * lambda_hat(g)."""
    gx, gy = (float(v) for v in growth)
    if gx < 0 or gy < 0 or gx + gy == 0.0:
        raise DomainError(f"invalid growth direction {growth}")
    t = _structure_general(sample, gx, gy)
    omega = gx / (gx + gy)
    return _fit_lambda_from_t(t, omega, frac, u)


def _fit_lambda_from_t(t, omega, frac, u):
    if u is None:
        if not 0.0 < frac < 1.0:
            raise DomainError(f"frac must lie in (0, 1), got {frac}")
        u = float(np.quantile(t, 1.0 - frac))
    k, total_excess = knl.excess_stats(t, u)
    if k < _MIN_EXCEEDANCES:
        raise InsufficientExceedancesError(k, _MIN_EXCEEDANCES)
    if total_excess <= 0.0:
        raise DomainError("all excesses are zero; tail index undefined")
    lam = k / total_excess
    return AngularFit(omega=omega, lambda_hat=lam, u=u, k=k, se=lam / math.sqrt(k))


def wt_probability(sample, omega, u_n=None, v=0.0, frac=0.10, fit=None) -> ProbEstimate:
    """Ray-extrapolation estimate of P(X_E > w(u+v), Y_E > (1-w)(u+v)).

    The estimate is exp(-lambda_hat * v) times the empirical probability
    of the base set {X_E > w*u_n, Y_E > (1-w)*u_n}. With the default
    u_n = fit threshold, the base count equals the exceedance count of the
    Hill fit. An empty base set yields a zero estimate, never an error.
    """
    _require_bivariate(sample)
    if v < 0.0:
        raise DomainError(f"extrapolation distance v must be >= 0, got {v}")
    if fit is None:
        fit = fit_lambda(sample, omega, frac=frac)
    if u_n is None:
        u_n = fit.u
    if omega == 0.0:
        base = int(np.count_nonzero(sample.y > u_n))
    elif omega == 1.0:
        base = int(np.count_nonzero(sample.x > u_n))
    else:
        base = knl.count_joint_exceedances(
            sample.x, sample.y, omega * u_n, (1.0 - omega) * u_n
        )
    value = math.exp(-fit.lambda_hat * v) * base / sample.n
    return ProbEstimate(
        value=value,
        method="wt",
        is_zero=(base == 0),
        meta={
            "omega": omega,
            "u_n": u_n,
            "v": v,
            "k": fit.k,
            "lambda_hat": fit.lambda_hat,
        },
    )


def wt_probability_at(sample, target, frac=0.10) -> ProbEstimate:
    """Ray estimate at an explicit corner: the ray is the one through the
    corner, and v is the outward distance from the fit threshold."""
    x0, y0 = (
        target.corner if isinstance(target, SurvivorSet) else SurvivorSet(tuple(target)).corner
    )
    if x0 + y0 == 0.0:
        raise DomainError("target corner must not be the origin")
    omega = x0 / (x0 + y0)
    fit = fit_lambda(sample, omega, frac=frac)
    s_target = x0 + y0  # radial coordinate: corner = (w*s, (1-w)*s)
    v = s_target - fit.u
    if v < 0.0:
        # target inside the threshold: plain empirical probability
        base = knl.count_joint_exceedances(sample.x, sample.y, x0, y0)
        return ProbEstimate(
            value=base / sample.n,
            method="wt",
            is_zero=(base == 0),
            meta={"omega": omega, "u_n": s_target, "v": 0.0, "k": fit.k,
                  "lambda_hat": fit.lambda_hat},
        )
    return wt_probability(sample, omega, u_n=fit.u, v=v, fit=fit)


def lt_probability(sample, target, u_n=None, frac=0.10, baseline=None) -> ProbEstimate:
    """Diagonal-extrapolation estimate of the corner probability.

    The corner is slid back along the diagonal by the largest v keeping
    both coordinates at or above the baseline; the empirical probability
    of the slid set is scaled by exp(-v / eta_hat) with
    1/eta_hat = 2*lambda_hat(1/2).

    The baseline defaults to the per-margin empirical (1 - frac)
    quantiles. Passing ``u_n`` instead uses (u_n/2, u_n/2), the structure
    threshold of the diagonal fit split evenly; passing ``baseline``
    overrides both.
    """
    _require_bivariate(sample)
    x0, y0 = (
        target.corner if isinstance(target, SurvivorSet) else SurvivorSet(tuple(target)).corner
    )
    diag_fit = fit_lambda(sample, 0.5, frac=frac)
    eta_hat = 1.0 / (2.0 * diag_fit.lambda_hat)
    if baseline is not None:
        bx, by = (float(b) for b in baseline)
    elif u_n is not None:
        bx = by = 0.5 * float(u_n)
    else:
        bx = float(np.quantile(sample.x, 1.0 - frac))
        by = float(np.quantile(sample.y, 1.0 - frac))
    v = max(0.0, min(x0 - bx, y0 - by))
    base = knl.count_joint_exceedances(sample.x, sample.y, x0 - v, y0 - v)
    value = math.exp(-v / eta_hat) * base / sample.n
    return ProbEstimate(
        value=value,
        method="lt",
        is_zero=(base == 0),
        meta={
            "eta_hat": eta_hat,
            "lambda_half": diag_fit.lambda_hat,
            "v": v,
            "base_corner": (x0 - v, y0 - v),
            "k": diag_fit.k,
        },
    )


def _ht_objective(params, x, y, logy):
    nll, ga, gb = knl.ht_profile_nll_grad(params[0], params[1], x, y, logy)
    return nll, np.array([ga, gb])


def fit_ht(sample, quantile=0.90, u_y=None) -> HTFit:
    """Fit the conditional-tail model X_E | Y_E = y ~ Normal(alpha*y +
    mu*y**beta, (sigma*y**beta)**2) above the conditioning threshold.

    alpha is constrained to [0, 1] and beta to (-inf, 1); mu and sigma are
    profiled out of the likelihood. The optimizer is a bounded
    quasi-Newton run from a 5 x 3 multistart grid; non-convergence (best
    projected gradient norm above 1e-6) raises with the best point found.
    """
    _require_bivariate(sample)
    if u_y is None:
        if not 0.0 < quantile < 1.0:
            raise DomainError(f"quantile must lie in (0, 1), got {quantile}")
        u_y = float(np.quantile(sample.y, quantile))
    mask = sample.y > u_y
    n_exc = int(np.count_nonzero(mask))
    if n_exc < _MIN_HT_EXCEEDANCES:
        raise InsufficientExceedancesError(n_exc, _MIN_HT_EXCEEDANCES)
    x = np.ascontiguousarray(sample.x[mask])
    y = np.ascontiguousarray(sample.y[mask])
    if np.min(y) <= 0.0:
        raise DomainError("conditioning threshold must keep Y_E positive")
    logy = np.log(y)
    best = None
    for a0 in _HT_STARTS_ALPHA:
        for b0 in _HT_STARTS_BETA:
            res = minimize(
                _ht_objective,
                x0=np.array([a0, b0]),
                args=(x, y, logy),
                jac=True,
                method="L-BFGS-B",
                bounds=[(0.0, 1.0), (None, 1.0 - 1e-8)],
                options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-9},
            )
            if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
                best = res
    if best is None:
        raise OptimizerError("conditional-tail likelihood never finite", None, math.inf)
    xbest, fbest, gbest = np.array(best.x), float(best.fun), np.array(best.jac)
    gnorm = _projected_grad_norm(xbest, gbest, lo=(0.0, -math.inf), hi=(1.0, 1.0))
    if gnorm > _HT_GRAD_TOL * max(1.0, abs(fbest)):
        # the line search stalls once objective changes drop below float
        # noise while the gradient is still a few 1e-6; Newton steps with a
        # finite-difference Hessian polish off the last ~1e-7 in parameters
        xbest, fbest, gbest = _newton_polish(xbest, fbest, gbest, x, y, logy)
        gnorm = _projected_grad_norm(xbest, gbest, lo=(0.0, -math.inf), hi=(1.0, 1.0))
    alpha, beta = float(xbest[0]), float(xbest[1])
    if gnorm > _HT_GRAD_TOL * max(1.0, abs(fbest)):
        raise OptimizerError(
            "conditional-tail fit did not converge", (alpha, beta), gnorm
        )
    z = (x - xbest[0] * y) / np.exp(xbest[1] * logy)
    sigma = float(np.std(z))
    if sigma <= 0.0:
        raise OptimizerError("degenerate residual scale", (alpha, beta), gnorm)
    return HTFit(
        alpha=alpha,
        beta=beta,
        u_y=u_y,
        residuals=z,
        mu=float(np.mean(z)),
        sigma=sigma,
        nll=fbest,
        grad_norm=gnorm,
    )


def _newton_polish(xvec, fval, grad, x, y, logy, max_steps=3):
    h = 1e-6
    for _ in range(max_steps):
        hess = np.empty((2, 2))
        for j in range(2):
            step = np.zeros(2)
            step[j] = h
            _, gpa, gpb = knl.ht_profile_nll_grad(*(xvec + step), x, y, logy)
            _, gma, gmb = knl.ht_profile_nll_grad(*(xvec - step), x, y, logy)
            hess[:, j] = [(gpa - gma) / (2 * h), (gpb - gmb) / (2 * h)]
        try:
            delta = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        cand = np.clip(xvec - delta, (0.0, -np.inf), (1.0, 1.0 - 1e-8))
        fc, gca, gcb = knl.ht_profile_nll_grad(cand[0], cand[1], x, y, logy)
        if not np.isfinite(fc) or fc > fval + 1e-10 * max(1.0, abs(fval)):
            break
        xvec, fval, grad = cand, fc, np.array([gca, gcb])
        if _projected_grad_norm(xvec, grad, (0.0, -np.inf), (1.0, 1.0)) <= (
            _HT_GRAD_TOL * max(1.0, abs(fval))
        ):
            break
    return xvec, fval, grad


def _projected_grad_norm(xvec, grad, lo, hi):
    pg = []
    for xi, gi, lo_i, hi_i in zip(xvec, grad, lo, hi):
        if xi <= lo_i + 1e-12 and gi > 0.0:
            pg.append(0.0)
        elif xi >= hi_i - 1e-12 and gi < 0.0:
            pg.append(0.0)
        else:
            pg.append(gi)
    return float(np.max(np.abs(pg)))


def ht_probability(fit: HTFit, omega, u_n, r=10_000, seed=0) -> ProbEstimate:
    """Conditional-simulation estimate of P(X_E > w u_n, Y_E > (1-w) u_n).

    The marginal factor P(Y_E > (1-w)u_n) is the exact exponential
    survivor; the conditional factor is a Monte Carlo average over r
    conditioning draws Y* (exponential beyond the event threshold, by
    memorylessness) paired with residuals resampled from the fit.
    Deterministic for a fixed seed.
    """
    if not 0.0 <= omega < 1.0:
        raise DomainError(f"omega must lie in [0, 1), got {omega}")
    if r < 1:
        raise DomainError(f"draw count must be >= 1, got {r}")
    y_thresh = (1.0 - omega) * u_n
    if y_thresh < fit.u_y:
        raise ExtrapolationError(
            f"event threshold {y_thresh:.4f} lies below the fit threshold "
            f"{fit.u_y:.4f}"
        )
    rng = np.random.default_rng(seed)
    ystar = y_thresh + rng.standard_exponential(r)
    z = fit.residuals[rng.integers(0, fit.n_exceedances, size=r)]
    frac_cond = knl.ht_indicator_fraction(ystar, z, fit.alpha, fit.beta, omega * u_n)
    value = math.exp(-y_thresh) * frac_cond
    return ProbEstimate(
        value=value,
        method="ht",
        is_zero=(frac_cond == 0.0),
        meta={
            "omega": omega,
            "u_n": u_n,
            "r": r,
            "seed": seed,
            "alpha": fit.alpha,
            "beta": fit.beta,
        },
    )


def diagnose_linearity(sample, omega, c_grid) -> dict:
    """Log joint exceedance counts along nested ray corners.

    For each c in the grid, counts points in (c*w*log m, inf) x
    (c*(1-w)*log m, inf). Under a power-law joint tail the log counts are
    approximately linear in c; returns the pairs plus the least-squares
    slope and R^2 over the non-empty sets.
    """
    _require_bivariate(sample)
    if not 0.0 < omega < 1.0:
        raise DomainError(f"omega must lie in (0, 1), got {omega}")
    cs = np.asarray(list(c_grid), dtype=np.float64)
    if cs.size < 3 or np.any(np.diff(cs) <= 0.0):
        raise DomainError("c grid must be increasing with at least 3 values")
    logm = math.log(sample.n)
    pairs = []
    for c in cs:
        cnt = knl.count_joint_exceedances(
            sample.x, sample.y, c * omega * logm, c * (1.0 - omega) * logm
        )
        if cnt > 0:
            pairs.append((float(c), math.log(cnt)))
    if len(pairs) < 3:
        raise InsufficientExceedancesError(len(pairs), 3)
    arr = np.asarray(pairs)
    slope, intercept = np.polyfit(arr[:, 0], arr[:, 1], 1)
    pred = slope * arr[:, 0] + intercept
    ss_res = float(np.sum((arr[:, 1] - pred) ** 2))
    ss_tot = float(np.sum((arr[:, 1] - np.mean(arr[:, 1])) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {
        "omega": omega,
        "pairs": [list(p) for p in pairs],
        "slope": float(slope),
        "intercept": float(intercept),
        "r_squared": r2,
    }


def qq_excesses(fit: AngularFit, sample) -> np.ndarray:
    """Quantile pairs (theoretical, empirical) for the excesses of the
    structure variable above the fitted threshold, against the fitted
    exponential rate; returns an array of shape (k, 2)."""
    t = structure_variable(sample, fit.omega)
    exc = np.sort(t[t > fit.u] - fit.u)
    k = exc.size
    if k < 1:
        raise InsufficientExceedancesError(0, 1)
    probs = np.arange(1, k + 1) / (k + 1.0)
    theo = -np.log1p(-probs) / fit.lambda_hat
    return np.column_stack((theo, exc))
