"""Hot numeric kernels with numba-accelerated and pure-numpy implementations.

Every kernel exists in two functionally identical variants: a vectorized
numpy version (suffix ``_np``) and a numba ``@njit`` loop version (suffix
``_nb``). The public, unsuffixed names are bound at import time: numba is
used when it imports cleanly and the environment variable
``RAYTAIL_DISABLE_NUMBA`` is unset (or set to ``0``/``false``/empty).

Both variants are deterministic; they may differ in the last few ulps
because numpy reduces with pairwise summation while the jitted loops
accumulate sequentially. ``benchmarks/kernel_bench.py`` times the two paths
against each other.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "structure_min",
    "excess_stats",
    "count_joint_exceedances",
    "ht_profile_nll_grad",
    "ht_indicator_fraction",
]


def _numba_disabled_by_env() -> bool:
    flag = os.environ.get("RAYTAIL_DISABLE_NUMBA", "")
    return flag.strip().lower() not in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def structure_min_np(x, y, gx, gy):
    """Componentwise min{x/gx, y/gy} for positive ray weights gx, gy."""
    return np.minimum(x / gx, y / gy)


def excess_stats_np(t, u):
    """Count and summed excess of the entries of ``t`` strictly above ``u``."""
    exc = t[t > u]
    return exc.size, float(np.sum(exc - u))


def count_joint_exceedances_np(x, y, x0, y0):
    """Number of rows with x > x0 and y > y0 simultaneously."""
    return int(np.count_nonzero((x > x0) & (y > y0)))


def ht_profile_nll_grad_np(alpha, beta, x, y, logy):
    """Profile negative log-likelihood of the conditional-tail working model.

    The model is x | y ~ Normal(alpha*y + mu*y**beta, (sigma*y**beta)**2)
    with mu, sigma profiled out analytically. Returns (nll, dnll/dalpha,
    dnll/dbeta); an infeasible point returns (inf, 0, 0).
    """
    k = x.size
    if beta * float(np.max(logy)) > 600.0 or beta * float(np.min(logy)) < -600.0:
        return np.inf, 0.0, 0.0
    yb = np.exp(beta * logy)
    z = (x - alpha * y) / yb
    mz = float(np.mean(z))
    s2 = float(np.mean(z * z)) - mz * mz
    if not np.isfinite(s2) or s2 <= 0.0:
        return np.inf, 0.0, 0.0
    sum_logy = float(np.sum(logy))
    nll = 0.5 * k * np.log(s2) + beta * sum_logy
    dz_da = -y / yb
    dz_db = -z * logy
    ds2_da = 2.0 * (float(np.mean(z * dz_da)) - mz * float(np.mean(dz_da)))
    ds2_db = 2.0 * (float(np.mean(z * dz_db)) - mz * float(np.mean(dz_db)))
    ga = 0.5 * k * ds2_da / s2
    gb = 0.5 * k * ds2_db / s2 + sum_logy
    return float(nll), float(ga), float(gb)


def ht_indicator_fraction_np(ystar, z, alpha, beta, x_min):
    """Fraction of simulated points alpha*y + y**beta * z exceeding x_min."""
    xs = alpha * ystar + np.exp(beta * np.log(ystar)) * z
    return float(np.count_nonzero(xs > x_min)) / ystar.size


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

_HAVE_NUMBA = False
if not _numba_disabled_by_env():
    try:
        import numba

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False

if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def structure_min_nb(x, y, gx, gy):
        n = x.size
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            a = x[i] / gx
            b = y[i] / gy
            out[i] = a if a < b else b
        return out

    @numba.njit(cache=True)
    def excess_stats_nb(t, u):
        k = 0
        s = 0.0
        for i in range(t.size):
            if t[i] > u:
                k += 1
                s += t[i] - u
        return k, s

    @numba.njit(cache=True)
    def count_joint_exceedances_nb(x, y, x0, y0):
        c = 0
        for i in range(x.size):
            if x[i] > x0 and y[i] > y0:
                c += 1
        return c

    @numba.njit(cache=True)
    def ht_profile_nll_grad_nb(alpha, beta, x, y, logy):
        k = x.size
        lmax = logy[0]
        lmin = logy[0]
        for i in range(k):
            if logy[i] > lmax:
                lmax = logy[i]
            if logy[i] < lmin:
                lmin = logy[i]
        if beta * lmax > 600.0 or beta * lmin < -600.0:
            return np.inf, 0.0, 0.0
        sz = 0.0
        szz = 0.0
        sda = 0.0
        szda = 0.0
        sdb = 0.0
        szdb = 0.0
        sly = 0.0
        for i in range(k):
            yb = np.exp(beta * logy[i])
            z = (x[i] - alpha * y[i]) / yb
            da = -y[i] / yb
            db = -z * logy[i]
            sz += z
            szz += z * z
            sda += da
            szda += z * da
            sdb += db
            szdb += z * db
            sly += logy[i]
        mz = sz / k
        s2 = szz / k - mz * mz
        if not np.isfinite(s2) or s2 <= 0.0:
            return np.inf, 0.0, 0.0
        nll = 0.5 * k * np.log(s2) + beta * sly
        ds2_da = 2.0 * (szda / k - mz * sda / k)
        ds2_db = 2.0 * (szdb / k - mz * sdb / k)
        ga = 0.5 * k * ds2_da / s2
        gb = 0.5 * k * ds2_db / s2 + sly
        return nll, ga, gb

    @numba.njit(cache=True)
    def ht_indicator_fraction_nb(ystar, z, alpha, beta, x_min):
        c = 0
        for i in range(ystar.size):
            xs = alpha * ystar[i] + np.exp(beta * np.log(ystar[i])) * z[i]
            if xs > x_min:
                c += 1
        return c / ystar.size


NUMBA_ENABLED = _HAVE_NUMBA

if NUMBA_ENABLED:
    structure_min = structure_min_nb
    excess_stats = excess_stats_nb
    count_joint_exceedances = count_joint_exceedances_nb
    ht_profile_nll_grad = ht_profile_nll_grad_nb
    # the indicator average is dominated by exp/log, where numpy's
    # vectorized libm beats the scalar jit loop ~3x on this workload (see
    # benchmarks/kernel_bench.py); the jitted variant stays available for
    # comparison
    ht_indicator_fraction = ht_indicator_fraction_np
else:
    structure_min = structure_min_np
    excess_stats = excess_stats_np
    count_joint_exceedances = count_joint_exceedances_np
    ht_profile_nll_grad = ht_profile_nll_grad_np
    ht_indicator_fraction = ht_indicator_fraction_np
