"""The correlation-test route and the slope-vs-correlation contrast.

Testing beta1 = 0 is equivalent to testing rho = 0, and the effect size
lam = beta1 * sigma_x / sigma_eps maps to the correlation through

    rho = lam / sqrt(1 + lam^2)        (inverse: lam = rho / sqrt(1 - rho^2))

Correlation power uses the bias-corrected Fisher arctanh approximation with
the critical correlation implied by the t test of the sample correlation;
a bivariate-normal Monte Carlo of the same test serves as its oracle. The
contrast table puts the slope-route sample size (simulated) next to the
correlation-route sample size (deterministic) for each (lam, target) cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .critvals import CriticalValueCache
from .distmath import normal_cdf, t_quantile
from .powersim import (
    PowerEstimate,
    SampleSizeResult,
    SearchFailureError,
    SimDiagnostics,
    find_sample_size_slope,
)
from .stochastics import SimPlan, StreamKey, generator, normal_matrix

__all__ = [
    "ContrastRow",
    "lambda_to_rho",
    "rho_to_lambda",
    "corr_power_approx",
    "corr_power_mc",
    "find_sample_size_corr",
    "contrast_table",
    "rho_lambda_curve",
]

# stream roles for one correlation replicate; retry k shifts both by 2k
_X_STREAM = 200
_Z_STREAM = 201
_MAX_RETRIES = 64


@dataclass(frozen=True)
class ContrastRow:
    alpha: float
    lam: float
    rho: float
    target_power: float
    n_slope: int
    n_corr: int
    difference: int


def lambda_to_rho(lam: float) -> float:
    """Correlation implied by the effect size; odd and strictly increasing."""
    if not math.isfinite(lam):
        raise ValueError(f"lam must be finite, got {lam!r}")
    return lam / math.sqrt(1.0 + lam * lam)


def rho_to_lambda(rho: float) -> float:
    """Effect size implied by the correlation; exact inverse of lambda_to_rho."""
    if not abs(rho) < 1.0:
        raise ValueError(f"rho must lie strictly inside (-1, 1), got {rho!r}")
    return rho / math.sqrt(1.0 - rho * rho)


def corr_power_approx(n: int, rho: float, alpha: float) -> float:
    """Two-sided power of the correlation t test, Fisher arctanh route.

    The critical correlation r_c solves the t test at level alpha; the
    rejection probability is evaluated on the arctanh scale with the
    rho / (2(n-1)) bias correction applied to the alternative.
    """
    if n < 4:
        raise ValueError(f"n must be at least 4, got {n!r}")
    if not abs(rho) < 1.0:
        raise ValueError(f"rho must lie strictly inside (-1, 1), got {rho!r}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    t = t_quantile(1.0 - 0.5 * alpha, n - 2)
    r_c = math.sqrt(t * t / (t * t + n - 2))
    z_r = math.atanh(rho) + rho / (2.0 * (n - 1))
    z_rc = math.atanh(r_c)
    s = math.sqrt(n - 3)
    return normal_cdf((z_r - z_rc) * s) + normal_cdf((-z_r - z_rc) * s)


def _corr_t1_retry(
    n: int,
    rho: float,
    master_seed: int,
    task: int,
    diagnostics: SimDiagnostics | None,
) -> float:
    """Redraw a degenerate replicate with shifted stream roles."""
    root = math.sqrt(1.0 - rho * rho)
    for attempt in range(1, _MAX_RETRIES + 1):
        if diagnostics is not None:
            diagnostics.resampled += 1
        x = generator(StreamKey(master_seed, task, _X_STREAM + 2 * attempt)).standard_normal(n)
        z = generator(StreamKey(master_seed, task, _Z_STREAM + 2 * attempt)).standard_normal(n)
        y = rho * x + root * z
        dx = x - x.mean()
        dy = y - y.mean()
        sxx = float(dx @ dx)
        syy = float(dy @ dy)
        if sxx <= 0.0 or syy <= 0.0:
            continue
        r = float(dx @ dy) / math.sqrt(sxx * syy)
        if abs(r) < 1.0:
            return math.sqrt(n - 2) * r / math.sqrt(1.0 - r * r)
    raise SearchFailureError(f"replicate {task} stayed degenerate after {_MAX_RETRIES} retries")


def corr_t1_batch(
    n: int,
    rho: float,
    master_seed: int,
    tasks,
    diagnostics: SimDiagnostics | None = None,
) -> np.ndarray:
    """T1 statistics of bivariate-normal replicates, one per task id."""
    x = normal_matrix(master_seed, tasks, _X_STREAM, n)
    z = normal_matrix(master_seed, tasks, _Z_STREAM, n)
    y = rho * x + math.sqrt(1.0 - rho * rho) * z
    dx = x - x.mean(axis=1, keepdims=True)
    dy = y - y.mean(axis=1, keepdims=True)
    sxx = np.einsum("ij,ij->i", dx, dx)
    syy = np.einsum("ij,ij->i", dy, dy)
    sxy = np.einsum("ij,ij->i", dx, dy)
    denom = sxx * syy
    bad = denom <= 0.0
    r = sxy / np.sqrt(np.where(bad, 1.0, denom))
    bad |= np.abs(r) >= 1.0
    r_safe = np.where(bad, 0.0, r)
    t1 = math.sqrt(n - 2) * r_safe / np.sqrt(1.0 - r_safe * r_safe)
    for i in np.flatnonzero(bad):
        t1[i] = _corr_t1_retry(n, rho, master_seed, int(tasks[i]), diagnostics)
    return t1


def corr_power_mc(
    n: int,
    rho: float,
    alpha: float,
    plan: SimPlan,
    diagnostics: SimDiagnostics | None = None,
) -> PowerEstimate:
    """Monte Carlo power of the correlation t test |T1| > t_{1-alpha/2, n-2}."""
    if n < 4:
        raise ValueError(f"n must be at least 4, got {n!r}")
    if not abs(rho) < 1.0:
        raise ValueError(f"rho must lie strictly inside (-1, 1), got {rho!r}")
    crit = t_quantile(1.0 - 0.5 * alpha, n - 2)
    reps = plan.reps_inner
    t1 = corr_t1_batch(n, rho, plan.master_seed, np.arange(reps), diagnostics)
    power = float(np.count_nonzero(np.abs(t1) > crit)) / reps
    sd = math.sqrt(power * (1.0 - power) / reps)
    return PowerEstimate(n=n, alpha=alpha, lam=rho_to_lambda(rho), power=power, sd=sd)


def find_sample_size_corr(
    rho: float, alpha: float, target: float, plan: SimPlan, *, n_ceiling: int = 10**6
) -> SampleSizeResult:
    """Smallest n with corr_power_approx(n) >= target (deterministic search)."""
    if not 0.0 < abs(rho) < 1.0:
        raise ValueError(f"rho must be nonzero and inside (-1, 1), got {rho!r}")
    if not 0.0 < target < 1.0:
        raise ValueError(f"target power must lie inside (0, 1), got {target!r}")
    lo, hi = 3, 4
    while corr_power_approx(hi, rho, alpha) < target:
        lo = hi
        hi *= 2
        if hi > n_ceiling:
            raise SearchFailureError(
                f"no n <= {n_ceiling} reaches power {target} at rho={rho}, alpha={alpha}"
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid < 4:
            lo = mid
            continue
        if corr_power_approx(mid, rho, alpha) >= target:
            hi = mid
        else:
            lo = mid
    n = max(hi, 5)
    return SampleSizeResult(
        n=n,
        target_power=target,
        validated_mean=corr_power_approx(n, rho, alpha),
        validated_sd=0.0,
        route="correlation",
    )


def contrast_table(
    alpha: float,
    lambdas,
    targets,
    plan: SimPlan,
    *,
    cache: CriticalValueCache | None = None,
    critval_plan: SimPlan | None = None,
) -> list[ContrastRow]:
    """Slope-route versus correlation-route sample sizes over a grid."""
    rows = []
    for lam in lambdas:
        rho = lambda_to_rho(lam)
        for target in targets:
            n_slope = find_sample_size_slope(
                lam, alpha, target, plan, cache=cache, critval_plan=critval_plan
            ).n
            n_corr = find_sample_size_corr(rho, alpha, target, plan).n
            rows.append(
                ContrastRow(
                    alpha=alpha,
                    lam=lam,
                    rho=rho,
                    target_power=target,
                    n_slope=n_slope,
                    n_corr=n_corr,
                    difference=n_slope - n_corr,
                )
            )
    return rows


def rho_lambda_curve(lambda_grid) -> list[tuple[float, float]]:
    """(lam, rho) pairs of the effect-size/correlation bridge, for plotting."""
    return [(float(lam), lambda_to_rho(float(lam))) for lam in lambda_grid]
