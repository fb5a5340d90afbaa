"""Slope-test power simulation and sample-size search.

Data generation follows the reduced form of the model: the rejection law of
T = b1_hat * sx_hat / s_hat depends on the parameters only through the
effect size lam = beta1 * sigma_x / sigma_eps, so replicates are drawn with
sigma_x = sigma_eps = 1, mu_x = beta0 = 0 and beta1 = lam. Each replicate
derives its predictor and noise vectors from its own stream keys, which
makes every estimate bit-reproducible and gives common random numbers
across sample sizes for free (draws for smaller n are prefixes of draws for
larger n).

The sample-size search brackets by doubling, bisects on probe estimates,
then settles on the smallest n whose validated mean power clears the target
minus a slack band (half the binomial noise of one power estimate, at most
0.005). Validation replays the estimate across plan.reps_outer independent
runs of plan.reps_inner trials each, keyed disjointly from the search
probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .critvals import (
    CriticalValueCache,
    CriticalValueEstimate,
    cached_critical_value,
)
from .stochastics import (
    VALIDATION_TASK_BASE,
    SimPlan,
    StreamKey,
    generator,
    normal_matrix,
)

__all__ = [
    "FitError",
    "DegenerateXError",
    "PerfectFitError",
    "SearchFailureError",
    "FitStats",
    "PowerEstimate",
    "SampleSizeResult",
    "SimDiagnostics",
    "fit_slope_stats",
    "simulate_power_slope",
    "find_sample_size_slope",
    "power_table",
    "POWER_SLACK",
]

# widest slack band under the target power accepted at validation time;
# the working band shrinks with the binomial noise of one power estimate
# (see _search_slack), which keeps flat high-power curves from being
# undershot by many sample-size units
POWER_SLACK = 0.005


def _search_slack(target: float, trials: int) -> float:
    return min(POWER_SLACK, 0.5 * math.sqrt(target * (1.0 - target) / trials))


# stream roles for one slope replicate; retry k shifts both roles by 2k
_X_STREAM = 100
_EPS_STREAM = 101
_MAX_RETRIES = 64

_BATCH = 4096


class FitError(ValueError):
    """The least-squares fit does not admit the slope t statistic."""


class DegenerateXError(FitError):
    """All predictor values coincide (S_XX = 0)."""


class PerfectFitError(FitError):
    """Residual sum of squares is zero, so the t statistics are undefined."""


class SearchFailureError(RuntimeError):
    """Sample-size search exceeded its ceiling without reaching the target."""


@dataclass(frozen=True)
class FitStats:
    """Least-squares summary of one (x, y) sample."""

    n: int
    beta1_hat: float
    sigma_hat: float
    sigma_x_hat: float
    t_slope: float
    rho_hat: float
    t_corr: float
    sxx: float
    sxy: float
    rss: float


@dataclass(frozen=True)
class PowerEstimate:
    n: int
    alpha: float
    lam: float
    power: float
    sd: float


@dataclass(frozen=True)
class SampleSizeResult:
    n: int
    target_power: float
    validated_mean: float
    validated_sd: float
    route: str


@dataclass
class SimDiagnostics:
    """Counters for rare events during simulation."""

    resampled: int = 0


def fit_slope_stats(xs, ys) -> FitStats:
    """Least-squares slope fit with both t statistics.

    t_slope is beta1_hat * sigma_x_hat / sigma_hat; t_corr is the
    correlation statistic sqrt(n-2) * rho_hat / sqrt(1 - rho_hat^2). The two
    satisfy t_corr^2 = (n-1) * t_slope^2 for every non-degenerate sample.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d sequences of equal length")
    n = x.size
    if n < 3:
        raise ValueError(f"need at least 3 observations, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    sxy = float(dx @ dy)
    syy = float(dy @ dy)
    if sxx == 0.0:
        raise DegenerateXError("all predictor values are equal (S_XX = 0)")
    beta1_hat = sxy / sxx
    rss = syy - sxy * sxy / sxx
    if rss <= 0.0:
        raise PerfectFitError("residual sum of squares is zero; t statistics undefined")
    sigma_hat = math.sqrt(rss / (n - 2))
    sigma_x_hat = math.sqrt(sxx / (n - 1))
    t_slope = beta1_hat * sigma_x_hat / sigma_hat
    rho_hat = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    # 1 - rho^2 = RSS / S_YY algebraically; this form cannot cancel to zero
    # for near-collinear data the way 1 - rho_hat**2 can
    t_corr = math.sqrt((n - 2) * syy / rss) * rho_hat
    return FitStats(
        n=n,
        beta1_hat=beta1_hat,
        sigma_hat=sigma_hat,
        sigma_x_hat=sigma_x_hat,
        t_slope=t_slope,
        rho_hat=rho_hat,
        t_corr=t_corr,
        sxx=sxx,
        sxy=sxy,
        rss=rss,
    )


def _draw_pair(master_seed: int, task_id: int, n: int, attempt: int) -> tuple:
    gx = generator(StreamKey(master_seed, task_id, _X_STREAM + 2 * attempt))
    ge = generator(StreamKey(master_seed, task_id, _EPS_STREAM + 2 * attempt))
    return gx.standard_normal(n), ge.standard_normal(n)


def slope_t_batch(
    n: int,
    lam: float,
    master_seed: int,
    tasks: np.ndarray,
    diagnostics: SimDiagnostics | None = None,
) -> np.ndarray:
    """t_slope values for the replicates named by task ids, keyed per replicate.

    Degenerate replicates (zero S_XX or zero RSS, a probability-zero event)
    are resampled with shifted stream roles so the batch size stays fixed.
    """
    m = len(tasks)
    t_vals = np.empty(m)
    for start in range(0, m, _BATCH):
        chunk = tasks[start : start + _BATCH]
        b = len(chunk)
        x = normal_matrix(master_seed, chunk, _X_STREAM, n)
        e = normal_matrix(master_seed, chunk, _EPS_STREAM, n)
        y = lam * x + e
        dx = x - x.mean(axis=1, keepdims=True)
        dy = y - y.mean(axis=1, keepdims=True)
        sxx = np.einsum("ij,ij->i", dx, dx)
        sxy = np.einsum("ij,ij->i", dx, dy)
        syy = np.einsum("ij,ij->i", dy, dy)
        bad = sxx == 0.0
        sxx_safe = np.where(bad, 1.0, sxx)
        rss = syy - sxy * sxy / sxx_safe
        bad |= rss <= 0.0
        rss_safe = np.where(bad, 1.0, rss)
        t = (sxy / sxx_safe) * np.sqrt(sxx_safe / (n - 1)) / np.sqrt(rss_safe / (n - 2))
        for i in np.flatnonzero(bad):
            t[i] = _resample_replicate(n, lam, master_seed, int(chunk[i]), diagnostics)
        t_vals[start : start + b] = t
    return t_vals


def _resample_replicate(
    n: int, lam: float, master_seed: int, task: int, diagnostics: SimDiagnostics | None
) -> float:
    for attempt in range(1, _MAX_RETRIES + 1):
        if diagnostics is not None:
            diagnostics.resampled += 1
        x, e = _draw_pair(master_seed, task, n, attempt)
        try:
            return fit_slope_stats(x, lam * x + e).t_slope
        except FitError:
            continue
    raise SearchFailureError(f"replicate {task} stayed degenerate after {_MAX_RETRIES} retries")


def simulate_power_slope(
    n: int,
    lam: float,
    alpha: float,
    c: CriticalValueEstimate,
    reps: int,
    master_seed: int,
    task_base: int = 0,
    diagnostics: SimDiagnostics | None = None,
) -> PowerEstimate:
    """Rejection rate of |t_slope| > c.value over reps simulated samples.

    task_base selects the replicate keys, so runs with distinct bases are
    independent and runs with equal bases share draws (common random
    numbers).
    """
    if n < 5:
        raise ValueError(f"n must be at least 5, got {n!r}")
    if reps < 1:
        raise ValueError(f"reps must be positive, got {reps!r}")
    tasks = np.arange(task_base, task_base + reps, dtype=np.int64)
    t_vals = slope_t_batch(n, lam, master_seed, tasks, diagnostics)
    power = float(np.count_nonzero(np.abs(t_vals) > c.value)) / reps
    sd = math.sqrt(power * (1.0 - power) / reps)
    return PowerEstimate(n=n, alpha=alpha, lam=lam, power=power, sd=sd)


@dataclass
class _Validation:
    mean: float
    sd: float
    runs: int


class _SlopeSearch:
    """State shared across one sample-size search (probes, validations, cache)."""

    def __init__(
        self,
        lam: float,
        alpha: float,
        target: float,
        plan: SimPlan,
        cache: CriticalValueCache | None,
        critval_plan: SimPlan,
        n_ceiling: int,
    ) -> None:
        self.lam = lam
        self.alpha = alpha
        self.target = target
        self.plan = plan
        self.cache = cache
        self.critval_plan = critval_plan
        self.n_ceiling = n_ceiling
        self.threshold = target - _search_slack(target, plan.reps_inner)
        self.scout_runs = min(50, plan.reps_outer)
        self.diagnostics = SimDiagnostics()
        self._full: dict[int, _Validation] = {}
        self._critvals: dict[int, CriticalValueEstimate] = {}

    def critval(self, n: int) -> CriticalValueEstimate:
        if n not in self._critvals:
            self._critvals[n] = cached_critical_value(
                n, self.alpha, self.critval_plan, self.cache
            )
        return self._critvals[n]

    def probe(self, n: int) -> float:
        est = simulate_power_slope(
            n,
            self.lam,
            self.alpha,
            self.critval(n),
            self.plan.reps_inner,
            self.plan.master_seed,
            task_base=0,
            diagnostics=self.diagnostics,
        )
        return est.power

    def validate(self, n: int, runs: int) -> _Validation:
        c = self.critval(n)
        trials = self.plan.reps_inner
        powers = np.empty(runs)
        for v in range(runs):
            base = VALIDATION_TASK_BASE + v * trials
            powers[v] = simulate_power_slope(
                n,
                self.lam,
                self.alpha,
                c,
                trials,
                self.plan.master_seed,
                task_base=base,
                diagnostics=self.diagnostics,
            ).power
        sd = float(np.std(powers, ddof=1)) if runs > 1 else 0.0
        return _Validation(mean=float(np.mean(powers)), sd=sd, runs=runs)

    def full_validate(self, n: int) -> _Validation:
        if n not in self._full:
            self._full[n] = self.validate(n, self.plan.reps_outer)
        return self._full[n]

    def passes(self, n: int) -> bool:
        """Does n clear the validated threshold? Scout first, full depth if close."""
        scout = self.validate(n, self.scout_runs)
        if self.scout_runs < self.plan.reps_outer:
            margin = 3.0 * scout.sd / math.sqrt(self.scout_runs)
            if scout.mean >= self.threshold + margin:
                return True
            if scout.mean < self.threshold - margin:
                return False
        else:
            self._full[n] = scout
            return scout.mean >= self.threshold
        return self.full_validate(n).mean >= self.threshold


def _refine_validated(search: "_SlopeSearch", start: int, n_ceiling: int) -> int:
    """Smallest n clearing the validated threshold, near the probe answer.

    Brackets with geometrically growing steps, then bisects; the power curve
    can be nearly flat around high targets, so stepping one n at a time
    would need O(band/slope) validations instead of O(log).
    """
    if search.passes(start):
        passing = start
        step = 1
        failing = 4
        while passing > 5:
            trial = max(5, passing - step)
            if search.passes(trial):
                passing = trial
                step *= 2
            else:
                failing = trial
                break
    else:
        failing = start
        step = 1
        while True:
            trial = failing + step
            if trial > n_ceiling:
                raise SearchFailureError(
                    f"validated power never reached {search.threshold} below n={n_ceiling}"
                )
            if search.passes(trial):
                passing = trial
                break
            failing = trial
            step *= 2
    while passing - failing > 1:
        mid = (failing + passing) // 2
        if search.passes(mid):
            passing = mid
        else:
            failing = mid
    return passing


def find_sample_size_slope(
    lam: float,
    alpha: float,
    target: float,
    plan: SimPlan,
    *,
    cache: CriticalValueCache | None = None,
    critval_plan: SimPlan | None = None,
    n_ceiling: int = 10**6,
) -> SampleSizeResult:
    """Smallest n whose validated mean power clears target minus the slack band.

    Brackets by doubling from n = 5 using probe estimates of plan.reps_inner
    trials under common random numbers, bisects, then refines under the
    validated-mean rule (bracket and bisect again, on validations). The
    returned mean and sd come from a full validation (plan.reps_outer
    independent runs) at the final n. Critical values are exact-MC by
    default, served through the cache; pass critval_plan to control their
    replication counts.
    """
    if lam == 0.0:
        raise ValueError("effect size must be nonzero")
    if not 0.0 < target < 1.0:
        raise ValueError(f"target power must lie inside (0, 1), got {target!r}")
    if critval_plan is None:
        critval_plan = SimPlan(reps_inner=10_000, reps_outer=200, master_seed=plan.master_seed)
    search = _SlopeSearch(lam, alpha, target, plan, cache, critval_plan, n_ceiling)

    lo, hi = 4, 5
    while search.probe(hi) < target:
        lo = hi
        hi *= 2
        if hi > n_ceiling:
            raise SearchFailureError(
                f"no n <= {n_ceiling} reached probe power {target} at lam={lam}, alpha={alpha}"
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if search.probe(mid) >= target:
            hi = mid
        else:
            lo = mid

    cand = _refine_validated(search, max(hi, 5), n_ceiling)
    final = search.full_validate(cand)
    # a scout can (rarely) pass a candidate the full validation rejects
    while final.mean < search.threshold:
        cand += 1
        if cand > n_ceiling:
            raise SearchFailureError(
                f"validated power never reached {search.threshold} below n={n_ceiling}"
            )
        final = search.full_validate(cand)
    return SampleSizeResult(
        n=cand,
        target_power=target,
        validated_mean=final.mean,
        validated_sd=final.sd,
        route="slope",
    )


def power_table(
    alpha: float,
    lambdas,
    targets,
    plan: SimPlan,
    *,
    cache: CriticalValueCache | None = None,
    critval_plan: SimPlan | None = None,
) -> list[dict]:
    """Sample-size rows {lambda, power, n, mean, sd} over a lambda x target grid."""
    rows = []
    for lam in lambdas:
        for target in targets:
            res = find_sample_size_slope(
                lam, alpha, target, plan, cache=cache, critval_plan=critval_plan
            )
            rows.append(
                {
                    "lambda": lam,
                    "power": target,
                    "n": res.n,
                    "mean": res.validated_mean,
                    "sd": res.validated_sd,
                }
            )
    return rows
