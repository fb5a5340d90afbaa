"""Critical values C(n, alpha) for the two-sided slope test |T| > C.

Two routes:

* exact Monte Carlo — per outer replicate, draw reps_inner values from the
  exact null law of T^2, take the (1 - alpha) empirical quantile, and
  square-root it; the estimate is the mean of reps_outer such replicates
  and its standard deviation.
* normal approximation — z_{1-alpha/2} * sqrt((n-2) / ((n-3)(n-4))), valid
  for n > 4, using the exact variance of T in the asymptotic normal law.

A small text-file cache keyed on (n, alpha, reps_inner, reps_outer,
master_seed) avoids recomputing exact-MC values during sample-size searches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distmath import normal_quantile
from .stochastics import SimPlan, StreamKey, _quantile_sorted
from .exactnull import t2_null_draws

__all__ = [
    "EXACT_MC",
    "NORMAL_APPROX",
    "CriticalValueEstimate",
    "critical_value_mc",
    "critical_value_normal",
    "critical_values_mc_multi",
    "table1",
    "TABLE1_COLUMNS",
    "CriticalValueCache",
    "cached_critical_value",
]

EXACT_MC = "exact_mc"
NORMAL_APPROX = "normal_approx"

TABLE1_COLUMNS = [
    "samplesize",
    "normal10",
    "criticalvalue10",
    "normal5",
    "criticalvalue5",
    "normal1",
    "criticalvalue1",
]


@dataclass(frozen=True)
class CriticalValueEstimate:
    n: int
    alpha: float
    value: float
    sd: float
    method: str

    def __post_init__(self) -> None:
        if self.method not in (EXACT_MC, NORMAL_APPROX):
            raise ValueError(f"unknown method {self.method!r}")


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    return float(alpha)


def critical_values_mc_multi(
    n: int, alphas: list[float], plan: SimPlan
) -> list[CriticalValueEstimate]:
    """Exact-MC critical values for several levels from one set of draws.

    The T^2 draws are keyed by (master_seed, outer index) only, so the
    levels share draws and the result for each alpha is identical to a
    standalone critical_value_mc call with the same plan.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n!r}")
    alphas = [_check_alpha(a) for a in alphas]
    roots = np.empty((len(alphas), plan.reps_outer))
    for j in range(plan.reps_outer):
        draws = t2_null_draws(
            StreamKey(plan.master_seed, j), n, plan.reps_inner
        )
        draws.sort()
        for i, alpha in enumerate(alphas):
            roots[i, j] = math.sqrt(_quantile_sorted(draws, 1.0 - alpha))
    out = []
    for i, alpha in enumerate(alphas):
        sd = float(np.std(roots[i], ddof=1)) if plan.reps_outer > 1 else 0.0
        out.append(
            CriticalValueEstimate(
                n=n,
                alpha=alpha,
                value=float(np.mean(roots[i])),
                sd=sd,
                method=EXACT_MC,
            )
        )
    return out


def critical_value_mc(n: int, alpha: float, plan: SimPlan) -> CriticalValueEstimate:
    """Exact critical value by the nested Monte Carlo; deterministic given plan."""
    return critical_values_mc_multi(n, [alpha], plan)[0]


def critical_value_normal(n: int, alpha: float) -> CriticalValueEstimate:
    """Asymptotic critical value z_{1-alpha/2} * sqrt((n-2)/((n-3)(n-4)))."""
    if n <= 4:
        raise ValueError(f"n must exceed 4 for the normal approximation, got {n!r}")
    _check_alpha(alpha)
    z = normal_quantile(1.0 - 0.5 * alpha)
    value = z * math.sqrt((n - 2) / ((n - 3) * (n - 4)))
    return CriticalValueEstimate(n=n, alpha=alpha, value=value, sd=0.0, method=NORMAL_APPROX)


def table1(n_values, plan: SimPlan) -> list[dict]:
    """Rows of the critical-value table (both methods, levels 10/5/1 percent)."""
    rows = []
    for n in n_values:
        if not 5 <= n <= 10**6:
            raise ValueError(f"table rows need 5 <= n <= 1e6, got {n!r}")
        exact = critical_values_mc_multi(n, [0.10, 0.05, 0.01], plan)
        rows.append(
            {
                "samplesize": n,
                "normal10": critical_value_normal(n, 0.10).value,
                "criticalvalue10": exact[0].value,
                "normal5": critical_value_normal(n, 0.05).value,
                "criticalvalue5": exact[1].value,
                "normal1": critical_value_normal(n, 0.01).value,
                "criticalvalue1": exact[2].value,
            }
        )
    return rows


class CriticalValueCache:
    """Plain-text store of exact-MC estimates, one record per line.

    Line format (whitespace-separated, full float precision):

        n alpha reps_inner reps_outer master_seed value sd

    Corrupted lines are skipped on load; a recomputed record for an existing
    key is appended and the latest record wins, which gives overwrite
    semantics without rewriting the file. I/O failures degrade to
    recomputation with a warning rather than aborting the caller.
    """

    def __init__(self, path) -> None:
        self.path = Path(path)

    @staticmethod
    def _key(n: int, alpha: float, plan: SimPlan) -> tuple:
        return (n, repr(float(alpha)), plan.reps_inner, plan.reps_outer, plan.master_seed)

    def _load(self) -> dict:
        records: dict = {}
        if not self.path.exists():
            return records
        for line in self.path.read_text().splitlines():
            parts = line.split()
            if len(parts) != 7:
                continue
            try:
                n = int(parts[0])
                alpha = float(parts[1])
                inner = int(parts[2])
                outer = int(parts[3])
                seed = int(parts[4])
                value = float(parts[5])
                sd = float(parts[6])
            except ValueError:
                continue
            if not (value > 0.0 and sd >= 0.0 and 0.0 < alpha < 1.0):
                continue
            records[(n, repr(alpha), inner, outer, seed)] = (value, sd)
        return records

    def lookup(self, n: int, alpha: float, plan: SimPlan) -> CriticalValueEstimate | None:
        try:
            hit = self._load().get(self._key(n, alpha, plan))
        except OSError as exc:
            warnings.warn(f"critical-value cache unreadable ({exc}); recomputing")
            return None
        if hit is None:
            return None
        return CriticalValueEstimate(n=n, alpha=float(alpha), value=hit[0], sd=hit[1], method=EXACT_MC)

    def store(self, est: CriticalValueEstimate, plan: SimPlan) -> None:
        line = (
            f"{est.n} {float(est.alpha)!r} {plan.reps_inner} {plan.reps_outer} "
            f"{plan.master_seed} {est.value!r} {est.sd!r}\n"
        )
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a") as fh:
                fh.write(line)
        except OSError as exc:
            warnings.warn(f"critical-value cache unwritable ({exc}); result not persisted")


def cached_critical_value(
    n: int, alpha: float, plan: SimPlan, cache: CriticalValueCache | None = None
) -> CriticalValueEstimate:
    """Exact-MC critical value, served from the cache when the key matches."""
    if cache is not None:
        hit = cache.lookup(n, alpha, plan)
        if hit is not None:
            return hit
    est = critical_value_mc(n, alpha, plan)
    if cache is not None:
        cache.store(est, plan)
    return est
