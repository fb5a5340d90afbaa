"""Exact distribution theory for the slope statistic under a random predictor.

Under the five-parameter model Y|X ~ N(beta0 + beta1*X, sigma_eps^2) with
X ~ N(mu_x, sigma_x^2), the squared slope statistic T^2 = (b1_hat * sx_hat /
s_hat)^2 is, under beta1 = 0, distributed as

    T^2  ~  (n-2)/(n-1) * W1*W4 / (W2*W3)

with independent W1 ~ chi2(1), W2 ~ chi2(n-1), W3 ~ chi2(n-2), W4 ~ chi2(n-1).
This law is free of every model parameter. The module also exposes the
closed-form marginal density and moments of the slope estimator and the
scaled-t pivot (sigma_x/sigma_eps) * (b1_hat - beta1) * sqrt(n-1) ~ t(n-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stochastics import StreamKey, chisq_array

__all__ = [
    "ModelParams",
    "Moments",
    "sample_t2_null",
    "t2_null_draws",
    "beta1hat_density",
    "beta1hat_moments",
    "scaled_t_transform",
    "expected_t2",
]

# stream roles of the four chi-square factors
_W1, _W2, _W3, _W4 = 0, 1, 2, 3


@dataclass(frozen=True)
class ModelParams:
    """The five parameters of the regression model with a normal predictor."""

    beta0: float
    beta1: float
    mu_x: float
    sigma_x: float
    sigma_eps: float

    def __post_init__(self) -> None:
        if self.sigma_x <= 0.0:
            raise ValueError(f"sigma_x must be positive, got {self.sigma_x!r}")
        if self.sigma_eps <= 0.0:
            raise ValueError(f"sigma_eps must be positive, got {self.sigma_eps!r}")

    def effect_size(self) -> float:
        """lambda = beta1 * sigma_x / sigma_eps, the sole driver of power."""
        return self.beta1 * self.sigma_x / self.sigma_eps


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


def t2_null_draws(key: StreamKey, n: int, size: int) -> np.ndarray:
    """Vector of draws from the exact null law of T^2 at sample size n.

    The four chi-square factors come from stream roles 0-3 of the key's
    (master_seed, task_id) pair; the key's own stream_id is ignored.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n!r}")
    w1 = chisq_array(key.with_stream(_W1), 1, size)
    w2 = chisq_array(key.with_stream(_W2), n - 1, size)
    w3 = chisq_array(key.with_stream(_W3), n - 2, size)
    w4 = chisq_array(key.with_stream(_W4), n - 1, size)
    return (n - 2) / (n - 1) * w1 * w4 / (w2 * w3)


def sample_t2_null(key: StreamKey, n: int) -> float:
    """One draw from the exact null law of T^2 (always strictly positive)."""
    return float(t2_null_draws(key, n, 1)[0])


def beta1hat_density(b: float, n: int, params: ModelParams) -> float:
    """Marginal density of the slope estimator at b.

    f(b) = (sigma_x / (B(1/2, (n-1)/2) * sigma_eps))
           * (1 + (b - beta1)^2 * sigma_x^2 / sigma_eps^2)^(-n/2).

    Symmetric about beta1; reduces to a Cauchy density when n = 2.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n!r}")
    scale = params.sigma_x / params.sigma_eps
    z = (b - params.beta1) * scale
    log_beta = (
        math.lgamma(0.5) + math.lgamma(0.5 * (n - 1)) - math.lgamma(0.5 * n)
    )
    return scale * math.exp(-log_beta - 0.5 * n * math.log1p(z * z))


def beta1hat_moments(n: int, params: ModelParams) -> Moments:
    """Unconditional mean and variance of the slope estimator.

    The variance (1/(n-3)) * sigma_eps^2 / sigma_x^2 only exists for n > 3;
    smaller n raises rather than returning an infinity that would poison
    normal-approximation code downstream.
    """
    if n <= 3:
        raise ValueError(f"moments of the slope estimator are undefined for n <= 3, got n={n!r}")
    variance = params.sigma_eps**2 / (params.sigma_x**2 * (n - 3))
    return Moments(mean=params.beta1, variance=variance)


def scaled_t_transform(beta1hat: float, n: int, params: ModelParams) -> float:
    """Pivot (sigma_x/sigma_eps) * (beta1hat - beta1) * sqrt(n-1), ~ t(n-1)."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n!r}")
    return (
        params.sigma_x
        / params.sigma_eps
        * (beta1hat - params.beta1)
        * math.sqrt(n - 1)
    )


def expected_t2(n: int) -> float:
    """E(T^2) = (n-2) / ((n-3)(n-4)) under the null; undefined for n <= 4."""
    if n <= 4:
        raise ValueError(f"E(T^2) is undefined for n <= 4, got n={n!r}")
    return (n - 2) / ((n - 3) * (n - 4))
