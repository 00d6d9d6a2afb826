"""Variance-based credibility of risk estimates and adaptive sample sizing.

The estimator variance of a reweighted risk estimate is the sample
variance of the per-sample contributions L_i = w_i * C_i divided by N.
From it we derive a relative error bound at a chosen confidence level and
the smallest sample size that would bring that bound under a target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import ValidationError
from .risk import RiskMatrices, Strategy, estimate_risk_strategy, strategy_weights

# below this many nonzero contributions the normal approximation is dubious
NORMALITY_FLOOR = 30


def normal_quantile(prob: float) -> float:
    """Inverse standard-normal CDF."""
    if not 0.0 < prob < 1.0:
        raise ValidationError(f"quantile probability must be in (0, 1), got {prob}")
    return float(ndtri(prob))


def estimate_variance(
    m: RiskMatrices, strategy: Strategy, risk: float
) -> tuple[float, float]:
    """Return (estimator variance D, per-sample variance d); d = N * D."""
    if m.n < 2:
        raise ValidationError("sample variance undefined for fewer than 2 samples")
    contributions = strategy_weights(m, strategy) * m.c
    per_sample = float(np.sum((contributions - risk) ** 2) / (m.n - 1))
    return per_sample / m.n, per_sample


def relative_error_bound(risk: float, variance: float, beta: float) -> float:
    """Half-width of the confidence interval relative to the estimate.

    The two-sided interval at confidence beta uses the (1 + beta) / 2
    standard-normal quantile (equal in magnitude to the (1 - beta) / 2 one).
    """
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"beta must be in (0, 1), got {beta}")
    if variance < 0:
        raise ValidationError("variance must be >= 0")
    if risk <= 0:
        raise ValidationError(
            "relative error bound undefined for zero risk; use the absolute half-width"
        )
    return normal_quantile((1.0 + beta) / 2.0) * math.sqrt(variance) / risk


def required_samples(
    per_sample_variance: float, risk: float, beta: float, eps_bar: float
) -> int:
    """Smallest N with predicted relative error within eps_bar at confidence beta."""
    if risk <= 0:
        raise ValidationError("required sample size undefined for zero risk")
    if eps_bar <= 0:
        raise ValidationError(f"eps_bar must be > 0, got {eps_bar}")
    z = normal_quantile((1.0 + beta) / 2.0)
    needed = per_sample_variance / risk**2 * (z / eps_bar) ** 2
    return max(1, math.ceil(needed))


@dataclass(frozen=True)
class CredibilityReport:
    risk: float
    variance: float
    per_sample_variance: float
    epsilon_hat: float | None
    beta: float
    interval: tuple[float, float]
    required_n: int | None
    n: int
    absolute_half_width: float
    nonzero_samples: int
    normality_warning: bool

    def as_dict(self) -> dict:
        return {
            "risk": self.risk,
            "variance": self.variance,
            "per_sample_variance": self.per_sample_variance,
            "epsilon_hat": self.epsilon_hat,
            "beta": self.beta,
            "interval": list(self.interval),
            "required_n": self.required_n,
            "n": self.n,
            "absolute_half_width": self.absolute_half_width,
            "nonzero_samples": self.nonzero_samples,
            "normality_warning": self.normality_warning,
        }


def report(
    m: RiskMatrices,
    strategy: Strategy,
    beta: float = 0.95,
    eps_bar: float = 0.1,
) -> CredibilityReport:
    """Full credibility assessment of one strategy's risk estimate."""
    risk = estimate_risk_strategy(m, strategy)
    variance, per_sample = estimate_variance(m, strategy, risk)
    half_width = normal_quantile((1.0 + beta) / 2.0) * math.sqrt(variance)
    if risk > 0:
        eps_hat = relative_error_bound(risk, variance, beta)
        needed = required_samples(per_sample, risk, beta, eps_bar)
    else:
        # all contributions are zero beyond Y0: only absolute bounds apply
        eps_hat = None
        needed = None
    contributions = strategy_weights(m, strategy) * m.c
    nonzero = int(np.count_nonzero(contributions))
    return CredibilityReport(
        risk=risk,
        variance=variance,
        per_sample_variance=per_sample,
        epsilon_hat=eps_hat,
        beta=beta,
        interval=(risk - half_width, risk + half_width),
        required_n=needed,
        n=m.n,
        absolute_half_width=half_width,
        nonzero_samples=nonzero,
        normality_warning=nonzero < NORMALITY_FLOOR,
    )
