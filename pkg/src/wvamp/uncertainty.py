"""Uncertainty budget for conventional and postselected (weak) measurement.

Three additive error components per channel:

* systematic: apparatus bias divided by the estimator scale (delta/g for
  position, delta/(g/d^2) for momentum);
* statistical: the confidence-eta Chebyshev radius of the sample mean,
  averaged over the binomial number of postselection survivors, divided by
  the same scale;
* nonlinear: the exact deviation of the scaled shift from the weak value,
  which is absent in conventional measurement.

A measurement is significant with confidence eta when its total does not
exceed the magnitude of the quantity being estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import FiniteObservable, SystemState, expectation_and_variance
from .errors import EtaOutOfDomain, ZeroCoupling
from .gaussian import (
    GaussianMeter,
    GaussianModelPoint,
    build_model_point,
    conventional_stats,
    survival_rate,
    variance_p,
    variance_q,
)

#: Confidences closer than this to the success-probability supremum are
#: rejected: the statistical radius diverges at the boundary.
DOMAIN_EPS = 1e-9

#: Largest sample count evaluated by full binomial summation; above it the
#: sum is truncated to a window whose discarded tail mass is below 1e-14.
EXACT_SUM_LIMIT = 100_000

_WINDOW_SIGMAS = 9.0
# Extra absolute halfwidth on top of 9 sigma; covers the skew of small-mean
# binomials where the Gaussian window alone misses more than 1e-14 of mass.
_WINDOW_PAD = 30.0


@dataclass(frozen=True)
class MeasurementConfig:
    """Apparatus and protocol parameters for one experiment design."""

    g: float
    delta_q: float
    delta_p: float
    n0: int
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.g) and self.g >= 0.0):
            raise ValueError("coupling g must be finite and nonnegative")
        for name in ("delta_q", "delta_p"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative")
        if int(self.n0) < 1:
            raise ValueError("sample count n0 must be at least 1")
        object.__setattr__(self, "n0", int(self.n0))
        if not (0.0 < self.eta < 1.0):
            raise ValueError("confidence eta must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class UncertaintyBreakdown:
    """Systematic/statistical/nonlinear components of a total uncertainty."""

    systematic: float
    statistical: float
    nonlinear: float
    total: float
    kappa: float
    survival_rate: float

    def __post_init__(self):
        parts = (self.systematic, self.statistical, self.nonlinear)
        if any(not math.isfinite(v) or v < 0.0 for v in parts):
            raise ValueError("uncertainty components must be finite and nonnegative")
        if abs(self.total - sum(parts)) > 1e-12:
            raise ValueError("total does not equal the sum of components")
        if not (0.0 <= self.survival_rate <= 1.0):
            raise ValueError("survival rate must lie in [0, 1]")


@dataclass(frozen=True)
class SignificanceVerdict:
    """Per-channel significance flags with their margins.

    A flag is true exactly when its margin (|target| minus the total
    uncertainty) is nonnegative. When the confidence is unattainable for a
    weak channel the margin is -inf and the reason field names the cause
    instead of leaving a silent NaN.
    """

    conventional_q: bool
    weak_q: bool
    weak_p: bool
    margin_conventional_q: float
    margin_weak_q: float
    margin_weak_p: float
    reason_weak_q: str | None = None
    reason_weak_p: str | None = None

    def __post_init__(self):
        checks = (
            (self.conventional_q, self.margin_conventional_q),
            (self.weak_q, self.margin_weak_q),
            (self.weak_p, self.margin_weak_p),
        )
        for flag, margin in checks:
            if flag != (margin >= 0.0):
                raise ValueError("flag inconsistent with margin sign")


def chebyshev_bound(variance: float, n: int, kappa: float) -> float:
    """Lower bound on P(|sample mean - expectation| <= kappa) for n samples."""
    if variance < 0.0 or n < 1 or kappa <= 0.0:
        raise ValueError("need variance >= 0, n >= 1, kappa > 0")
    return max(1.0 - variance / (n * kappa * kappa), 0.0)


def success_ceiling(n0: int, r: float) -> float:
    """Supremum ``1 - (1 - r)**n0`` of the postselected success probability."""
    if not (0.0 <= r <= 1.0):
        raise ValueError("survival rate must lie in [0, 1]")
    if r == 1.0:
        return 1.0
    return -math.expm1(n0 * math.log1p(-r))


def _pmf_range(n0: int, r: float, truncate: bool) -> tuple[np.ndarray, np.ndarray]:
    """Binomial pmf over N in [1, n0], in stable log space.

    With ``truncate`` the range shrinks to mean +- (9 sigma + 30); both
    tails outside carry less than 1e-14 of probability mass, so each
    clamped summand (bounded by 1) is discarded below the 1e-12 accuracy
    target. The absolute pad covers the skew of small-mean binomials
    where the Gaussian window alone is not enough.
    """
    if r == 0.0:
        return np.array([], dtype=float), np.array([], dtype=float)
    if r == 1.0:
        return np.array([float(n0)]), np.array([1.0])
    if truncate:
        mean = n0 * r
        spread = _WINDOW_SIGMAS * math.sqrt(n0 * r * (1.0 - r)) + _WINDOW_PAD
        lo = max(1, int(math.floor(mean - spread)))
        hi = min(n0, int(math.ceil(mean + spread)))
    else:
        lo, hi = 1, n0
    ns = np.arange(lo, hi + 1, dtype=float)
    logpmf = (
        gammaln(n0 + 1.0)
        - gammaln(ns + 1.0)
        - gammaln(n0 - ns + 1.0)
        + ns * math.log(r)
        + (n0 - ns) * math.log1p(-r)
    )
    return ns, np.exp(logpmf)


def _pmf_window(n0: int, r: float) -> tuple[np.ndarray, np.ndarray]:
    return _pmf_range(n0, r, truncate=n0 > EXACT_SUM_LIMIT)


def pi_average(
    kappa: float,
    n0: int,
    r: float,
    variance: float,
    *,
    method: str = "auto",
) -> float:
    """Binomial average of the per-count Chebyshev bound.

    ``sum_N Bi[N; n0, r] * max(1 - variance / (N kappa^2), 0)`` over
    N = 1..n0. Nondecreasing in kappa, nonincreasing in variance, with
    supremum ``success_ceiling(n0, r)`` as kappa -> inf. The N = 0 branch
    carries zero success probability by construction.

    ``method`` selects the evaluation strategy: "exact" sums every term,
    "truncated" uses the tail-safe window, "auto" picks by n0.
    """
    if kappa <= 0.0 or variance < 0.0 or n0 < 1 or not (0.0 <= r <= 1.0):
        raise ValueError("arguments out of range")
    if method == "auto":
        truncate = n0 > EXACT_SUM_LIMIT
    elif method == "exact":
        truncate = False
    elif method == "truncated":
        truncate = True
    else:
        raise ValueError(f"unknown method {method!r}")
    ns, pmf = _pmf_range(n0, r, truncate)
    if ns.size == 0:
        return 0.0
    factors = np.clip(1.0 - variance / (ns * kappa * kappa), 0.0, None)
    return float(np.dot(pmf, factors))


def kappa_inverse(eta: float, n0: int, r: float, variance: float) -> float:
    """Invert the binomial-averaged Chebyshev bound for its radius.

    Returns the kappa at which ``pi_average`` reaches eta, found by
    doubling a bracket up from ``sqrt(variance / n0)`` (where the average
    is exactly zero) and bisecting to relative width 1e-14.

    Raises
    ------
    EtaOutOfDomain
        When eta is not at least DOMAIN_EPS below the supremum
        ``1 - (1 - r)**n0``, where the radius diverges.
    """
    if n0 < 1 or not (0.0 <= r <= 1.0) or variance < 0.0:
        raise ValueError("arguments out of range")
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    ceiling = success_ceiling(n0, r)
    if eta >= ceiling - DOMAIN_EPS:
        raise EtaOutOfDomain(
            f"eta = {eta!r} not below the attainable ceiling {ceiling!r} "
            f"by at least {DOMAIN_EPS}"
        )
    if variance == 0.0:
        # Every survivor is exact; the average jumps to the ceiling for any
        # positive radius.
        return 0.0
    ns, pmf = _pmf_window(n0, r)

    def average(k: float) -> float:
        factors = np.clip(1.0 - variance / (ns * k * k), 0.0, None)
        return float(np.dot(pmf, factors))

    lo = math.sqrt(variance / n0)
    hi = lo
    for _ in range(200):
        hi *= 2.0
        if average(hi) >= eta:
            break
    else:
        raise RuntimeError("failed to bracket the statistical radius")
    for _ in range(250):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        if average(mid) < eta:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            return 0.5 * (lo + hi)
    raise RuntimeError("bisection failed to converge")


def nonlinear_term_q(pt: GaussianModelPoint) -> float:
    """Exact deviation |shift_q/g - Re(weak value)| in closed form."""
    return abs(pt.params.centered_weak_value.real) * abs(
        pt.params.amplification * pt.displacement_deficit / pt.rate_factor
    )


def nonlinear_term_p(pt: GaussianModelPoint) -> float:
    """Exact deviation |shift_p/(g/d^2) - Im(weak value)| in closed form."""
    return abs(pt.params.centered_weak_value.imag) * abs(
        (1.0 + pt.params.amplification)
        * pt.displacement_deficit
        / pt.rate_factor
    )


def conventional_uncertainty(
    cfg: MeasurementConfig,
    pre: SystemState,
    obs: FiniteObservable,
    meter: GaussianMeter,
) -> UncertaintyBreakdown:
    """Total position-channel uncertainty without postselection.

    ``delta_q/g + sqrt((d^2/2 + g^2 Var_A) / (g^2 n0 (1 - eta)))``; the
    nonlinear component is exactly zero because the conventional shift is
    linear in g at all orders.
    """
    if cfg.g == 0.0:
        raise ZeroCoupling("conventional estimator divides by g")
    _, var_total = conventional_stats(pre, obs, cfg.g, meter)
    kappa = math.sqrt(var_total / (cfg.n0 * (1.0 - cfg.eta)))
    systematic = cfg.delta_q / cfg.g
    statistical = kappa / cfg.g
    return UncertaintyBreakdown(
        systematic=systematic,
        statistical=statistical,
        nonlinear=0.0,
        total=systematic + statistical + 0.0,
        kappa=kappa,
        survival_rate=1.0,
    )


def weak_uncertainty_q(
    cfg: MeasurementConfig,
    pt: GaussianModelPoint,
    total_overlap: complex,
) -> UncertaintyBreakdown:
    """Total uncertainty of estimating Re(weak value) from the position shift."""
    if cfg.g == 0.0:
        raise ZeroCoupling("weak estimator divides by g")
    r = survival_rate(pt, total_overlap)
    kappa = kappa_inverse(cfg.eta, cfg.n0, r, variance_q(pt))
    systematic = cfg.delta_q / cfg.g
    statistical = kappa / cfg.g
    nonlinear = nonlinear_term_q(pt)
    return UncertaintyBreakdown(
        systematic=systematic,
        statistical=statistical,
        nonlinear=nonlinear,
        total=systematic + statistical + nonlinear,
        kappa=kappa,
        survival_rate=r,
    )


def weak_uncertainty_p(
    cfg: MeasurementConfig,
    pt: GaussianModelPoint,
    total_overlap: complex,
) -> UncertaintyBreakdown:
    """Total uncertainty of estimating Im(weak value) from the momentum shift."""
    if cfg.g == 0.0:
        raise ZeroCoupling("weak estimator divides by g")
    scale = cfg.g / pt.meter.d**2
    r = survival_rate(pt, total_overlap)
    kappa = kappa_inverse(cfg.eta, cfg.n0, r, variance_p(pt))
    systematic = cfg.delta_p / scale
    statistical = kappa / scale
    nonlinear = nonlinear_term_p(pt)
    return UncertaintyBreakdown(
        systematic=systematic,
        statistical=statistical,
        nonlinear=nonlinear,
        total=systematic + statistical + nonlinear,
        kappa=kappa,
        survival_rate=r,
    )


def significance(
    cfg: MeasurementConfig,
    pre: SystemState,
    obs: FiniteObservable,
    meter: GaussianMeter,
    post: SystemState,
) -> SignificanceVerdict:
    """Check the three significance conditions for one selection pair.

    Conventional: total conventional uncertainty within |E_A(pre)|.
    Weak Q / weak P: total weak uncertainty within |Re| / |Im| of the weak
    value. An unattainable confidence marks the affected weak channel as
    not significant with margin -inf and an explicit reason.
    """
    conv = conventional_uncertainty(cfg, pre, obs, meter)
    e, _ = expectation_and_variance(pre, obs)
    margin_conv = abs(e) - conv.total

    pt, total_overlap = build_model_point(pre, post, obs, cfg.g, meter)
    target_q = abs(pt.params.weak_value.real)
    target_p = abs(pt.params.weak_value.imag)

    reason_q = reason_p = None
    try:
        margin_q = target_q - weak_uncertainty_q(cfg, pt, total_overlap).total
    except EtaOutOfDomain:
        margin_q = -math.inf
        reason_q = "EtaOutOfDomain"
    try:
        margin_p = target_p - weak_uncertainty_p(cfg, pt, total_overlap).total
    except EtaOutOfDomain:
        margin_p = -math.inf
        reason_p = "EtaOutOfDomain"

    return SignificanceVerdict(
        conventional_q=margin_conv >= 0.0,
        weak_q=margin_q >= 0.0,
        weak_p=margin_p >= 0.0,
        margin_conventional_q=margin_conv,
        margin_weak_q=margin_q,
        margin_weak_p=margin_p,
        reason_weak_q=reason_q,
        reason_weak_p=reason_p,
    )
