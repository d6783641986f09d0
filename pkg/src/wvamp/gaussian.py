"""Closed-form meter response for a two-point spectrum and a Gaussian meter.

Everything here is exact at every coupling strength g; no weak-coupling
expansion is used. The recurring ingredients are the overlap

    s = exp(-(g * half_gap / d)**2)

between the two displaced meter states and the survival-rate factor

    rate_factor = 1 + a * (1 - s),

which is bounded below by 1/2 because the amplification parameter a never
drops below -1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    FiniteObservable,
    OverlapCoefficients,
    SystemState,
    TwoPointParameters,
    expectation_and_variance,
    overlap_coefficients,
    two_point_parameters,
)
from .errors import NonPositiveVariance


@dataclass(frozen=True)
class GaussianMeter:
    """Gaussian meter wavefunction ``(1/pi d^2)^(1/4) exp(-x^2 / 2 d^2)``.

    Centered at x = 0 with width d > 0, so the initial position and
    momentum expectations vanish, the position variance is d^2/2, the
    momentum variance is 1/(2 d^2), and the symmetrized cross moment
    E_{QP+PQ} - 2 E_Q E_P vanishes as the position-shift formulas assume.
    """

    d: float

    def __post_init__(self):
        if not (math.isfinite(self.d) and self.d > 0.0):
            raise ValueError("meter width d must be positive and finite")

    @property
    def var_q(self) -> float:
        return 0.5 * self.d * self.d

    @property
    def var_p(self) -> float:
        return 0.5 / (self.d * self.d)


@dataclass(frozen=True)
class GaussianModelPoint:
    """One evaluation point of the closed-form model: (g, selections, meter).

    Caches the displaced-state overlap ``s`` and ``rate_factor``. The
    deficit 1 - s is kept separately via expm1 so that weak-coupling limits
    (g -> 0) retain full relative accuracy. For (g * half_gap / d)^2 > 700
    the overlap underflows to exactly 0; the formulas remain valid in that
    limit, so the underflow is accepted silently.
    """

    g: float
    params: TwoPointParameters
    meter: GaussianMeter
    displacement_overlap: float = field(init=False, repr=False, compare=False)
    displacement_deficit: float = field(init=False, repr=False, compare=False)
    rate_factor: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.g) and self.g >= 0.0):
            raise ValueError("coupling g must be finite and nonnegative")
        x = (self.g * self.params.half_gap / self.meter.d) ** 2
        s = math.exp(-x)
        deficit = -math.expm1(-x)
        factor = 1.0 + self.params.amplification * deficit
        # factor >= 1/2 analytically; anything near the bound signals a
        # construction bug upstream.
        assert factor > 0.25, f"rate factor {factor!r} out of analytic range"
        object.__setattr__(self, "displacement_overlap", s)
        object.__setattr__(self, "displacement_deficit", deficit)
        object.__setattr__(self, "rate_factor", factor)


def build_model_point(
    pre: SystemState,
    post: SystemState,
    obs: FiniteObservable,
    g: float,
    meter: GaussianMeter,
) -> tuple[GaussianModelPoint, complex]:
    """Reduce a full selection pair to a model point plus total overlap."""
    if obs.eigenvalues.size != 2:
        raise ValueError("closed forms require a two-point spectrum")
    coeffs = overlap_coefficients(pre, post, obs)
    params = two_point_parameters(
        coeffs, float(obs.eigenvalues[0]), float(obs.eigenvalues[1])
    )
    return GaussianModelPoint(g, params, meter), coeffs.total_overlap


def survival_rate(pt: GaussianModelPoint, total_overlap: complex) -> float:
    """Probability that a prepared pair passes postselection.

    ``r = |<post|pre>|^2 * rate_factor``, which tends to |<post|pre>|^2 as
    g -> 0 and always stays in [0, 1].
    """
    r = abs(total_overlap) ** 2 * pt.rate_factor
    if r < -1e-12 or r > 1.0 + 1e-9:
        raise ValueError(
            f"survival rate {r!r} outside [0, 1]; model point and overlap "
            "are inconsistent"
        )
    return min(max(r, 0.0), 1.0)


def shift_q(pt: GaussianModelPoint) -> float:
    """Position shift of the postselected meter, exact in g."""
    return (
        pt.g * pt.params.centered_weak_value.real / pt.rate_factor
        + pt.g * pt.params.mean_eigenvalue
    )


def shift_p(pt: GaussianModelPoint) -> float:
    """Momentum shift of the postselected meter, exact in g.

    Vanishes whenever the weak value is real; the exponential damping uses
    the same exponent as the displaced-state overlap.
    """
    d2 = pt.meter.d**2
    return (
        (pt.g / d2)
        * pt.params.centered_weak_value.imag
        * pt.displacement_overlap
        / pt.rate_factor
    )


def variance_q(pt: GaussianModelPoint) -> float:
    """Position variance of the postselected meter state."""
    g2 = pt.g * pt.g
    half2 = pt.params.half_gap**2
    var = (
        pt.meter.var_q
        + g2 * half2 * (1.0 + pt.params.amplification) / pt.rate_factor
        - g2 * (pt.params.centered_weak_value.real / pt.rate_factor) ** 2
    )
    if var <= 0.0:
        raise NonPositiveVariance(f"position variance evaluated to {var!r}")
    return var


def variance_p(pt: GaussianModelPoint) -> float:
    """Momentum variance of the postselected meter state."""
    d2 = pt.meter.d**2
    scale2 = (pt.g / d2) ** 2
    half2 = pt.params.half_gap**2
    s = pt.displacement_overlap
    var = pt.meter.var_p + scale2 * (
        pt.params.amplification * half2 * s / pt.rate_factor
        - (pt.params.centered_weak_value.imag * s / pt.rate_factor) ** 2
    )
    if var <= 0.0:
        raise NonPositiveVariance(f"momentum variance evaluated to {var!r}")
    return var


def conventional_stats(
    pre: SystemState, obs: FiniteObservable, g: float, meter: GaussianMeter
) -> tuple[float, float]:
    """Position shift and variance without postselection.

    Returns ``(g * E_A, d^2/2 + g^2 * Var_A)`` for any finite spectrum.
    The momentum channel has no conventional signal: its shift is 0 and
    its variance stays at the initial 1/(2 d^2).
    """
    e, var = expectation_and_variance(pre, obs)
    return g * e, meter.var_q + g * g * var


def coefficients_from_parameters(
    params: TwoPointParameters, total_overlap: complex
) -> OverlapCoefficients:
    """Invert the two-point reduction back to overlap coefficients.

    ``c2 - c1 = (A_r / half_gap) (c1 + c2)`` fixes both coefficients once
    the total overlap is chosen; useful for driving the grid oracle from a
    synthetic weak value.
    """
    total = complex(total_overlap)
    ratio = params.centered_weak_value / params.half_gap
    c1 = 0.5 * total * (1.0 - ratio)
    c2 = 0.5 * total * (1.0 + ratio)
    return OverlapCoefficients(np.array([c1, c2]), c1 + c2)
