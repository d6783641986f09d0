"""Stochastic experiment oracle for the uncertainty machinery.

Simulates preparing n0 composite systems, Bernoulli postselection at the
survival rate, meter readings drawn from the exact postselected density on
the engine grid (inverse-CDF with a precomputed monotone table; rejection
sampling would struggle with the interference oscillations), worst-case
constant systematic bias, and empirical coverage checks of the
binomial-averaged Chebyshev bound.

Reproducibility contract: every trial owns a generator seeded by
(seed, trial index), so serial and parallel execution produce identical
draws bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .engine import GridSpec, apply_transition, build_gaussian
from .errors import AllRejected, CoverageBoundViolated, VanishingState
from .gaussian import (
    GaussianModelPoint,
    coefficients_from_parameters,
    shift_p,
    shift_q,
    survival_rate,
    variance_p,
    variance_q,
)
from .uncertainty import MeasurementConfig, kappa_inverse, pi_average

Channel = Literal["q", "p"]


@dataclass(frozen=True)
class ExperimentDraw:
    """One simulated run: survivor count, readings and the scaled estimator."""

    n_survived: int
    readings: np.ndarray
    estimator: float
    seed: int

    def __post_init__(self):
        readings = np.asarray(self.readings, dtype=float)
        if readings.shape != (self.n_survived,):
            raise ValueError("readings length must equal the survivor count")
        readings.setflags(write=False)
        object.__setattr__(self, "readings", readings)


@dataclass(frozen=True)
class CoverageReport:
    """Empirical coverage of the statistical-radius event across trials."""

    trials: int
    hits: int
    empirical_coverage: float
    bound: float
    kappa: float

    def __post_init__(self):
        if self.trials < 1 or not (0 <= self.hits <= self.trials):
            raise ValueError("hit count out of range")
        if abs(self.empirical_coverage - self.hits / self.trials) > 1e-12:
            raise ValueError("coverage does not match hits/trials")
        if not (0.0 <= self.bound <= 1.0):
            raise ValueError("bound must be a probability")


@dataclass(frozen=True)
class _SamplingTable:
    """Tabulated inverse CDF of one reading channel plus channel metadata."""

    positions: np.ndarray
    cdf: np.ndarray
    mean: float
    scale: float
    rate: float


def _channel_table(
    model: GaussianModelPoint, total_overlap: complex, channel: Channel
) -> _SamplingTable:
    if channel not in ("q", "p"):
        raise ValueError(f"channel must be 'q' or 'p', got {channel!r}")
    d = model.meter.d
    lams = (
        model.params.mean_eigenvalue - model.params.half_gap,
        model.params.mean_eigenvalue + model.params.half_gap,
    )
    spec = GridSpec.covering(d, lams, model.g)
    psi = build_gaussian(spec, d)
    coeffs = coefficients_from_parameters(model.params, total_overlap)
    final = apply_transition(coeffs, lams, model.g, psi)
    if channel == "q":
        axis = spec.x
        dens = np.abs(final.samples) ** 2
        mean = shift_q(model)
        scale = model.g
    else:
        # fftshift puts the fftfreq momentum grid in ascending order.
        axis = np.fft.fftshift(spec.p)
        pamp = np.fft.fftshift(np.fft.fft(final.samples))
        dens = (spec.dx**2 / (2.0 * np.pi)) * np.abs(pamp) ** 2
        mean = shift_p(model)
        scale = model.g / d**2
    step = axis[1] - axis[0]
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * step)))
    if cdf[-1] <= 0.0:
        raise VanishingState("postselected density carries no mass on the grid")
    cdf /= cdf[-1]
    rate = survival_rate(model, total_overlap)
    return _SamplingTable(axis, cdf, mean, scale, rate)


def _draw(
    table: _SamplingTable,
    cfg: MeasurementConfig,
    bias: float,
    seed: int,
    trial: int | None,
) -> ExperimentDraw:
    key = seed if trial is None else (seed, trial)
    rng = np.random.default_rng(key)
    n = int(rng.binomial(cfg.n0, table.rate))
    if n == 0:
        raise AllRejected(f"0 of {cfg.n0} prepared pairs survived")
    u = rng.random(n)
    readings = np.interp(u, table.cdf, table.positions) + bias
    # The initial meter is centered, so the raw shift estimate is just the
    # sample mean, rescaled to weak-value units.
    estimator = float(readings.mean()) / table.scale
    return ExperimentDraw(n, readings, estimator, seed)


def run_experiment(
    cfg: MeasurementConfig,
    model: GaussianModelPoint,
    total_overlap: complex,
    channel: Channel,
    bias: float,
    seed: int,
) -> ExperimentDraw:
    """Simulate one experiment of n0 preparations on the given channel.

    Survivor count is Binomial(n0, survival rate); each reading is an
    inverse-CDF draw from the postselected grid density plus the constant
    bias. The estimator is the mean reading divided by g (position) or
    g/d^2 (momentum).

    Raises
    ------
    AllRejected
        When zero preparations survive postselection.
    """
    if cfg.g <= 0.0 or model.g != cfg.g:
        raise ValueError("config and model coupling must agree and be positive")
    limit = cfg.delta_q if channel == "q" else cfg.delta_p
    if abs(bias) > limit + 1e-15:
        raise ValueError(f"|bias| = {abs(bias)!r} exceeds the systematic budget")
    table = _channel_table(model, total_overlap, channel)
    return _draw(table, cfg, bias, seed, None)


def coverage_test(
    cfg: MeasurementConfig,
    model: GaussianModelPoint,
    total_overlap: complex,
    channel: Channel,
    trials: int,
    seed: int,
    kappa: float | None = None,
) -> CoverageReport:
    """Empirical check of the binomial-averaged Chebyshev bound.

    Runs independent experiments at worst-case bias (+delta of the
    channel). A hit is the purely statistical event the bound concerns:
    the bias-corrected mean reading within kappa of the postselected
    expectation, with zero survivors counting as a miss. When kappa is not
    given it is the eta-radius from the uncertainty machinery; the
    reported bound is the binomial average at the kappa actually used.

    Raises
    ------
    CoverageBoundViolated
        If the empirical coverage undershoots the bound by more than three
        binomial standard errors.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if cfg.g <= 0.0 or model.g != cfg.g:
        raise ValueError("config and model coupling must agree and be positive")
    table = _channel_table(model, total_overlap, channel)
    variance = variance_q(model) if channel == "q" else variance_p(model)
    if kappa is None:
        kappa = kappa_inverse(cfg.eta, cfg.n0, table.rate, variance)
    bound = pi_average(kappa, cfg.n0, table.rate, variance)
    bias = cfg.delta_q if channel == "q" else cfg.delta_p
    hits = 0
    for t in range(trials):
        try:
            draw = _draw(table, cfg, bias, seed, t)
        except AllRejected:
            continue
        if abs((draw.estimator * table.scale - bias) - table.mean) <= kappa:
            hits += 1
    coverage = hits / trials
    slack = 3.0 * np.sqrt(bound * (1.0 - bound) / trials)
    report = CoverageReport(trials, hits, coverage, bound, kappa)
    if coverage < bound - slack:
        raise CoverageBoundViolated(
            f"coverage {coverage:.4f} below bound {bound:.4f} - {slack:.4f}"
        )
    return report
