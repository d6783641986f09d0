"""Amplification scans: per-point evaluation of the full uncertainty budget.

Each scan row is a pure function of the configuration, so identical
configurations produce byte-identical CSV files (Monte Carlo columns use
the configured seed). Rows that cannot be evaluated are emitted with NA
cells and a machine-readable reason instead of aborting the scan.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields

from .config import RunConfig
from .core import (
    SystemState,
    amplified_postselection,
    expectation_and_variance,
)
from .engine import GridSpec, apply_transition, build_gaussian, meter_statistics
from .errors import (
    CoverageBoundViolated,
    EtaOutOfDomain,
    WvampError,
)
from .gaussian import (
    GaussianMeter,
    build_model_point,
    coefficients_from_parameters,
    shift_p,
    shift_q,
    survival_rate,
    variance_p,
    variance_q,
)
from .montecarlo import coverage_test
from .uncertainty import (
    MeasurementConfig,
    conventional_uncertainty,
    weak_uncertainty_p,
    weak_uncertainty_q,
)

#: Relative disagreement between closed forms and the grid engine that
#: flags a row as suspect.
ENGINE_FLAG_TOL = 1e-6


@dataclass
class ScanRow:
    """One scan point; None fields render as NA with the stored reason."""

    scan_value: float
    re_weak_value: float | None = None
    im_weak_value: float | None = None
    amplification: float | None = None
    survival_rate: float | None = None
    shift_q: float | None = None
    shift_p: float | None = None
    var_q: float | None = None
    var_p: float | None = None
    systematic_q: float | None = None
    statistical_q: float | None = None
    nonlinear_q: float | None = None
    total_q: float | None = None
    ratio_q: float | None = None
    systematic_p: float | None = None
    statistical_p: float | None = None
    nonlinear_p: float | None = None
    total_p: float | None = None
    conventional_q_ok: bool | None = None
    weak_q_ok: bool | None = None
    weak_p_ok: bool | None = None
    margin_conventional_q: float | None = None
    margin_weak_q: float | None = None
    margin_weak_p: float | None = None
    engine_ok: bool | None = None
    engine_dev: float | None = None
    mc_coverage_q: float | None = None
    mc_ok_q: bool | None = None
    mc_coverage_p: float | None = None
    mc_ok_p: bool | None = None
    reason: str = ""


COLUMNS = tuple(f.name for f in fields(ScanRow))


def _format_cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows, path) -> None:
    """Write scan rows as RFC-4180 CSV with shortest round-trip floats.

    NA marks undefined cells; the trailing ``reason`` column explains
    row-level failures. Output is byte-stable for identical inputs.
    """
    lines = [",".join(COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_cell(getattr(row, name)) for name in COLUMNS))
    data = ("\r\n".join(lines) + "\r\n").encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(data)


def parse_csv(text: str) -> list[dict]:
    """Inverse of emit_csv, for round-trip checks and downstream tooling."""
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    out = []
    for line in lines[1:]:
        cells = line.split(",")
        record = {}
        for key, cell in zip(header, cells):
            if cell == "NA":
                record[key] = None
            elif cell in ("true", "false"):
                record[key] = cell == "true"
            elif key == "reason":
                record[key] = cell
            else:
                record[key] = float(cell)
        out.append(record)
    return out


def _scan_points(cfg: RunConfig):
    """Yield (scan_value, g, postselection builder input) per row."""
    if cfg.c_scan is not None:
        phase = cmath.exp(1j * cfg.c_scan.phase)
        for magnitude in cfg.c_scan.values():
            yield float(magnitude), cfg.g, magnitude * phase
    elif cfg.g_scan is not None:
        for g in cfg.g_scan.values():
            yield float(g), float(g), cfg.c
    else:
        yield float(cfg.g), cfg.g, cfg.c


def _resolve_post(cfg: RunConfig, c: complex | None) -> SystemState:
    if cfg.post is not None:
        return cfg.post
    return amplified_postselection(cfg.pre, cfg.observable, c)


def _engine_deviation(pt, total_overlap, psi_initial) -> float:
    """Worst relative disagreement of the five closed forms vs the grid."""
    lams = [
        pt.params.mean_eigenvalue - pt.params.half_gap,
        pt.params.mean_eigenvalue + pt.params.half_gap,
    ]
    coeffs = coefficients_from_parameters(pt.params, total_overlap)
    final = apply_transition(coeffs, lams, pt.g, psi_initial)
    stats = meter_statistics(final)
    pairs = (
        (stats.norm2, survival_rate(pt, total_overlap)),
        (stats.e_q, shift_q(pt)),
        (stats.e_p, shift_p(pt)),
        (stats.var_q, variance_q(pt)),
        (stats.var_p, variance_p(pt)),
    )
    dev = 0.0
    for numeric, closed in pairs:
        # Relative with an absolute floor: the compared quantities live on
        # the normalized-meter scale, and exact zeros (e.g. the momentum
        # shift of a real weak value) carry harmless 1e-16 grid noise.
        dev = max(dev, abs(numeric - closed) / max(abs(closed), 1e-6))
    return dev


def amplification_scan(cfg: RunConfig) -> list[ScanRow]:
    """Evaluate every scan point of the configuration.

    Per point: build the postselection (explicit state or amplification
    construction), reduce to the two-point model, and fill out shifts,
    variances, the three-term uncertainty budgets, ratio and significance
    flags. Optional cross-checks against the grid engine and the Monte
    Carlo sampler fill their columns when enabled.
    """
    if cfg.observable.eigenvalues.size != 2:
        raise ValueError("scans require a two-point spectrum")
    meter = GaussianMeter(cfg.d)
    e_pre, _ = expectation_and_variance(cfg.pre, cfg.observable)

    grid = None
    psi_initial = None
    if cfg.check_engine:
        g_max = cfg.g if cfg.g_scan is None else cfg.g_scan.maximum
        grid = GridSpec.covering(cfg.d, cfg.observable.eigenvalues, g_max)
        psi_initial = build_gaussian(grid, cfg.d)

    rows = []
    for scan_value, g, c in _scan_points(cfg):
        row = ScanRow(scan_value=scan_value)
        rows.append(row)
        mcfg = MeasurementConfig(g, cfg.delta_q, cfg.delta_p, cfg.n0, cfg.eta)
        try:
            post = _resolve_post(cfg, c)
            pt, total_overlap = build_model_point(
                cfg.pre, post, cfg.observable, g, meter
            )
            row.re_weak_value = pt.params.weak_value.real
            row.im_weak_value = pt.params.weak_value.imag
            row.amplification = pt.params.amplification
            row.survival_rate = survival_rate(pt, total_overlap)
            row.shift_q = shift_q(pt)
            row.shift_p = shift_p(pt)
            row.var_q = variance_q(pt)
            row.var_p = variance_p(pt)
            conv = conventional_uncertainty(mcfg, cfg.pre, cfg.observable, meter)
            row.margin_conventional_q = abs(e_pre) - conv.total
            row.conventional_q_ok = row.margin_conventional_q >= 0.0
        except WvampError as exc:
            row.reason = type(exc).__name__
            continue

        if "q" in cfg.channels:
            try:
                budget = weak_uncertainty_q(mcfg, pt, total_overlap)
                row.systematic_q = budget.systematic
                row.statistical_q = budget.statistical
                row.nonlinear_q = budget.nonlinear
                row.total_q = budget.total
                target = abs(pt.params.weak_value.real)
                row.margin_weak_q = target - budget.total
                row.weak_q_ok = row.margin_weak_q >= 0.0
                row.ratio_q = budget.total / target if target > 0.0 else None
            except EtaOutOfDomain:
                row.weak_q_ok = False
                row.margin_weak_q = -math.inf
                row.reason = "EtaOutOfDomain"
        if "p" in cfg.channels:
            try:
                budget = weak_uncertainty_p(mcfg, pt, total_overlap)
                row.systematic_p = budget.systematic
                row.statistical_p = budget.statistical
                row.nonlinear_p = budget.nonlinear
                row.total_p = budget.total
                target = abs(pt.params.weak_value.imag)
                row.margin_weak_p = target - budget.total
                row.weak_p_ok = row.margin_weak_p >= 0.0
            except EtaOutOfDomain:
                row.weak_p_ok = False
                row.margin_weak_p = -math.inf
                row.reason = "EtaOutOfDomain"

        if cfg.check_engine:
            try:
                dev = _engine_deviation(pt, total_overlap, psi_initial)
                row.engine_dev = dev
                row.engine_ok = dev <= ENGINE_FLAG_TOL
            except WvampError as exc:
                row.engine_ok = False
                row.reason = row.reason or type(exc).__name__

        if cfg.mc_trials > 0:
            for channel in sorted(cfg.channels):
                try:
                    report = coverage_test(
                        mcfg, pt, total_overlap, channel, cfg.mc_trials, cfg.seed
                    )
                    ok = True
                    coverage = report.empirical_coverage
                except CoverageBoundViolated:
                    ok = False
                    coverage = None
                except WvampError:
                    ok = None
                    coverage = None
                if channel == "q":
                    row.mc_coverage_q, row.mc_ok_q = coverage, ok
                else:
                    row.mc_coverage_p, row.mc_ok_p = coverage, ok
    return rows
