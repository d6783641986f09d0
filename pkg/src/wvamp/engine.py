"""Grid-based oracle for the meter dynamics, independent of the closed forms.

The postselected meter state is a coefficient-weighted sum of translated
copies of the initial wavefunction. Translations are applied in momentum
space (FFT, phase multiply, inverse FFT) so that shifts that do not land on
grid nodes are exact to spectral accuracy instead of being interpolated.

FFT conventions: ``numpy.fft`` with momentum grid ``p = 2*pi*fftfreq(n, dx)``
and the plane wave ``exp(i p x)`` carrying momentum +p, so a translation by
``t`` multiplies the momentum representation by ``exp(-i p t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import FiniteObservable, OverlapCoefficients, SystemState, overlap_coefficients
from .errors import (
    GridTooNarrow,
    NonOrthonormalBasis,
    ShiftOutOfGrid,
    VanishingState,
)

#: Edge amplitudes above this fraction of max(1, peak) invalidate windowing.
EDGE_TOL = 1e-12

_VANISH_TOL = 1e-14
_VAR_CLAMP = -1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform spatial grid with a power-of-two point count."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        n = int(self.n_points)
        if n < 256 or (n & (n - 1)) != 0:
            raise ValueError("n_points must be a power of two and at least 256")
        object.__setattr__(self, "n_points", n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def p(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / (self.n_points * self.dx)

    @classmethod
    def covering(
        cls, d: float, eigenvalues: Sequence[float], g: float
    ) -> "GridSpec":
        """Default grid for a width-d Gaussian under shifts ``g * eigenvalue``.

        Half-width 16 d + max|g lambda|: 8 d puts the Gaussian amplitude
        below 1e-13 past the shifted support, and another 8 d of padding
        keeps the periodic images of the spectral translation out of reach.
        Spacing at most d/32.
        """
        shift = max((abs(g * lam) for lam in eigenvalues), default=0.0)
        half = 16.0 * d + shift
        n = 256
        while 2.0 * half / n > d / 32.0:
            n *= 2
        return cls(-half, half, n)


@dataclass(frozen=True)
class MeterWaveFunction:
    """Complex wavefunction samples on a uniform grid.

    Instances need not be normalized (the squared norm of a postselected
    state is the survival-rate numerator). Amplitudes are expected on the
    normalized-meter scale: the windowing invariant requires the edge
    samples to stay below ``EDGE_TOL * max(1, peak)``.
    """

    grid: GridSpec
    samples: np.ndarray
    norm2: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vec = np.array(self.samples, dtype=complex)
        if vec.shape != (self.grid.n_points,):
            raise ValueError("sample count does not match the grid")
        if not np.isfinite(vec).all():
            raise ValueError("samples contain non-finite values")
        mags = np.abs(vec)
        edge = max(float(mags[0]), float(mags[-1]))
        if edge > EDGE_TOL * max(1.0, float(mags.max())):
            raise GridTooNarrow(
                f"edge amplitude {edge:.3e} violates the windowing threshold"
            )
        vec.setflags(write=False)
        object.__setattr__(self, "samples", vec)
        object.__setattr__(self, "norm2", float(self.grid.dx * np.sum(mags**2)))


class MeterStatistics(NamedTuple):
    norm2: float
    e_q: float
    e_p: float
    var_q: float
    var_p: float


def build_gaussian(spec: GridSpec, d: float) -> MeterWaveFunction:
    """Sample the normalized width-d Gaussian centered at 0 on the grid.

    Raises
    ------
    GridTooNarrow
        If the grid does not reach far enough for the edge samples to have
        decayed below the windowing threshold.
    """
    if not d > 0.0:
        raise ValueError("width d must be positive")
    x = spec.x
    samples = (1.0 / (math.pi * d * d)) ** 0.25 * np.exp(-(x * x) / (2.0 * d * d))
    return MeterWaveFunction(spec, samples.astype(complex))


def apply_transition(
    coeffs: OverlapCoefficients,
    eigenvalues: Sequence[float],
    g: float,
    psi: MeterWaveFunction,
) -> MeterWaveFunction:
    """Apply the postselected coupling map ``sum_n c_n psi(x - g lambda_n)``.

    Each translation happens in momentum space, so the output is exact to
    spectral accuracy for arbitrary (non-grid-aligned) shifts. The result
    is deliberately not normalized.

    Raises
    ------
    ShiftOutOfGrid
        If any shifted copy of the occupied support would leave the grid,
        where the periodic translation would wrap it around.
    """
    lams = np.asarray(eigenvalues, dtype=float)
    if lams.ndim != 1 or lams.size != coeffs.c.size:
        raise ValueError("need one eigenvalue per coefficient")
    mags = np.abs(psi.samples)
    peak = float(mags.max())
    if peak > 0.0:
        occupied = np.nonzero(mags > EDGE_TOL * max(1.0, peak))[0]
        if occupied.size:
            x = psi.grid.x
            lo, hi = x[occupied[0]], x[occupied[-1]]
            for lam in lams:
                t = g * lam
                if lo + t < psi.grid.x_min or hi + t > psi.grid.x_max:
                    raise ShiftOutOfGrid(
                        f"shift {t!r} pushes the support past the grid edge"
                    )
    spectrum = np.fft.fft(psi.samples)
    p = psi.grid.p
    phase = np.zeros_like(spectrum)
    for cn, lam in zip(coeffs.c, lams):
        phase += cn * np.exp(-1j * g * lam * p)
    out = np.fft.ifft(spectrum * phase)
    return MeterWaveFunction(psi.grid, out)


def meter_statistics(psi: MeterWaveFunction) -> MeterStatistics:
    """Squared norm plus position/momentum expectations and variances.

    Position moments come from trapezoid quadrature of ``x^k |psi|^2``
    (the edge terms vanish by the windowing invariant); momentum moments
    from the FFT power spectrum. Tiny negative variances from roundoff
    (above -1e-10) are clamped to zero.

    Raises
    ------
    VanishingState
        If the squared norm is at most 1e-14.
    """
    norm2 = psi.norm2
    if norm2 <= _VANISH_TOL:
        raise VanishingState(f"squared norm {norm2:.3e} vanishes")
    dx = psi.grid.dx
    x = psi.grid.x
    dens = np.abs(psi.samples) ** 2
    e_q = float(dx * np.sum(x * dens)) / norm2
    e_q2 = float(dx * np.sum(x * x * dens)) / norm2
    spectrum = np.fft.fft(psi.samples)
    # |psi_hat(p)|^2 dp / (2 pi) integrates to the squared norm (Parseval).
    pdens = (dx * dx / (2.0 * np.pi)) * np.abs(spectrum) ** 2
    p = psi.grid.p
    dp = psi.grid.dp
    e_p = float(dp * np.sum(p * pdens)) / norm2
    e_p2 = float(dp * np.sum(p * p * pdens)) / norm2
    var_q = e_q2 - e_q * e_q
    var_p = e_p2 - e_p * e_p
    for name, value in (("position", var_q), ("momentum", var_p)):
        if value < _VAR_CLAMP:
            raise ValueError(f"{name} variance {value!r} below roundoff window")
    return MeterStatistics(
        norm2, e_q, e_p, max(var_q, 0.0), max(var_p, 0.0)
    )


def basis_average_check(
    pre: SystemState,
    obs: FiniteObservable,
    basis: Sequence[SystemState],
    g: float,
    psi: MeterWaveFunction,
) -> tuple[float, float]:
    """Survival-rate-weighted average of the meter shifts over a basis.

    Summed over a complete orthonormal basis of postselections this equals
    the conventional result ``(g * E_A, 0)`` for any coupling; the return
    value lets tests check that identity numerically.

    Raises
    ------
    NonOrthonormalBasis
        If the supplied states do not form a complete orthonormal basis
        within 1e-10.
    """
    dim = pre.dim
    if len(basis) != dim:
        raise NonOrthonormalBasis(
            f"need {dim} basis states, got {len(basis)}"
        )
    rows = np.array([b.amplitudes for b in basis])
    gram = rows @ rows.conj().T
    if np.max(np.abs(gram - np.eye(dim))) > 1e-10:
        raise NonOrthonormalBasis("Gram matrix deviates from identity")
    base = meter_statistics(psi)
    lams = [float(v) for v in obs.eigenvalues]
    avg_q = 0.0
    avg_p = 0.0
    for post in basis:
        coeffs = overlap_coefficients(pre, post, obs)
        final = apply_transition(coeffs, lams, g, psi)
        rate = final.norm2 / base.norm2
        if final.norm2 <= _VANISH_TOL:
            # Orthogonal branch: its weighted contribution is O(norm2).
            continue
        stats = meter_statistics(final)
        avg_q += rate * (stats.e_q - base.e_q)
        avg_p += rate * (stats.e_p - base.e_p)
    return avg_q, avg_p
