"""System-side linear algebra for pre/postselected weak measurements.

States are vectors on a finite-dimensional Hilbert space and observables are
supplied by their spectral decomposition. Every closed-form two-point
quantity downstream is a function of the per-eigenspace overlaps
``c_n = <post| E_n |pre>``, which this module computes and reduces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EigenstatePreselection, OrthogonalSelections

#: Overlaps below this magnitude make the weak value numerically
#: meaningless: the shift formulas divide by the overlap, and below 1e-10
#: the result exceeds 1e10 times the spectral radius.
ORTHO_EPS = 1e-10

_NORM_TOL = 1e-12
_PROJ_TOL = 1e-12
_EIG_GAP = 1e-9
_EIGENSTATE_VAR = 1e-14


def _complex_vector(values, name: str) -> np.ndarray:
    vec = np.array(values, dtype=complex)
    if vec.ndim != 1:
        raise ValueError(f"{name} must be a 1-d sequence")
    if not np.isfinite(vec).all():
        raise ValueError(f"{name} contains non-finite entries")
    return vec


@dataclass(frozen=True)
class SystemState:
    """Normalized pure state of the measured system.

    Attributes
    ----------
    amplitudes : ndarray of complex
        Length D >= 2, squared norm 1 within 1e-12. Stored read-only.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _complex_vector(self.amplitudes, "amplitudes")
        if vec.size < 2:
            raise ValueError("system dimension must be at least 2")
        norm2 = float(np.vdot(vec, vec).real)
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(
                f"squared norm {norm2!r} deviates from 1 by more than {_NORM_TOL}"
            )
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, values) -> "SystemState":
        """Build a state from unnormalized amplitudes."""
        vec = _complex_vector(values, "amplitudes")
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(vec / norm)


@dataclass(frozen=True)
class FiniteObservable:
    """Observable with a finite point spectrum.

    Given as strictly increasing distinct eigenvalues with one Hermitian
    projector per eigenvalue. The projectors must be idempotent, mutually
    orthogonal and resolve the identity (all within 1e-12 entrywise). The
    matrix itself is reconstructed as ``sum(eigenvalue * projector)``.

    Eigenvalues closer than ``1e-9 * max|eigenvalue|`` are rejected:
    degenerate values must be merged into a single higher-rank projector.
    """

    eigenvalues: np.ndarray
    projectors: tuple[np.ndarray, ...]
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        eig = np.array(self.eigenvalues, dtype=float)
        if eig.ndim != 1 or eig.size < 1:
            raise ValueError("eigenvalues must be a non-empty 1-d sequence")
        if not np.isfinite(eig).all():
            raise ValueError("eigenvalues contain non-finite entries")
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        if len(projs) != eig.size:
            raise ValueError("need exactly one projector per eigenvalue")
        dim = projs[0].shape[0]
        if dim < 2:
            raise ValueError("system dimension must be at least 2")
        gap = _EIG_GAP * float(np.max(np.abs(eig)))
        if eig.size > 1 and not np.all(np.diff(eig) > gap):
            raise ValueError(
                "eigenvalues must be strictly increasing and separated by "
                f"more than {gap!r}"
            )
        total = np.zeros((dim, dim), dtype=complex)
        for k, p in enumerate(projs):
            if p.shape != (dim, dim):
                raise ValueError(f"projector {k} is not {dim}x{dim}")
            if not np.isfinite(p).all():
                raise ValueError(f"projector {k} contains non-finite entries")
            if np.max(np.abs(p - p.conj().T)) > _PROJ_TOL:
                raise ValueError(f"projector {k} is not Hermitian within {_PROJ_TOL}")
            if np.max(np.abs(p @ p - p)) > _PROJ_TOL:
                raise ValueError(f"projector {k} is not idempotent within {_PROJ_TOL}")
            total += p
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.max(np.abs(projs[i] @ projs[j])) > _PROJ_TOL:
                    raise ValueError(
                        f"projectors {i} and {j} are not orthogonal within {_PROJ_TOL}"
                    )
        if np.max(np.abs(total - np.eye(dim))) > _PROJ_TOL:
            raise ValueError(f"projectors do not resolve the identity within {_PROJ_TOL}")
        matrix = np.zeros((dim, dim), dtype=complex)
        for lam, p in zip(eig, projs):
            matrix += lam * p
        eig.setflags(write=False)
        matrix.setflags(write=False)
        for p in projs:
            p.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "_matrix", matrix)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """The observable as a Hermitian matrix."""
        return self._matrix

    @classmethod
    def diagonal(cls, values) -> "FiniteObservable":
        """Observable diagonal in the computational basis.

        ``values[k]`` is the eigenvalue attached to basis axis k; repeated
        values are merged into one higher-rank projector.
        """
        vals = np.array(values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("need at least two diagonal entries")
        distinct = sorted(set(float(v) for v in vals))
        projectors = []
        for lam in distinct:
            p = np.diag((vals == lam).astype(complex))
            projectors.append(p)
        return cls(np.array(distinct), tuple(projectors))

    @classmethod
    def from_hermitian_2x2(cls, matrix) -> "FiniteObservable":
        """Spectral decomposition of a 2x2 Hermitian matrix in closed form."""
        h = np.array(matrix, dtype=complex)
        if h.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        if np.max(np.abs(h - h.conj().T)) > _PROJ_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        t = 0.5 * float((h[0, 0] + h[1, 1]).real)
        z = 0.5 * float((h[0, 0] - h[1, 1]).real)
        w = complex(h[0, 1])
        rho = math.hypot(z, abs(w))
        lo, hi = t - rho, t + rho
        if 2.0 * rho <= _EIG_GAP * max(abs(lo), abs(hi)):
            raise ValueError("matrix is degenerate; spectral gap too small")
        upper = np.array([[rho + z, w], [np.conj(w), rho - z]], dtype=complex) / (
            2.0 * rho
        )
        lower = np.eye(2, dtype=complex) - upper
        return cls(np.array([lo, hi]), (lower, upper))


@dataclass(frozen=True)
class OverlapCoefficients:
    """Per-eigenspace overlaps ``c_n = <post| E_n |pre>`` and their sum.

    The sum equals the total overlap <post|pre>, the sufficient statistic
    for the survival rate and all two-point closed forms.
    """

    c: np.ndarray
    total_overlap: complex

    def __post_init__(self):
        vec = _complex_vector(self.c, "c")
        total = complex(self.total_overlap)
        if abs(vec.sum() - total) > 1e-12:
            raise ValueError("total_overlap does not equal the coefficient sum")
        if abs(total) > 1.0 + 1e-12:
            raise ValueError("total overlap magnitude exceeds 1")
        vec.setflags(write=False)
        object.__setattr__(self, "c", vec)
        object.__setattr__(self, "total_overlap", total)


@dataclass(frozen=True)
class TwoPointParameters:
    """Reduced description of a two-eigenvalue selection pair.

    Attributes
    ----------
    mean_eigenvalue : float
        Midpoint of the two eigenvalues.
    half_gap : float
        Half the spectral gap, > 0.
    weak_value : complex
        The (possibly amplified) weak value of the observable.
    centered_weak_value : complex
        ``weak_value - mean_eigenvalue``.
    amplification : float
        ``(|centered_weak_value|^2 / half_gap^2 - 1) / 2``; equals 0 for an
        eigenstate postselection and -1/2 for identical selections, and is
        bounded below by -1/2.
    """

    mean_eigenvalue: float
    half_gap: float
    weak_value: complex
    centered_weak_value: complex
    amplification: float

    def __post_init__(self):
        for name in ("mean_eigenvalue", "half_gap", "amplification"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not np.isfinite([self.weak_value, self.centered_weak_value]).all():
            raise ValueError("weak values must be finite")
        if self.half_gap <= 0.0:
            raise ValueError("half_gap must be positive")
        if abs(self.centered_weak_value - (self.weak_value - self.mean_eigenvalue)) > (
            1e-12 * (1.0 + abs(self.weak_value))
        ):
            raise ValueError("centered_weak_value inconsistent with weak_value")
        # At huge |centered_weak_value| an absolute 1e-12 match is below
        # double precision, so the tolerance scales with the magnitude.
        alt = 0.5 * ((abs(self.centered_weak_value) / self.half_gap) ** 2 - 1.0)
        if abs(self.amplification - alt) > 1e-12 * (1.0 + abs(alt)):
            raise ValueError("amplification inconsistent with centered weak value")
        if self.amplification < -0.5 - 1e-12:
            raise ValueError("amplification below its lower bound -1/2")

    @classmethod
    def from_weak_value(
        cls, lambda1: float, lambda2: float, weak_value: complex
    ) -> "TwoPointParameters":
        """Build parameters directly from a target weak value."""
        if not lambda2 > lambda1:
            raise ValueError("eigenvalues must satisfy lambda1 < lambda2")
        mean = 0.5 * (lambda1 + lambda2)
        half = 0.5 * (lambda2 - lambda1)
        centered = complex(weak_value) - mean
        amp = 0.5 * ((abs(centered) / half) ** 2 - 1.0)
        return cls(mean, half, complex(weak_value), centered, amp)


def expectation_and_variance(
    state: SystemState, obs: FiniteObservable
) -> tuple[float, float]:
    """Expectation value and variance of the observable on a state.

    For a two-point spectrum the result satisfies
    ``var = half_gap**2 - (e - mean_eigenvalue)**2``.
    """
    psi = state.amplitudes
    weights = np.array(
        [float(np.vdot(psi, p @ psi).real) for p in obs.projectors]
    )
    e = float(np.dot(weights, obs.eigenvalues))
    e2 = float(np.dot(weights, obs.eigenvalues**2))
    return e, max(e2 - e * e, 0.0)


def weak_value(
    pre: SystemState, post: SystemState, obs: FiniteObservable
) -> complex:
    """Weak value <post|A|pre> / <post|pre> of the observable.

    Raises
    ------
    OrthogonalSelections
        If |<post|pre>| <= ORTHO_EPS, where the quotient loses meaning.
    """
    overlap = complex(np.vdot(post.amplitudes, pre.amplitudes))
    if abs(overlap) <= ORTHO_EPS:
        raise OrthogonalSelections(
            f"|<post|pre>| = {abs(overlap):.3e} <= {ORTHO_EPS}"
        )
    return complex(np.vdot(post.amplitudes, obs.matrix @ pre.amplitudes)) / overlap


def amplified_postselection(
    pre: SystemState, obs: FiniteObservable, c: complex
) -> SystemState:
    """Postselection realizing the weak value ``E_A + sqrt(Var_A)/conj(c)``.

    Decomposes ``A|pre> = E_A|pre> + sqrt(Var_A)|residual>`` with
    |residual> normalized and orthogonal to |pre>, then returns the
    normalization of ``c|pre> + |residual>``. Shrinking |c| amplifies the
    weak value without bound; the phase of c rotates it in the complex
    plane. The global phase of |residual> is fixed by taking it
    proportional to ``(A - E_A)|pre>`` itself.

    Raises
    ------
    EigenstatePreselection
        If Var_A(pre) vanishes, in which case no amplification is possible.
    """
    c = complex(c)
    if c == 0:
        raise ValueError("amplification parameter c must be nonzero")
    e, var = expectation_and_variance(pre, obs)
    if var <= _EIGENSTATE_VAR:
        raise EigenstatePreselection(
            f"Var_A(pre) = {var:.3e} vanishes; pre is an eigenstate"
        )
    residual = (obs.matrix @ pre.amplitudes - e * pre.amplitudes) / math.sqrt(var)
    vec = c * pre.amplitudes + residual
    return SystemState(vec / np.linalg.norm(vec))


def overlap_coefficients(
    pre: SystemState, post: SystemState, obs: FiniteObservable
) -> OverlapCoefficients:
    """Overlaps ``c_n = <post| E_n |pre>`` for every eigenspace.

    Orthogonal selection pairs are allowed here; operations that divide by
    the total overlap guard downstream.
    """
    if pre.dim != obs.dim or post.dim != obs.dim:
        raise ValueError("state and observable dimensions do not match")
    psi = pre.amplitudes
    phi = post.amplitudes
    c = np.array([complex(np.vdot(phi, p @ psi)) for p in obs.projectors])
    return OverlapCoefficients(c, complex(c.sum()))


def two_point_parameters(
    coeffs: OverlapCoefficients, lambda1: float, lambda2: float
) -> TwoPointParameters:
    """Reduce two overlap coefficients to the two-point model parameters.

    Uses the explicit expressions in terms of c_1, c_2:

    ``Re A_r = half_gap * (|c2|^2 - |c1|^2) / w``
    ``Im A_r = half_gap * 2 Im[conj(c1) c2] / w``
    ``a      = -2 Re[conj(c1) c2] / w``

    with ``w = |c1|^2 + |c2|^2 + 2 Re[conj(c1) c2] = |c1 + c2|^2``.
    """
    if coeffs.c.size != 2:
        raise ValueError("two-point reduction needs exactly two coefficients")
    if not lambda2 > lambda1:
        raise ValueError("eigenvalues must satisfy lambda1 < lambda2")
    c1, c2 = complex(coeffs.c[0]), complex(coeffs.c[1])
    total = c1 + c2
    if abs(total) <= ORTHO_EPS:
        raise OrthogonalSelections(
            f"|c1 + c2| = {abs(total):.3e} <= {ORTHO_EPS}"
        )
    # |c1 + c2|^2 equals |c1|^2 + |c2|^2 + 2 Re[conj(c1) c2] but, unlike
    # that quadratic form, it keeps full relative accuracy when the
    # coefficients nearly cancel (deep amplification).
    weight = abs(total) ** 2
    cross = np.conj(c1) * c2
    mean = 0.5 * (lambda1 + lambda2)
    half = 0.5 * (lambda2 - lambda1)
    centered = complex(
        half * (abs(c2) ** 2 - abs(c1) ** 2) / weight,
        half * 2.0 * cross.imag / weight,
    )
    amp = 0.5 * ((abs(centered) / half) ** 2 - 1.0)
    # Cross-check against the direct formula -2 Re[conj(c1) c2] / weight.
    # Its roundoff grows with the cancellation ratio, so the tolerance
    # carries that conditioning factor.
    direct = -2.0 * cross.real / weight
    cond = (abs(c1) ** 2 + abs(c2) ** 2) / weight
    tol = (1e-12 + 32.0 * np.finfo(float).eps * cond) * (1.0 + abs(amp))
    if abs(amp - direct) > tol:
        raise ValueError(
            "amplification routes disagree beyond conditioning: "
            f"{amp!r} vs {direct!r}"
        )
    return TwoPointParameters(mean, half, centered + mean, centered, amp)
