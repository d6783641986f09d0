"""Declarative run configuration: flat ``key = value`` text files.

The parameter space is flat, so the format is too: one assignment per
line, ``#`` starts a comment, arrays are comma lists. Complex numbers use
Python literal syntax (``0.005``, ``1j``, ``0.1+0.2j``). Every rejected
field reports the offending line and the violated constraint; the first
error wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import FiniteObservable, SystemState
from .errors import ParseError, ValidationError

_OBSERVABLE_KEYS = ("eigenvalues", "hermitian_2x2")
_POST_KEYS = ("post", "c", "c_scan")
_SCALAR_DEFAULTS = {
    "d": 1.0,
    "delta_q": 0.0,
    "delta_p": 0.0,
    "eta": 0.95,
    "n0": 1_000_000,
    "c_phase": 0.0,
    "channels": "both",
    "check_engine": False,
    "mc_trials": 0,
    "output": "scan.csv",
    "seed": 0,
}


@dataclass(frozen=True)
class CScan:
    """Log-spaced sweep of the amplification parameter magnitude."""

    minimum: float
    maximum: float
    points: int
    phase: float = 0.0

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.minimum])
        return np.geomspace(self.minimum, self.maximum, self.points)


@dataclass(frozen=True)
class GScan:
    """Log-spaced sweep of the coupling strength."""

    minimum: float
    maximum: float
    points: int

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.minimum])
        return np.geomspace(self.minimum, self.maximum, self.points)


@dataclass(frozen=True)
class RunConfig:
    """Fully validated inputs for one batch run."""

    observable: FiniteObservable
    pre: SystemState
    post: SystemState | None
    c: complex | None
    c_scan: CScan | None
    g: float | None
    g_scan: GScan | None
    d: float
    delta_q: float
    delta_p: float
    n0: int
    eta: float
    channels: frozenset[str]
    check_engine: bool
    mc_trials: int
    output: str
    seed: int

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)


@dataclass
class _Raw:
    value: str
    line: int


def _tokenize(text: str) -> dict[str, _Raw]:
    entries: dict[str, _Raw] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ParseError("missing key before '='", lineno)
        if not value:
            raise ParseError(f"missing value for '{key}'", lineno)
        if key in entries:
            raise ParseError(
                f"duplicate key '{key}' (first set on line {entries[key].line})",
                lineno,
            )
        entries[key] = _Raw(value, lineno)
    return entries


def _float(raw: _Raw, key: str) -> float:
    try:
        v = float(raw.value)
    except ValueError:
        raise ParseError(f"'{key}' is not a number: {raw.value!r}", raw.line)
    if not math.isfinite(v):
        raise ValidationError(f"'{key}' must be finite", raw.line)
    return v


def _int(raw: _Raw, key: str) -> int:
    try:
        return int(raw.value)
    except ValueError:
        raise ParseError(f"'{key}' is not an integer: {raw.value!r}", raw.line)


def _bool(raw: _Raw, key: str) -> bool:
    low = raw.value.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ParseError(f"'{key}' must be true or false: {raw.value!r}", raw.line)


def _complex_list(raw: _Raw, key: str) -> list[complex]:
    out = []
    for part in raw.value.split(","):
        token = part.strip().replace(" ", "")
        if not token:
            raise ParseError(f"empty entry in '{key}'", raw.line)
        try:
            out.append(complex(token))
        except ValueError:
            raise ParseError(f"'{key}' entry is not a number: {part.strip()!r}", raw.line)
    return out


def _float_list(raw: _Raw, key: str) -> list[float]:
    out = []
    for part in raw.value.split(","):
        try:
            out.append(float(part.strip()))
        except ValueError:
            raise ParseError(f"'{key}' entry is not a number: {part.strip()!r}", raw.line)
    return out


def _observable(entries: dict[str, _Raw]) -> FiniteObservable:
    given = [k for k in _OBSERVABLE_KEYS if k in entries]
    projector_keys = sorted(k for k in entries if k.startswith("projector_"))
    if "hermitian_2x2" in entries:
        if len(given) > 1 or projector_keys:
            raw = entries["hermitian_2x2"]
            raise ValidationError(
                "give exactly one of eigenvalues / hermitian_2x2", raw.line
            )
        raw = entries.pop("hermitian_2x2")
        vals = _float_list(raw, "hermitian_2x2")
        if len(vals) != 4:
            raise ValidationError(
                "'hermitian_2x2' needs 4 numbers: a11, re_a12, im_a12, a22",
                raw.line,
            )
        a11, re12, im12, a22 = vals
        m = np.array(
            [[a11, re12 + 1j * im12], [re12 - 1j * im12, a22]], dtype=complex
        )
        try:
            return FiniteObservable.from_hermitian_2x2(m)
        except ValueError as exc:
            raise ValidationError(f"'hermitian_2x2': {exc}", raw.line)
    if "eigenvalues" not in entries:
        raise ValidationError("missing observable: set eigenvalues or hermitian_2x2")
    raw = entries.pop("eigenvalues")
    eigenvalues = _float_list(raw, "eigenvalues")
    if not projector_keys:
        try:
            return FiniteObservable.diagonal(eigenvalues)
        except ValueError as exc:
            raise ValidationError(f"'eigenvalues': {exc}", raw.line)
    expected = [f"projector_{i + 1}" for i in range(len(eigenvalues))]
    if projector_keys != sorted(expected):
        raise ValidationError(
            f"projector keys must be exactly {', '.join(expected)}", raw.line
        )
    projectors = []
    for key in expected:
        praw = entries.pop(key)
        flat = _complex_list(praw, key)
        dim = math.isqrt(len(flat))
        if dim * dim != len(flat):
            raise ValidationError(
                f"'{key}' must hold a square matrix, row-major", praw.line
            )
        projectors.append(np.array(flat, dtype=complex).reshape(dim, dim))
    try:
        # Eigenvalues pair with projector_<k> positionally, so they must
        # already be ascending.
        return FiniteObservable(np.array(eigenvalues), tuple(projectors))
    except ValueError as exc:
        raise ValidationError(f"observable: {exc}", raw.line)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration file; raise on the first error."""
    entries = _tokenize(text)
    observable = _observable(entries)

    if "pre" not in entries:
        raise ValidationError("missing required key 'pre'")
    raw_pre = entries.pop("pre")
    amplitudes = _complex_list(raw_pre, "pre")
    if len(amplitudes) != observable.dim:
        raise ValidationError(
            f"'pre' has {len(amplitudes)} amplitudes, observable needs "
            f"{observable.dim}",
            raw_pre.line,
        )
    try:
        # Parser convenience: amplitudes are normalized here, so config
        # files may carry truncated decimals.
        pre = SystemState.normalized(amplitudes)
    except ValueError as exc:
        raise ValidationError(f"'pre': {exc}", raw_pre.line)

    post_given = [k for k in _POST_KEYS if k in entries]
    if len(post_given) != 1:
        line = entries[post_given[1]].line if len(post_given) > 1 else 0
        raise ValidationError(
            "set exactly one of post / c / c_scan", line
        )
    post = None
    c = None
    c_scan = None
    phase = _SCALAR_DEFAULTS["c_phase"]
    if "c_phase" in entries:
        raw = entries.pop("c_phase")
        if post_given[0] != "c_scan":
            raise ValidationError("'c_phase' only applies to c_scan", raw.line)
        phase = _float(raw, "c_phase")
    if "post" in entries:
        raw = entries.pop("post")
        values = _complex_list(raw, "post")
        if len(values) != observable.dim:
            raise ValidationError(
                f"'post' has {len(values)} amplitudes, observable needs "
                f"{observable.dim}",
                raw.line,
            )
        try:
            post = SystemState.normalized(values)
        except ValueError as exc:
            raise ValidationError(f"'post': {exc}", raw.line)
    elif "c" in entries:
        raw = entries.pop("c")
        values = _complex_list(raw, "c")
        if len(values) != 1:
            raise ValidationError("'c' must be a single complex number", raw.line)
        c = values[0]
        if c == 0:
            raise ValidationError("'c' must be nonzero", raw.line)
    else:
        raw = entries.pop("c_scan")
        vals = _float_list(raw, "c_scan")
        if len(vals) != 3:
            raise ValidationError("'c_scan' needs min, max, points", raw.line)
        lo, hi, pts = vals
        points = int(pts)
        if points != pts or points < 1:
            raise ValidationError("'c_scan' points must be a positive integer", raw.line)
        if not (0.0 < lo <= hi):
            raise ValidationError("'c_scan' needs 0 < min <= max", raw.line)
        if points == 1 and lo != hi:
            raise ValidationError("'c_scan' with one point needs min = max", raw.line)
        c_scan = CScan(lo, hi, points, phase)

    g = None
    g_scan = None
    if "g" in entries and "g_scan" in entries:
        raise ValidationError(
            "set exactly one of g / g_scan", entries["g_scan"].line
        )
    if "g" in entries:
        raw = entries.pop("g")
        g = _float(raw, "g")
        if g <= 0.0:
            raise ValidationError("'g' must be positive", raw.line)
    elif "g_scan" in entries:
        raw = entries.pop("g_scan")
        vals = _float_list(raw, "g_scan")
        if len(vals) != 3:
            raise ValidationError("'g_scan' needs min, max, points", raw.line)
        lo, hi, pts = vals
        points = int(pts)
        if points != pts or points < 1:
            raise ValidationError("'g_scan' points must be a positive integer", raw.line)
        if not (0.0 < lo <= hi):
            raise ValidationError("'g_scan' needs 0 < min <= max", raw.line)
        g_scan = GScan(lo, hi, points)
    else:
        raise ValidationError("missing required key 'g' (or 'g_scan')")
    if c_scan is not None and g_scan is not None:
        raise ValidationError("cannot scan c and g at the same time")

    d = _SCALAR_DEFAULTS["d"]
    if "d" in entries:
        raw = entries.pop("d")
        d = _float(raw, "d")
        if d <= 0.0:
            raise ValidationError("'d' must be positive", raw.line)

    deltas = {}
    for key in ("delta_q", "delta_p"):
        deltas[key] = _SCALAR_DEFAULTS[key]
        if key in entries:
            raw = entries.pop(key)
            deltas[key] = _float(raw, key)
            if deltas[key] < 0.0:
                raise ValidationError(f"'{key}' must be nonnegative", raw.line)

    n0 = _SCALAR_DEFAULTS["n0"]
    if "n0" in entries:
        raw = entries.pop("n0")
        n0 = _int(raw, "n0")
        if n0 < 1:
            raise ValidationError("'n0' must be at least 1", raw.line)

    eta = _SCALAR_DEFAULTS["eta"]
    if "eta" in entries:
        raw = entries.pop("eta")
        eta = _float(raw, "eta")
        if not (0.0 < eta < 1.0):
            raise ValidationError(
                "'eta' must lie strictly inside (0, 1)", raw.line
            )

    channels = frozenset(("q", "p"))
    if "channels" in entries:
        raw = entries.pop("channels")
        token = raw.value.replace(" ", "").lower()
        if token == "both":
            pass
        else:
            parts = frozenset(token.split(","))
            if not parts or not parts.issubset({"q", "p"}):
                raise ValidationError(
                    "'channels' must be q, p, 'q,p' or both", raw.line
                )
            channels = parts

    check_engine = _SCALAR_DEFAULTS["check_engine"]
    if "check_engine" in entries:
        check_engine = _bool(entries.pop("check_engine"), "check_engine")

    mc_trials = _SCALAR_DEFAULTS["mc_trials"]
    if "mc_trials" in entries:
        raw = entries.pop("mc_trials")
        mc_trials = _int(raw, "mc_trials")
        if mc_trials < 0:
            raise ValidationError("'mc_trials' must be nonnegative", raw.line)

    output = _SCALAR_DEFAULTS["output"]
    if "output" in entries:
        output = entries.pop("output").value

    seed = _SCALAR_DEFAULTS["seed"]
    if "seed" in entries:
        seed = _int(entries.pop("seed"), "seed")

    if entries:
        key = min(entries, key=lambda k: entries[k].line)
        raise ValidationError(f"unknown key '{key}'", entries[key].line)

    return RunConfig(
        observable=observable,
        pre=pre,
        post=post,
        c=c,
        c_scan=c_scan,
        g=g,
        g_scan=g_scan,
        d=d,
        delta_q=deltas["delta_q"],
        delta_p=deltas["delta_p"],
        n0=n0,
        eta=eta,
        channels=channels,
        check_engine=check_engine,
        mc_trials=mc_trials,
        output=output,
        seed=seed,
    )
