"""Exception types shared across the package."""


class WvampError(Exception):
    """Base class for all errors raised by this package."""


class OrthogonalSelections(WvampError):
    """Pre- and postselection are (numerically) orthogonal; the weak value
    and everything dividing by the overlap are undefined."""


class EigenstatePreselection(WvampError):
    """The preselection is an eigenstate of the observable, so the weak
    value cannot be amplified by choice of postselection."""


class NonPositiveVariance(WvampError):
    """A closed-form variance evaluated to a non-positive number; the
    parameter regime is beyond floating-point validity."""


class ZeroCoupling(WvampError):
    """Coupling g = 0 makes the ratio estimator (shift divided by g)
    undefined."""


class EtaOutOfDomain(WvampError):
    """The requested confidence exceeds the supremum of the postselected
    success probability, where the statistical error bound diverges."""


class GridTooNarrow(WvampError):
    """The grid does not contain the wavefunction down to the windowing
    threshold at its edges."""


class ShiftOutOfGrid(WvampError):
    """A coupling-induced translation would push the wavefunction support
    outside the safe region of the grid."""


class VanishingState(WvampError):
    """The final meter state has (numerically) zero norm; postselection at
    this coupling is effectively orthogonal."""


class NonOrthonormalBasis(WvampError):
    """The supplied collection of states is not a complete orthonormal
    basis within tolerance."""


class AllRejected(WvampError):
    """Zero out of the prepared samples survived postselection."""


class CoverageBoundViolated(WvampError):
    """Empirical coverage fell below the predicted bound by more than the
    allowed statistical slack."""


class ConfigError(WvampError):
    """Problem with a run-configuration file.

    Carries the 1-based line number the problem was found on (0 when the
    problem is not tied to a specific line, e.g. a missing key).
    """

    def __init__(self, message: str, line: int = 0):
        super().__init__(message if line == 0 else f"line {line}: {message}")
        self.line = line
        self.bare_message = message


class ParseError(ConfigError):
    """The configuration text is syntactically malformed."""


class ValidationError(ConfigError):
    """A configuration value violates a documented constraint."""
