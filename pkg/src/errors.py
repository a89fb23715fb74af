"""
Exception hierarchy for the coherence toolkit.

Every error is a ValueError so callers can keep catching ValueError.
"""


class CoherenceError(ValueError):
    """Base class for all toolkit errors"""


class NotHermitianError(CoherenceError):
    """Matrix deviates from its adjoint by more than the tolerance"""

    def __init__(self, asymmetry: float):
        self.asymmetry = asymmetry
        super().__init__(f"Matrix is not Hermitian (max |H - H^dagger| = {asymmetry:.3e})")


class NegativeEigenvalueError(CoherenceError):
    """Matrix has an eigenvalue below the clamp threshold"""

    def __init__(self, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(f"Matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")


class DimMismatchError(CoherenceError):
    """Operands have incompatible dimensions"""


class BadRankError(CoherenceError):
    """Requested rank outside [1, d]"""


class InvalidStateError(CoherenceError):
    """Density-matrix invariant violated"""


class InvalidProbabilityVectorError(CoherenceError):
    """Probability-vector invariant violated"""


class InvalidChannelError(CoherenceError):
    """Kraus completeness violated or malformed Kraus list"""


class InvalidAlphaError(CoherenceError):
    """Entropic order outside (0, 2]"""


class NotIncoherentChannelError(CoherenceError):
    """A check that needs an incoherent operation was given another channel"""


class DegenerateDiagonalError(CoherenceError):
    """All diagonal entries of rho^alpha vanish"""


class DimTooLargeError(CoherenceError):
    """Brute-force oracle only supports d in {2, 3}"""


class BadWeightsError(CoherenceError):
    """Ensemble weights are negative or do not sum to one"""


class NumericalInconsistencyError(CoherenceError):
    """Two algebraically equal expressions disagree beyond tolerance"""


class ConfigError(CoherenceError):
    """Trial configuration is invalid"""


class StateFileError(CoherenceError):
    """State, channel or config file could not be parsed"""
