"""
Domain models for the coherence toolkit
"""
import math
from dataclasses import dataclass, field
from enum import Enum as PyEnum
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from src.errors import (
    InvalidAlphaError,
    InvalidChannelError,
    InvalidProbabilityVectorError,
    InvalidStateError,
    DimMismatchError,
)
from src.utils.hermitian import (
    ComplexMatrix,
    HermitianSpectrum,
    as_complex_matrix,
    dagger,
    hermitize,
    max_asymmetry,
    spectral_decompose,
    spectral_power,
    HERMITIAN_TOL,
    ZERO_EIGENVALUE,
)

NEAR_ONE = 1e-6
TRACE_TOL = 1e-10
PROBABILITY_SUM_TOL = 1e-12
COMPLETENESS_TOL = 1e-9
INCOHERENCE_TOL = 1e-10


class CoherenceKind(PyEnum):
    """Coherence quantifier enumeration"""
    TSALLIS = "tsallis"
    RASTEGIN = "rastegin"
    RELATIVE_ENTROPY = "relative_entropy"
    L1 = "l1"
    SKEW_INFO = "skew_info"
    C2_DIRECT = "c2"

    @property
    def needs_alpha(self) -> bool:
        return self in (CoherenceKind.TSALLIS, CoherenceKind.RASTEGIN)

    @property
    def entropic(self) -> bool:
        """Measures whose alpha -> 1 limit is logarithmic (bits conversion applies)"""
        return self in (CoherenceKind.TSALLIS, CoherenceKind.RASTEGIN, CoherenceKind.RELATIVE_ENTROPY)


class RankPolicy(PyEnum):
    """Rank policy for random states in a suite"""
    FULL = "full"
    MIXED_RANKS = "mixed-ranks"


class Units(PyEnum):
    """Output units"""
    NATS = "nats"
    BITS = "bits"

    def convert(self, value: float) -> float:
        if self is Units.BITS:
            return value / math.log(2)
        return value


@dataclass(frozen=True)
class Alpha:
    """Entropic order in (0, 2]"""
    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or not 0.0 < value <= 2.0:
            raise InvalidAlphaError(f"alpha must lie in (0, 2], got {self.value}")
        object.__setattr__(self, "value", value)

    @property
    def near_one(self) -> bool:
        return abs(self.value - 1.0) < NEAR_ONE

    @property
    def sign(self) -> int:
        """sgn_1(alpha): -1 on (0, 1), +1 on (1, 2]"""
        return -1 if self.value < 1.0 else 1

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"<Alpha {self.value:g}{' ~1' if self.near_one else ''}>"


AlphaLike = Union[Alpha, float, int]


def as_alpha(alpha: AlphaLike) -> Alpha:
    return alpha if isinstance(alpha, Alpha) else Alpha(alpha)


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Incoherent (diagonal) state on the reference basis"""
    probs: npt.NDArray[np.float64]

    def __post_init__(self):
        probs = _frozen_array(self.probs, np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidProbabilityVectorError(f"Expected a non-empty vector, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise InvalidProbabilityVectorError("Probabilities must be finite")
        if np.any(probs < 0.0):
            raise InvalidProbabilityVectorError(f"Negative probability {probs.min():.3e}")
        if abs(probs.sum() - 1.0) > PROBABILITY_SUM_TOL:
            raise InvalidProbabilityVectorError(f"Probabilities sum to {probs.sum():.15f}")
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self) -> int:
        return len(self.probs)

    def embed(self) -> "DensityMatrix":
        """The diagonal density matrix sum_i p_i |i><i|"""
        return DensityMatrix(np.diag(self.probs.astype(np.complex128)))

    def to_dict(self):
        return {"probs": [float(p) for p in self.probs]}

    def __repr__(self):
        return f"<ProbabilityVector {np.round(self.probs, 6).tolist()}>"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace state"""
    matrix: ComplexMatrix

    def __post_init__(self):
        mat = as_complex_matrix(self.matrix)
        object.__setattr__(self, "matrix", mat)

        asymmetry = max_asymmetry(mat)
        if asymmetry > HERMITIAN_TOL:
            raise InvalidStateError(f"State is not Hermitian (asymmetry {asymmetry:.3e})")
        trace = float(np.real(np.trace(mat)))
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"State trace is {trace:.15f}, expected 1")
        smallest = float(self.spectrum.eigenvalues[0])
        if smallest < -ZERO_EIGENVALUE:
            raise InvalidStateError(f"State has negative eigenvalue {smallest:.3e}")

    @classmethod
    def from_operator(cls, operator: ComplexMatrix) -> "DensityMatrix":
        """
        Build a state from a PSD operator of positive trace

        The operator is hermitized, eigenvalues at round-off level are clamped to
        zero before normalization, and the trace is rescaled to 1.

        Args:
            operator: Unnormalized PSD operator (e.g. K rho K^dagger)

        Returns:
            Normalized DensityMatrix
        """
        spectrum = spectral_decompose(hermitize(np.asarray(operator, dtype=np.complex128)))
        eigenvalues = np.clip(spectrum.eigenvalues, 0.0, None)
        total = eigenvalues.sum()
        if total <= 0.0:
            raise InvalidStateError("Operator has no positive spectrum to normalize")
        vecs = spectrum.eigenvectors
        return cls(hermitize((vecs * (eigenvalues / total)) @ dagger(vecs)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> HermitianSpectrum:
        return spectral_decompose(self.matrix)

    def power(self, p: float, on_support: bool = False):
        """rho^p through the cached spectrum"""
        return spectral_power(self.spectrum, p, on_support=on_support)

    @property
    def diagonal(self) -> npt.NDArray[np.float64]:
        return np.real(np.diag(self.matrix))

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.spectrum.eigenvalues))

    def purity(self) -> float:
        return float(np.real(np.sum(np.abs(self.matrix) ** 2)))

    def is_diagonal(self, tol: float = 1e-8) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off)) <= tol) if self.dim > 1 else True

    def conjugate(self, unitary: ComplexMatrix) -> "DensityMatrix":
        """U rho U^dagger"""
        unitary = np.asarray(unitary)
        if unitary.shape != self.matrix.shape:
            raise DimMismatchError(f"Unitary shape {unitary.shape} vs state dim {self.dim}")
        return DensityMatrix.from_operator(unitary @ self.matrix @ dagger(unitary))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        """rho (x) other"""
        return DensityMatrix(np.kron(self.matrix, other.matrix))

    def to_dict(self):
        return {
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in self.matrix.ravel()],
        }

    def __repr__(self):
        return f"<DensityMatrix dim={self.dim} rank={self.rank}>"


def mixture(weights: Sequence[float], states: Sequence[DensityMatrix]) -> DensityMatrix:
    """sum_i q_i sigma_i"""
    if len(weights) != len(states) or not states:
        raise DimMismatchError("Ensemble weights and states must be non-empty and of equal length")
    dims = {state.dim for state in states}
    if len(dims) != 1:
        raise DimMismatchError(f"Ensemble states have mixed dimensions {sorted(dims)}")
    total = sum(float(q) * state.matrix for q, state in zip(weights, states))
    return DensityMatrix.from_operator(total)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive trace-preserving map as an ordered Kraus list"""
    kraus: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if len(self.kraus) == 0:
            raise InvalidChannelError("A channel needs at least one Kraus operator")
        ops = []
        for op in self.kraus:
            arr = np.array(op, dtype=np.complex128)
            if arr.ndim != 2:
                raise InvalidChannelError(f"Kraus operator must be a matrix, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise InvalidChannelError("Kraus operator has non-finite entries")
            arr.setflags(write=False)
            ops.append(arr)
        shapes = {op.shape for op in ops}
        if len(shapes) != 1:
            raise InvalidChannelError(f"Kraus operators have mixed shapes {sorted(shapes)}")
        object.__setattr__(self, "kraus", tuple(ops))

        deviation = self.completeness_deviation()
        if deviation > COMPLETENESS_TOL:
            raise InvalidChannelError(f"Kraus completeness violated by {deviation:.3e}")

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def n_kraus(self) -> int:
        return len(self.kraus)

    def completeness_deviation(self) -> float:
        """max |sum_n K_n^dagger K_n - I|"""
        total = sum(dagger(op) @ op for op in self.kraus)
        return float(np.max(np.abs(total - np.eye(self.d_in))))

    def is_incoherent(self, tol: float = INCOHERENCE_TOL) -> bool:
        """At most one entry of modulus > tol per column of every Kraus operator"""
        return all(bool(np.all(np.count_nonzero(np.abs(op) > tol, axis=0) <= 1)) for op in self.kraus)

    def to_dict(self):
        return {
            "d": self.d_in,
            "kraus": [[[float(z.real), float(z.imag)] for z in op.ravel()] for op in self.kraus],
        }

    def __iter__(self) -> Iterator[ComplexMatrix]:
        return iter(self.kraus)

    def __repr__(self):
        return f"<KrausChannel d={self.d_in} n_kraus={self.n_kraus}>"


@dataclass(frozen=True)
class SelectiveOutcome:
    """One retained measurement outcome (p_n, rho_n)"""
    prob: float
    post_state: DensityMatrix
    index: int

    def __repr__(self):
        return f"<SelectiveOutcome n={self.index} p={self.prob:.6g}>"


@dataclass(frozen=True)
class Selection:
    """Retained outcomes plus the probability mass of dropped ones"""
    outcomes: List[SelectiveOutcome]
    dropped_mass: float = 0.0

    def by_index(self) -> dict:
        return {outcome.index: outcome for outcome in self.outcomes}

    @property
    def total_mass(self) -> float:
        return sum(outcome.prob for outcome in self.outcomes) + self.dropped_mass

    def __iter__(self) -> Iterator[SelectiveOutcome]:
        return iter(self.outcomes)

    def __len__(self):
        return len(self.outcomes)


@dataclass(frozen=True)
class CoherenceResult:
    """Coherence value with its optimal incoherent state, when known"""
    value: float
    optimal_delta: Optional[ProbabilityVector] = field(default=None)

    def to_dict(self):
        return {
            "value": self.value,
            "optimal_delta": self.optimal_delta.to_dict()["probs"] if self.optimal_delta else None,
        }

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"<CoherenceResult {self.value:.10g}>"
