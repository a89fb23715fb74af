"""
State service - the incoherent set, maximally coherent states and
reproducible random-state generators
"""
import logging
from typing import Optional, Sequence

import numpy as np

from src.errors import BadRankError, DimMismatchError
from src.models import DensityMatrix, ProbabilityVector
from src.utils.hermitian import ComplexMatrix, dagger, hermitize

logger = logging.getLogger(__name__)


def dephase(rho: DensityMatrix) -> ProbabilityVector:
    """
    Project a state onto the incoherent set

    Args:
        rho: Valid density matrix

    Returns:
        Its diagonal in the reference basis, clamped at zero and renormalized
    """
    diagonal = np.clip(rho.diagonal, 0.0, None)
    return ProbabilityVector(diagonal / diagonal.sum())


def maximally_coherent(d: int, phases: Optional[Sequence[float]] = None) -> DensityMatrix:
    """
    rho_m = |Psi><Psi| with |Psi> = d^{-1/2} sum_j e^{i phi_j} |j>

    Args:
        d: Dimension (>= 1)
        phases: d real phases, zeros by default

    Returns:
        Rank-one projector with every entry of modulus 1/d
    """
    if d < 1:
        raise DimMismatchError(f"Dimension must be positive, got {d}")
    phases = np.zeros(d) if phases is None else np.asarray(phases, dtype=np.float64)
    if phases.shape != (d,):
        raise DimMismatchError(f"Expected {d} phases, got {phases.shape}")
    psi = np.exp(1j * phases) / np.sqrt(d)
    return DensityMatrix(hermitize(np.outer(psi, psi.conj())))


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> ComplexMatrix:
    """Matrix of independent standard complex Gaussians"""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def density_from_factor(factor: ComplexMatrix) -> DensityMatrix:
    """G G^dagger / Tr(G G^dagger)"""
    factor = np.asarray(factor, dtype=np.complex128)
    product = factor @ dagger(factor)
    return DensityMatrix(hermitize(product / np.real(np.trace(product))))


def random_density(d: int, rank: int, rng: np.random.Generator) -> DensityMatrix:
    """
    Ginibre-induced random state of the given rank

    Args:
        d: Dimension
        rank: Integer in [1, d]
        rng: Generator owned by the caller

    Returns:
        DensityMatrix with exactly d - rank vanishing eigenvalues
    """
    if not 1 <= rank <= d:
        raise BadRankError(f"rank must lie in [1, {d}], got {rank}")
    return density_from_factor(ginibre(d, rank, rng))


def random_pure(d: int, rng: np.random.Generator) -> DensityMatrix:
    """Normalized complex Gaussian vector as a projector"""
    psi = ginibre(d, 1, rng)[:, 0]
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(hermitize(np.outer(psi, psi.conj())))


def random_incoherent(d: int, rng: np.random.Generator) -> ProbabilityVector:
    """Flat Dirichlet draw on the simplex"""
    probs = rng.dirichlet(np.ones(d))
    return ProbabilityVector(probs / probs.sum())


def haar_unitary(d: int, rng: np.random.Generator) -> ComplexMatrix:
    """QR of a complex Ginibre matrix with the phases of diag(R) fixed"""
    q, r = np.linalg.qr(ginibre(d, d, rng))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases
