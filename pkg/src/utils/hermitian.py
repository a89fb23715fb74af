"""
Hermitian core: dense complex matrices, spectral decomposition and
fractional matrix powers.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
import numpy.typing as npt
from scipy import linalg as la

from src.errors import (
    CoherenceError,
    DimMismatchError,
    NegativeEigenvalueError,
    NotHermitianError,
)

ComplexMatrix = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
ZERO_EIGENVALUE = 1e-12


class Divergence(Enum):
    """Out-of-band result of a negative power of a singular matrix"""
    DIVERGENT = "divergent"

    def __repr__(self):
        return "Divergent"


DIVERGENT = Divergence.DIVERGENT

MatrixOrDivergent = Union[ComplexMatrix, Divergence]


def as_complex_matrix(data) -> ComplexMatrix:
    """
    Coerce input into a square complex128 matrix with finite entries

    Args:
        data: Nested sequence or array

    Returns:
        Read-only square complex matrix
    """
    mat = np.array(data, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise DimMismatchError(f"Expected a non-empty square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise CoherenceError("Matrix has non-finite entries")
    mat.setflags(write=False)
    return mat


def dagger(mat: ComplexMatrix) -> ComplexMatrix:
    return mat.conj().T


def hermitize(mat: ComplexMatrix) -> ComplexMatrix:
    return 0.5 * (mat + dagger(mat))


def max_asymmetry(mat: ComplexMatrix) -> float:
    return float(np.max(np.abs(mat - dagger(mat)))) if mat.size else 0.0


@dataclass(frozen=True, eq=False)
class HermitianSpectrum:
    """Ascending eigenvalues and the orthonormal eigenbasis (columns)"""
    eigenvalues: npt.NDArray[np.float64]
    eigenvectors: ComplexMatrix

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> ComplexMatrix:
        """V diag(lambda) V^dagger"""
        vecs = self.eigenvectors
        return (vecs * self.eigenvalues) @ dagger(vecs)

    def support_overlaps(self, mat: ComplexMatrix) -> npt.NDArray[np.float64]:
        """<v_k| mat |v_k> for every eigenvector v_k"""
        vecs = self.eigenvectors
        return np.real(np.einsum("ik,ij,jk->k", vecs.conj(), mat, vecs))

    def __repr__(self):
        return f"<HermitianSpectrum dim={self.dim} eigenvalues={np.round(self.eigenvalues, 6)}>"


def spectral_decompose(mat: ComplexMatrix) -> HermitianSpectrum:
    """
    Eigen-decompose a Hermitian matrix

    Eigenvalues with |lambda| < ZERO_EIGENVALUE are clamped to exactly 0.

    Args:
        mat: Hermitian matrix (within HERMITIAN_TOL)

    Returns:
        HermitianSpectrum with ascending eigenvalues

    Raises:
        NotHermitianError: if max |H - H^dagger| exceeds HERMITIAN_TOL
    """
    mat = np.asarray(mat, dtype=np.complex128)
    asymmetry = max_asymmetry(mat)
    if asymmetry > HERMITIAN_TOL:
        raise NotHermitianError(asymmetry)

    eigenvalues, eigenvectors = la.eigh(hermitize(mat))
    eigenvalues = np.where(np.abs(eigenvalues) < ZERO_EIGENVALUE, 0.0, eigenvalues)
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    return HermitianSpectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def spectral_power(spectrum: HermitianSpectrum, p: float, on_support: bool = False) -> MatrixOrDivergent:
    """
    Fractional power V diag(lambda^p) V^dagger of a PSD spectrum

    Conventions: 0^p = 0 for p > 0 and 0^0 = 0 (rank projector). For p < 0 a
    zero eigenvalue gives DIVERGENT unless on_support is set, in which case
    the power is taken on the support only (pseudo-inverse style).

    Raises:
        NegativeEigenvalueError: if some eigenvalue is below -ZERO_EIGENVALUE
    """
    eigenvalues = spectrum.eigenvalues
    if eigenvalues.size and eigenvalues[0] < 0.0:
        raise NegativeEigenvalueError(float(eigenvalues[0]))

    zero = eigenvalues == 0.0
    if p < 0 and zero.any() and not on_support:
        return DIVERGENT

    powered = np.zeros_like(eigenvalues)
    positive = ~zero
    powered[positive] = eigenvalues[positive] ** p
    vecs = spectrum.eigenvectors
    return (vecs * powered) @ dagger(vecs)


def matrix_power(mat: ComplexMatrix, p: float) -> MatrixOrDivergent:
    """
    Fractional power of a Hermitian PSD matrix

    Args:
        mat: Hermitian PSD matrix
        p: Real exponent

    Returns:
        The matrix power, or DIVERGENT for p < 0 on a singular matrix
    """
    return spectral_power(spectral_decompose(mat), p)


def trace_product(a: ComplexMatrix, b: ComplexMatrix) -> complex:
    """Tr AB without forming the product"""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimMismatchError(f"Cannot multiply shapes {a.shape} and {b.shape}")
    return complex(np.einsum("ij,ji->", a, b))


def is_unitary(mat: ComplexMatrix, tol: float = UNITARY_TOL) -> bool:
    mat = np.asarray(mat)
    identity = np.eye(mat.shape[1])
    return bool(np.max(np.abs(dagger(mat) @ mat - identity)) <= tol)
