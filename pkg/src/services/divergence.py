"""
Divergence service - Tsallis relative alpha entropy, its trace functional
f_alpha and the alpha -> 1 entropic limits (natural logarithm throughout)
"""
import logging
import math

import numpy as np
from scipy.special import xlogy

from src.errors import DimMismatchError, NumericalInconsistencyError
from src.models import AlphaLike, DensityMatrix, as_alpha
from src.utils.hermitian import ComplexMatrix, HermitianSpectrum, spectral_decompose, spectral_power, trace_product

logger = logging.getLogger(__name__)

SUPPORT_OVERLAP_TOL = 1e-10
IMAGINARY_TOL = 1e-10


def _check_dims(rho: DensityMatrix, sigma: DensityMatrix):
    if rho.dim != sigma.dim:
        raise DimMismatchError(f"States have dims {rho.dim} and {sigma.dim}")


def support_violated(rho_matrix: ComplexMatrix, sigma_spectrum: HermitianSpectrum) -> bool:
    """True iff a null eigenvector of sigma overlaps supp rho by more than SUPPORT_OVERLAP_TOL"""
    null = sigma_spectrum.eigenvalues == 0.0
    if not null.any():
        return False
    overlaps = sigma_spectrum.support_overlaps(rho_matrix)[null]
    return bool(np.any(overlaps > SUPPORT_OVERLAP_TOL))


def trace_functional(
    rho_spectrum: HermitianSpectrum,
    rho_matrix: ComplexMatrix,
    sigma_spectrum: HermitianSpectrum,
    alpha: float,
) -> float:
    """
    Tr A^alpha B^{1-alpha} for PSD operators given by their spectra

    Null directions of B orthogonal to supp A contribute 0 (0 * inf = 0);
    for alpha > 1 an overlapping null direction makes the value +inf.
    """
    if alpha > 1.0 and support_violated(rho_matrix, sigma_spectrum):
        return math.inf
    rho_power = spectral_power(rho_spectrum, alpha)
    sigma_power = spectral_power(sigma_spectrum, 1.0 - alpha, on_support=True)
    value = trace_product(rho_power, sigma_power)
    if abs(value.imag) > IMAGINARY_TOL * max(1.0, abs(value.real)):
        raise NumericalInconsistencyError(f"Tr rho^a sigma^(1-a) has imaginary part {value.imag:.3e}")
    return float(value.real)


def f_alpha(rho: DensityMatrix, sigma: DensityMatrix, alpha: AlphaLike) -> float:
    """
    f_alpha(rho, sigma) = Tr rho^alpha sigma^{1-alpha}

    Args:
        rho: First state
        sigma: Second state
        alpha: Order in (0, 2]

    Returns:
        The trace functional, math.inf on a support violation for alpha > 1
    """
    _check_dims(rho, sigma)
    alpha = as_alpha(alpha)
    return trace_functional(rho.spectrum, rho.matrix, sigma.spectrum, alpha.value)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -sum lambda ln lambda in nats, with 0 ln 0 = 0"""
    eigenvalues = np.clip(rho.spectrum.eigenvalues, 0.0, None)
    return float(-np.sum(xlogy(eigenvalues, eigenvalues)))


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    S(rho||sigma) = Tr rho ln rho - Tr rho ln sigma in nats

    Returns:
        The relative entropy, math.inf when supp rho is not inside supp sigma
    """
    _check_dims(rho, sigma)
    if support_violated(rho.matrix, sigma.spectrum):
        return math.inf
    sigma_eigenvalues = sigma.spectrum.eigenvalues
    overlaps = sigma.spectrum.support_overlaps(rho.matrix)
    on_support = sigma_eigenvalues > 0.0
    cross = float(np.sum(overlaps[on_support] * np.log(sigma_eigenvalues[on_support])))
    return -von_neumann_entropy(rho) - cross


def tsallis_divergence(rho: DensityMatrix, sigma: DensityMatrix, alpha: AlphaLike) -> float:
    """
    D_alpha(rho||sigma) = (f_alpha - 1) / (alpha - 1)

    Near alpha = 1 the analytic limit, the relative entropy, is returned.
    """
    alpha = as_alpha(alpha)
    if alpha.near_one:
        return relative_entropy(rho, sigma)
    value = f_alpha(rho, sigma, alpha)
    if math.isinf(value):
        return math.inf
    return (value - 1.0) / (alpha.value - 1.0)
