"""
Coherence service - the Tsallis coherence family C_alpha, the Rastegin
quantifier, closed-form optimal incoherent states, the simplex grid oracle
and the special cases alpha = 1/2, 1, 2
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from src.errors import CoherenceError, DegenerateDiagonalError, DimTooLargeError, NumericalInconsistencyError
from src.models import AlphaLike, CoherenceKind, CoherenceResult, DensityMatrix, ProbabilityVector, as_alpha
from src.services.divergence import von_neumann_entropy
from src.services.states import dephase

logger = logging.getLogger(__name__)

DIAGONAL_FLOOR = 1e-14
SKEW_FORMS_TOL = 1e-10
ORACLE_MAX_DIM = 3
ORACLE_RESOLUTION = {2: 1e-4, 3: 2e-3}


def power_diagonal(rho: DensityMatrix, alpha: AlphaLike) -> npt.NDArray[np.float64]:
    """a_j = <j|rho^alpha|j>, clamped at zero"""
    alpha = as_alpha(alpha)
    return np.clip(np.real(np.diag(rho.power(alpha.value))), 0.0, None)


def _root_sum(rho: DensityMatrix, alpha: float) -> float:
    """sum_j a_j^{1/alpha}"""
    return float(np.sum(power_diagonal(rho, alpha) ** (1.0 / alpha)))


def relative_entropy_coherence(rho: DensityMatrix) -> CoherenceResult:
    """
    S(dephase(rho)) - S(rho) in nats, the alpha -> 1 limit of both families

    Args:
        rho: Valid state

    Returns:
        CoherenceResult with the dephased state as optimal_delta
    """
    delta = dephase(rho)
    value = von_neumann_entropy(delta.embed()) - von_neumann_entropy(rho)
    return CoherenceResult(value=value, optimal_delta=delta)


def coherence_alpha(rho: DensityMatrix, alpha: AlphaLike) -> CoherenceResult:
    """
    C_alpha(rho) = (sum_j <j|rho^alpha|j>^{1/alpha} - 1) / (alpha - 1)

    Evaluated from the closed form, never by minimization. Near alpha = 1 the
    relative-entropy coherence is returned.

    Args:
        rho: Valid state
        alpha: Order in (0, 2]

    Returns:
        CoherenceResult carrying the closed-form minimizer
    """
    alpha = as_alpha(alpha)
    if alpha.near_one:
        return relative_entropy_coherence(rho)
    value = (_root_sum(rho, alpha.value) - 1.0) / (alpha.value - 1.0)
    return CoherenceResult(value=value, optimal_delta=optimal_incoherent_state(rho, alpha))


def rastegin_coherence(rho: DensityMatrix, alpha: AlphaLike) -> CoherenceResult:
    """
    C~_alpha(rho) = ((sum_j <j|rho^alpha|j>^{1/alpha})^alpha - 1) / (alpha - 1)

    Shares its zero set and its alpha -> 1 limit with C_alpha, but is not
    strongly monotone.
    """
    alpha = as_alpha(alpha)
    if alpha.near_one:
        return relative_entropy_coherence(rho)
    value = (_root_sum(rho, alpha.value) ** alpha.value - 1.0) / (alpha.value - 1.0)
    return CoherenceResult(value=value, optimal_delta=optimal_incoherent_state(rho, alpha))


def optimal_incoherent_state(rho: DensityMatrix, alpha: AlphaLike) -> ProbabilityVector:
    """
    Minimizer of sgn(alpha) f_alpha(rho, delta) over incoherent delta

    delta_j is proportional to a_j^{1/alpha}; at this point
    f_alpha(rho, delta) = (sum_j a_j^{1/alpha})^alpha.

    Raises:
        DegenerateDiagonalError: if every a_j is below DIAGONAL_FLOOR
    """
    alpha = as_alpha(alpha)
    diagonal = power_diagonal(rho, alpha)
    if np.all(diagonal < DIAGONAL_FLOOR):
        raise DegenerateDiagonalError(f"All diagonal entries of rho^{alpha.value:g} vanish")
    weights = diagonal ** (1.0 / alpha.value)
    return ProbabilityVector(weights / weights.sum())


def _oracle_objective(diagonal: npt.NDArray[np.float64], deltas: npt.NDArray[np.float64], alpha: float):
    """
    (f^{1/alpha} - 1) / (alpha - 1) for a batch of diagonal candidates

    f(rho, diag delta) = sum_j a_j delta_j^{1-alpha}; a zero delta_j facing a
    positive a_j gives +inf when alpha > 1, and 0 otherwise.
    """
    with np.errstate(divide="ignore"):
        powered = np.where(deltas > 0.0, deltas, 0.0) ** (1.0 - alpha)
    powered = np.where(deltas > 0.0, powered, np.where(diagonal > 0.0, np.inf, 0.0) if alpha > 1.0 else 0.0)
    with np.errstate(invalid="ignore"):
        terms = np.where(diagonal > 0.0, diagonal * powered, 0.0)
    f_values = terms.sum(axis=-1)
    return (f_values ** (1.0 / alpha) - 1.0) / (alpha - 1.0)


def _simplex_rows(dim: int, steps: int):
    """Grid points of the simplex, one batch per value of the first coordinate"""
    grid = np.arange(steps + 1)
    if dim == 1:
        yield np.ones((1, 1))
    elif dim == 2:
        first = grid / steps
        yield np.stack([first, 1.0 - first], axis=1)
    else:
        for i in grid:
            j = np.arange(steps - i + 1)
            k = steps - i - j
            yield np.stack([np.full(j.shape, i), j, k], axis=1) / steps


def brute_force_min(rho: DensityMatrix, alpha: AlphaLike, resolution: Optional[float] = None) -> Tuple[float, ProbabilityVector]:
    """
    Exhaustive simplex grid search of (f_alpha^{1/alpha}(rho, delta) - 1) / (alpha - 1)

    Independent oracle for coherence_alpha and optimal_incoherent_state.

    Args:
        rho: State of dimension at most 3
        alpha: Order in (0, 2], not near one
        resolution: Grid step in [1e-5, 1e-2]; per-dimension default otherwise

    Returns:
        (minimum value, argmin delta)

    Raises:
        DimTooLargeError: for dimensions above 3
    """
    alpha = as_alpha(alpha)
    if rho.dim > ORACLE_MAX_DIM:
        raise DimTooLargeError(f"Grid oracle supports dims up to {ORACLE_MAX_DIM}, got {rho.dim}")
    if alpha.near_one:
        raise CoherenceError("Grid oracle needs alpha away from 1")
    if resolution is None:
        resolution = ORACLE_RESOLUTION.get(rho.dim, 1e-2)
    if not 1e-5 <= resolution <= 1e-2:
        raise CoherenceError(f"resolution must lie in [1e-5, 1e-2], got {resolution}")

    steps = int(round(1.0 / resolution))
    diagonal = power_diagonal(rho, alpha)
    best_value = math.inf
    best_delta = None
    for batch in _simplex_rows(rho.dim, steps):
        values = _oracle_objective(diagonal, batch, alpha.value)
        values = np.where(np.isfinite(values), values, np.inf)
        index = int(np.argmin(values))
        if values[index] < best_value:
            best_value = float(values[index])
            best_delta = batch[index]

    if best_delta is None:
        raise NumericalInconsistencyError("Every grid candidate diverged")
    logger.debug(f"Grid oracle d={rho.dim} alpha={alpha.value:g} steps={steps}: {best_value:.10g}")
    return best_value, ProbabilityVector(best_delta / best_delta.sum())


def skew_info_sum(rho: DensityMatrix) -> float:
    """
    Skew-information coherence sum_i -1/2 Tr [sqrt(rho), |i><i|]^2

    Computed as 1 - sum_i <i|sqrt(rho)|i>^2; the commutator form is evaluated
    as well and both must agree within SKEW_FORMS_TOL.
    """
    root = rho.power(0.5)
    root_diagonal = np.real(np.diag(root))
    value = 1.0 - float(np.sum(root_diagonal ** 2))

    commutator_form = 0.0
    for i in range(rho.dim):
        projector = np.zeros_like(root)
        projector[i, i] = 1.0
        commutator = root @ projector - projector @ root
        commutator_form -= 0.5 * float(np.real(np.trace(commutator @ commutator)))

    if abs(commutator_form - value) > SKEW_FORMS_TOL:
        raise NumericalInconsistencyError(
            f"Skew-information forms disagree: {value:.15g} vs {commutator_form:.15g}"
        )
    return value


def l1_coherence(rho: DensityMatrix) -> float:
    """sum_{i != j} |rho_ij|"""
    magnitudes = np.abs(rho.matrix)
    return float(magnitudes.sum() - np.trace(magnitudes))


def c2_direct(rho: DensityMatrix) -> float:
    """C_2(rho) = sum_i <i|rho^2|i>^{1/2} - 1, from the matrix square"""
    square = rho.matrix @ rho.matrix
    return float(np.sum(np.sqrt(np.clip(np.real(np.diag(square)), 0.0, None)))) - 1.0


def max_coherence(d: int, alpha: AlphaLike) -> float:
    """
    (d^{(alpha-1)/alpha} - 1) / (alpha - 1), ln d near alpha = 1

    Attained by the maximally coherent states for every alpha.
    """
    if d < 1:
        raise CoherenceError(f"Dimension must be positive, got {d}")
    alpha = as_alpha(alpha)
    if alpha.near_one:
        return math.log(d)
    return (d ** ((alpha.value - 1.0) / alpha.value) - 1.0) / (alpha.value - 1.0)


def coherence_ceiling(kind: CoherenceKind, d: int, alpha: Optional[AlphaLike] = None) -> float:
    """Largest value of a measure in dimension d, reached on maximally coherent states"""
    if d < 1:
        raise CoherenceError(f"Dimension must be positive, got {d}")
    if kind is CoherenceKind.TSALLIS:
        return max_coherence(d, alpha)
    if kind is CoherenceKind.RASTEGIN:
        alpha = as_alpha(alpha)
        if alpha.near_one:
            return math.log(d)
        return (d ** (alpha.value - 1.0) - 1.0) / (alpha.value - 1.0)
    if kind is CoherenceKind.RELATIVE_ENTROPY:
        return math.log(d)
    if kind is CoherenceKind.L1:
        return float(d - 1)
    if kind is CoherenceKind.SKEW_INFO:
        return 1.0 - 1.0 / d
    return math.sqrt(d) - 1.0


def coherence_value(kind: CoherenceKind, rho: DensityMatrix, alpha: Optional[AlphaLike] = None) -> float:
    """
    Scalar value of any supported quantifier

    Args:
        kind: Which measure
        rho: Valid state
        alpha: Order, required by the Tsallis and Rastegin families

    Returns:
        The coherence value in nats (entropic kinds) or dimensionless
    """
    if kind.needs_alpha and alpha is None:
        raise CoherenceError(f"{kind.value} coherence needs an alpha")
    if kind is CoherenceKind.TSALLIS:
        return coherence_alpha(rho, alpha).value
    if kind is CoherenceKind.RASTEGIN:
        return rastegin_coherence(rho, alpha).value
    if kind is CoherenceKind.RELATIVE_ENTROPY:
        return relative_entropy_coherence(rho).value
    if kind is CoherenceKind.L1:
        return l1_coherence(rho)
    if kind is CoherenceKind.SKEW_INFO:
        return skew_info_sum(rho)
    return c2_direct(rho)
