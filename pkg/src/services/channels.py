"""
Channel service - Kraus application, sub-selection and random
(incoherent) channel generation
"""
import logging
from typing import Sequence

import numpy as np

from src.errors import DimMismatchError
from src.models import (
    DensityMatrix,
    KrausChannel,
    SelectiveOutcome,
    Selection,
    INCOHERENCE_TOL,
)
from src.services.states import ginibre
from src.utils.hermitian import ComplexMatrix, dagger

logger = logging.getLogger(__name__)

P_MIN = 1e-12


def _check_dims(channel: KrausChannel, rho: DensityMatrix):
    if channel.d_in != rho.dim:
        raise DimMismatchError(f"Channel acts on dim {channel.d_in}, state has dim {rho.dim}")


def apply(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """
    Non-selective map rho -> sum_n K_n rho K_n^dagger

    Args:
        channel: Kraus channel
        rho: Input state

    Returns:
        Output state
    """
    _check_dims(channel, rho)
    output = sum(op @ rho.matrix @ dagger(op) for op in channel)
    return DensityMatrix.from_operator(output)


def select(channel: KrausChannel, rho: DensityMatrix, p_min: float = P_MIN) -> Selection:
    """
    Sub-selective application: outcomes (p_n, rho_n)

    p_n = Tr K_n rho K_n^dagger and rho_n = K_n rho K_n^dagger / p_n. Outcomes
    with p_n < p_min are dropped and their mass reported separately.

    Args:
        channel: Kraus channel
        rho: Input state
        p_min: Smallest retained outcome probability

    Returns:
        Selection of retained outcomes in Kraus order
    """
    _check_dims(channel, rho)
    outcomes = []
    dropped = 0.0
    for index, op in enumerate(channel):
        unnormalized = op @ rho.matrix @ dagger(op)
        prob = float(np.real(np.trace(unnormalized)))
        if prob < p_min:
            dropped += max(prob, 0.0)
            continue
        outcomes.append(SelectiveOutcome(
            prob=prob,
            post_state=DensityMatrix.from_operator(unnormalized),
            index=index,
        ))
    if dropped > 0.0:
        logger.debug(f"Dropped outcome mass {dropped:.3e} below p_min={p_min:g}")
    return Selection(outcomes=outcomes, dropped_mass=dropped)


def is_incoherent(channel: KrausChannel, tol: float = INCOHERENCE_TOL) -> bool:
    """True iff every Kraus operator has at most one entry above tol per column"""
    return channel.is_incoherent(tol)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel((np.eye(d, dtype=np.complex128),))


def unitary_channel(unitary: ComplexMatrix) -> KrausChannel:
    return KrausChannel((np.asarray(unitary, dtype=np.complex128),))


def dephasing_channel(d: int) -> KrausChannel:
    """K_i = |i><i|"""
    ops = []
    for i in range(d):
        op = np.zeros((d, d), dtype=np.complex128)
        op[i, i] = 1.0
        ops.append(op)
    return KrausChannel(tuple(ops))


def _fourier_split(op: ComplexMatrix) -> list:
    """
    Replace K by the d operators K D_c / sqrt(d), D_c = diag(e^{2 pi i j c / d})

    sum_c D_c^dagger K^dagger K D_c / d keeps only the diagonal of K^dagger K, so
    row collisions inside K no longer spoil completeness.
    """
    d = op.shape[1]
    columns = np.arange(d)
    return [op * np.exp(2j * np.pi * columns * c / d) / np.sqrt(d) for c in range(d)]


def incoherent_channel_from_parameters(weights, phases, rows) -> KrausChannel:
    """
    Incoherent channel with (K_n)_{rows[n, j], j} = sqrt(weights[n, j]) e^{i phases[n, j]}

    Every column of weights must sum to one. Operators whose row map is not
    injective are Fourier-split (see _fourier_split), so the channel may then
    carry more than n_kraus operators; without collisions it has exactly n_kraus.

    Args:
        weights: (n_kraus, d) nonnegative array, columns summing to 1
        phases: (n_kraus, d) real array
        rows: (n_kraus, d) integer target rows in [0, d)

    Returns:
        KrausChannel with one nonzero per column in each operator
    """
    weights = np.asarray(weights, dtype=np.float64)
    phases = np.asarray(phases, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.int64)
    if not weights.shape == phases.shape == rows.shape or weights.ndim != 2:
        raise DimMismatchError("weights, phases and rows must share a (n_kraus, d) shape")
    n_kraus, d = weights.shape
    columns = np.arange(d)
    ops = []
    for n in range(n_kraus):
        op = np.zeros((d, d), dtype=np.complex128)
        op[rows[n], columns] = np.sqrt(weights[n]) * np.exp(1j * phases[n])
        if len(set(rows[n].tolist())) < d:
            ops.extend(_fourier_split(op))
        else:
            ops.append(op)
    return KrausChannel(tuple(ops))


def random_incoherent_parameters(d: int, n_kraus: int, rng: np.random.Generator, allow_collisions: bool = False):
    """
    Flat-Dirichlet column weights, uniform phases and uniform target rows

    Rows are independent uniform draws when allow_collisions is set, otherwise
    a uniform random permutation per operator.
    """
    weights = rng.dirichlet(np.ones(n_kraus), size=d).T
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_kraus, d))
    if allow_collisions:
        rows = rng.integers(0, d, size=(n_kraus, d))
    else:
        rows = np.array([rng.permutation(d) for _ in range(n_kraus)]).reshape(n_kraus, d)
    return weights, phases, rows


def random_incoherent_channel(
    d: int,
    n_kraus: int,
    rng: np.random.Generator,
    allow_collisions: bool = False,
) -> KrausChannel:
    """
    Random incoherent operation

    Args:
        d: Dimension
        n_kraus: Number of drawn Kraus operators (>= 1)
        rng: Generator owned by the caller
        allow_collisions: Let several columns of one operator target one row

    Returns:
        Channel passing is_incoherent, complete by construction; exactly
        n_kraus operators unless collisions were drawn
    """
    if n_kraus < 1:
        raise DimMismatchError(f"n_kraus must be >= 1, got {n_kraus}")
    params = random_incoherent_parameters(d, n_kraus, rng, allow_collisions=allow_collisions)
    return incoherent_channel_from_parameters(*params)


def random_channel(d: int, n_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """
    Generic TPCP map from a random isometry

    A stacked (n_kraus * d) x d Ginibre matrix is orthonormalized by QR and
    cut into n_kraus square blocks.
    """
    if n_kraus < 1:
        raise DimMismatchError(f"n_kraus must be >= 1, got {n_kraus}")
    isometry, _ = np.linalg.qr(ginibre(n_kraus * d, d, rng))
    return KrausChannel(tuple(isometry[n * d:(n + 1) * d] for n in range(n_kraus)))


def channel_from_operators(ops: Sequence[ComplexMatrix]) -> KrausChannel:
    return KrausChannel(tuple(np.asarray(op, dtype=np.complex128) for op in ops))
