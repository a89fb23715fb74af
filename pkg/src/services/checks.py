"""
Property checks - every inequality and identity of the coherence family as a
function returning TrialRecord objects

Each record carries lhs, rhs and a signed margin; a record passes when
margin >= -tolerance. Margins of f_alpha-based checks are relative to
max(1, |lhs|, |rhs|) because f_alpha grows without bound for alpha > 1.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.errors import BadWeightsError, DimMismatchError, InvalidAlphaError, NotIncoherentChannelError
from src.models import (
    AlphaLike,
    CoherenceKind,
    DensityMatrix,
    KrausChannel,
    ProbabilityVector,
    PROBABILITY_SUM_TOL,
    as_alpha,
    mixture,
)
from src.models.records import TrialRecord
from src.services.channels import P_MIN, apply, select
from src.services.coherence import (
    c2_direct,
    coherence_alpha,
    coherence_ceiling,
    coherence_value,
    l1_coherence,
    optimal_incoherent_state,
    relative_entropy_coherence,
    skew_info_sum,
)
from src.services.divergence import f_alpha, trace_functional
from src.utils.hermitian import dagger, hermitize, spectral_decompose

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
CONTINUITY_STEP = 1e-4
CONTINUITY_BOUND = 1e-3
RATIO_FLOOR = 1e-8
C2_IDENTITY_TOL = 1e-12
HALF_ORDER_TOL = 1e-10
NULL_TOL = 1e-12
NULL_POSITIVE_FLOOR = 1e-6
NULL_POSITIVE_L1 = 1e-3

Ensemble = Sequence[Tuple[float, DensityMatrix]]
PairEnsemble = Sequence[Tuple[float, DensityMatrix, DensityMatrix]]


def difference(lhs: float, rhs: float) -> float:
    """lhs - rhs with inf - inf = 0"""
    if lhs == rhs:
        return 0.0
    return lhs - rhs


def relative_margin(lhs: float, rhs: float) -> float:
    """(lhs - rhs) / max(1, |lhs|, |rhs|), infinite when exactly one side is"""
    diff = difference(lhs, rhs)
    if not math.isfinite(diff):
        return diff
    return diff / max(1.0, abs(lhs), abs(rhs))


def _context(kind: Optional[CoherenceKind], dim: int, alpha) -> dict:
    return {
        "dim": dim,
        "alpha": None if alpha is None else as_alpha(alpha).value,
        "kind": "" if kind is None else kind.value,
    }


def _require_incoherent(channel: KrausChannel):
    if not channel.is_incoherent():
        raise NotIncoherentChannelError(f"{channel!r} has a Kraus operator with two entries in one column")


def _require_away_from_one(alpha):
    if alpha.near_one:
        raise InvalidAlphaError(f"alpha = {alpha.value} lies within the near-one band")


def check_strong_monotonicity(
    kind: CoherenceKind,
    rho: DensityMatrix,
    channel: KrausChannel,
    alpha: Optional[AlphaLike] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    p_min: float = P_MIN,
) -> TrialRecord:
    """
    C(rho) >= sum_n p_n C(rho_n) over the sub-selected outcomes of an incoherent channel

    Dropped outcomes contribute nothing to the right-hand side.

    Raises:
        NotIncoherentChannelError: for channels outside the incoherent class
    """
    _require_incoherent(channel)
    lhs = coherence_value(kind, rho, alpha)
    rhs = sum(outcome.prob * coherence_value(kind, outcome.post_state, alpha) for outcome in select(channel, rho, p_min))
    return TrialRecord.evaluate(
        "strong_monotonicity", lhs, rhs, difference(lhs, rhs), tolerance, **_context(kind, rho.dim, alpha)
    )


def check_monotonicity(
    kind: CoherenceKind,
    rho: DensityMatrix,
    channel: KrausChannel,
    alpha: Optional[AlphaLike] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> TrialRecord:
    """C(rho) >= C(apply(channel, rho)) for an incoherent channel"""
    _require_incoherent(channel)
    lhs = coherence_value(kind, rho, alpha)
    rhs = coherence_value(kind, apply(channel, rho), alpha)
    return TrialRecord.evaluate(
        "monotonicity", lhs, rhs, difference(lhs, rhs), tolerance, **_context(kind, rho.dim, alpha)
    )


def check_convexity(
    kind: CoherenceKind,
    ensemble: Ensemble,
    alpha: Optional[AlphaLike] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> TrialRecord:
    """
    sum_i q_i C(sigma_i) >= C(sum_i q_i sigma_i)

    Raises:
        BadWeightsError: if weights are negative or do not sum to one
    """
    if not ensemble:
        raise BadWeightsError("Ensemble is empty")
    weights = np.array([float(q) for q, _ in ensemble])
    if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > PROBABILITY_SUM_TOL:
        raise BadWeightsError(f"Ensemble weights must be a probability vector, got {weights.tolist()}")
    states = [state for _, state in ensemble]
    lhs = float(sum(q * coherence_value(kind, state, alpha) for q, state in zip(weights, states)))
    rhs = coherence_value(kind, mixture(weights, states), alpha)
    return TrialRecord.evaluate(
        "convexity", lhs, rhs, difference(lhs, rhs), tolerance, **_context(kind, states[0].dim, alpha)
    )


def _unnormalized_term(op, rho: DensityMatrix, sigma: DensityMatrix, alpha: float) -> float:
    """Tr (K rho K^dagger)^alpha (K sigma K^dagger)^{1-alpha}"""
    rho_out = hermitize(op @ rho.matrix @ dagger(op))
    sigma_out = hermitize(op @ sigma.matrix @ dagger(op))
    return trace_functional(spectral_decompose(rho_out), rho_out, spectral_decompose(sigma_out), alpha)


def check_lemma1(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    channel: KrausChannel,
    alpha: AlphaLike,
    tolerance: float = DEFAULT_TOLERANCE,
    p_min: float = P_MIN,
) -> TrialRecord:
    """
    sgn(alpha) f_alpha(rho, sigma) >= sgn(alpha) sum_n p_n^alpha q_n^{1-alpha} f_alpha(rho_n, sigma_n)

    (p_n, rho_n) and (q_n, sigma_n) are the sub-selected outcomes of any
    channel. Outcomes retained for only one of the two states enter through
    the unnormalized operators. When q_n < p_min <= p_n and alpha > 1 the
    right-hand side is unbounded and the record is marked degenerate.
    """
    alpha = as_alpha(alpha)
    _require_away_from_one(alpha)
    if rho.dim != sigma.dim:
        raise DimMismatchError(f"States have dims {rho.dim} and {sigma.dim}")

    context = _context(None, rho.dim, alpha)
    lhs = alpha.sign * f_alpha(rho, sigma, alpha)
    rho_outcomes = select(channel, rho, p_min).by_index()
    sigma_outcomes = select(channel, sigma, p_min).by_index()

    degenerate = TrialRecord(
        check_name="lemma1", lhs=lhs, rhs=math.inf, margin=-math.inf, passed=True, degenerate=True, **context,
    )
    total = 0.0
    for index, op in enumerate(channel):
        p_out = rho_outcomes.get(index)
        q_out = sigma_outcomes.get(index)
        if p_out is not None and q_out is not None:
            value = f_alpha(p_out.post_state, q_out.post_state, alpha)
            if math.isinf(value):
                logger.debug(f"Lemma 1 outcome {index}: post-selected supports are not nested")
                return degenerate
            total += p_out.prob ** alpha.value * q_out.prob ** (1.0 - alpha.value) * value
        elif p_out is not None and alpha.value > 1.0:
            logger.debug(f"Lemma 1 outcome {index}: q_n below p_min with p_n = {p_out.prob:.3e}")
            return degenerate
        else:
            total += _unnormalized_term(op, rho, sigma, alpha.value)

    rhs = alpha.sign * total
    return TrialRecord.evaluate("lemma1", lhs, rhs, relative_margin(lhs, rhs), tolerance, **context)


def check_holder_step(
    rho: DensityMatrix,
    channel: KrausChannel,
    alpha: AlphaLike,
    tolerance: float = DEFAULT_TOLERANCE,
    p_min: float = P_MIN,
) -> TrialRecord:
    """
    Hoelder step of the strong-monotonicity argument

    With sigma_n from sub-selecting embed(optimal_incoherent_state(rho)):
    sum_n p_n^alpha q_n^{1-alpha} f_n is at most (alpha < 1), or at least
    (alpha > 1), (sum_n q_n)^{1-alpha} (sum_n p_n f_n^{1/alpha})^alpha. Both
    sides are multiplied by sgn(alpha) and run over the outcomes retained for
    both states.
    """
    alpha = as_alpha(alpha)
    _require_away_from_one(alpha)
    _require_incoherent(channel)
    context = _context(None, rho.dim, alpha)

    delta = optimal_incoherent_state(rho, alpha).embed()
    rho_outcomes = select(channel, rho, p_min).by_index()
    delta_outcomes = select(channel, delta, p_min).by_index()
    common = sorted(set(rho_outcomes) & set(delta_outcomes))

    p = np.array([rho_outcomes[n].prob for n in common])
    q = np.array([delta_outcomes[n].prob for n in common])
    f = np.array([f_alpha(rho_outcomes[n].post_state, delta_outcomes[n].post_state, alpha) for n in common])
    if not np.all(np.isfinite(f)):
        return TrialRecord(
            check_name="holder", lhs=math.inf, rhs=math.inf, margin=0.0,
            passed=True, degenerate=True, **context,
        )

    a = alpha.value
    terms = float(np.sum(p ** a * q ** (1.0 - a) * f))
    bound = float(q.sum() ** (1.0 - a) * np.sum(p * f ** (1.0 / a)) ** a)
    lhs = alpha.sign * terms
    rhs = alpha.sign * bound
    return TrialRecord.evaluate("holder", lhs, rhs, relative_margin(lhs, rhs), tolerance, **context)


def check_observations(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    channel: KrausChannel,
    unitary,
    delta: ProbabilityVector,
    alpha: AlphaLike,
    pairs: Optional[PairEnsemble] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> List[TrialRecord]:
    """
    The five structural properties of f_alpha, one record each

    1. sgn f(rho, sigma) >= sgn 1
    2. f(U rho U^dagger, U sigma U^dagger) = f(rho, sigma)
    3. sgn f(rho, sigma) >= sgn f(channel(rho), channel(sigma))
    4. sum_i p_i sgn f(rho_i, sigma_i) >= sgn f(sum p_i rho_i, sum p_i sigma_i)
    5. f(rho (x) delta, sigma (x) delta) = f(rho, sigma)

    Args:
        rho, sigma: States of equal dimension
        channel: Any channel on that dimension
        unitary: Unitary on that dimension
        delta: Incoherent ancilla state
        alpha: Order away from one
        pairs: Ensemble (p_i, rho_i, sigma_i) for property 4; by default
            the half-half mixture of (rho, sigma) and (sigma, rho)

    Returns:
        Five records named observation_1 .. observation_5
    """
    alpha = as_alpha(alpha)
    _require_away_from_one(alpha)
    context = _context(None, rho.dim, alpha)
    sign = alpha.sign
    base = f_alpha(rho, sigma, alpha)
    records = []

    lhs, rhs = sign * base, float(sign)
    records.append(TrialRecord.evaluate("observation_1", lhs, rhs, relative_margin(lhs, rhs), tolerance, **context))

    rotated = f_alpha(rho.conjugate(unitary), sigma.conjugate(unitary), alpha)
    records.append(TrialRecord.evaluate(
        "observation_2", rotated, base, -abs(relative_margin(rotated, base)), tolerance, **context
    ))

    lhs, rhs = sign * base, sign * f_alpha(apply(channel, rho), apply(channel, sigma), alpha)
    records.append(TrialRecord.evaluate("observation_3", lhs, rhs, relative_margin(lhs, rhs), tolerance, **context))

    if pairs is None:
        pairs = [(0.5, rho, sigma), (0.5, sigma, rho)]
    weights = [float(p) for p, _, _ in pairs]
    lhs = sum(p * sign * f_alpha(r, s, alpha) for p, r, s in pairs)
    rhs = sign * f_alpha(
        mixture(weights, [r for _, r, _ in pairs]),
        mixture(weights, [s for _, _, s in pairs]),
        alpha,
    )
    records.append(TrialRecord.evaluate("observation_4", lhs, rhs, relative_margin(lhs, rhs), tolerance, **context))

    ancilla = delta.embed()
    extended = f_alpha(rho.tensor(ancilla), sigma.tensor(ancilla), alpha)
    records.append(TrialRecord.evaluate(
        "observation_5", extended, base, -abs(relative_margin(extended, base)), tolerance, **context
    ))
    return records


def check_upper_bound(
    kind: CoherenceKind,
    rho: DensityMatrix,
    alpha: Optional[AlphaLike] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> TrialRecord:
    """C(rho) <= maximal value in dimension d"""
    lhs = coherence_value(kind, rho, alpha)
    rhs = coherence_ceiling(kind, rho.dim, alpha)
    return TrialRecord.evaluate("upper_bound", lhs, rhs, rhs - lhs, tolerance, **_context(kind, rho.dim, alpha))


def check_null(
    kind: CoherenceKind,
    delta: ProbabilityVector,
    alpha: Optional[AlphaLike] = None,
    tolerance: float = NULL_TOL,
) -> TrialRecord:
    """Incoherent states have zero coherence"""
    value = coherence_value(kind, delta.embed(), alpha)
    return TrialRecord.evaluate("null", value, 0.0, -abs(value), tolerance, **_context(kind, delta.dim, alpha))


def check_null_positive(
    kind: CoherenceKind,
    rho: DensityMatrix,
    alpha: Optional[AlphaLike] = None,
    tolerance: float = 0.0,
) -> TrialRecord:
    """
    Coherent states have coherence above NULL_POSITIVE_FLOOR

    Applies when l1_coherence(rho) >= NULL_POSITIVE_L1; nearly diagonal
    states give a degenerate record instead.
    """
    context = _context(kind, rho.dim, alpha)
    value = coherence_value(kind, rho, alpha)
    if l1_coherence(rho) < NULL_POSITIVE_L1:
        return TrialRecord(
            check_name="null_positive", lhs=value, rhs=NULL_POSITIVE_FLOOR, margin=0.0,
            passed=True, degenerate=True, **context,
        )
    return TrialRecord.evaluate(
        "null_positive", value, NULL_POSITIVE_FLOOR, value - NULL_POSITIVE_FLOOR, tolerance, **context
    )


def check_c2_identity(rho: DensityMatrix, tolerance: float = C2_IDENTITY_TOL) -> TrialRecord:
    """coherence_alpha at alpha = 2 agrees with the direct C_2 formula"""
    lhs = coherence_alpha(rho, 2.0).value
    rhs = c2_direct(rho)
    return TrialRecord.evaluate(
        "c2_identity", lhs, rhs, -abs(lhs - rhs), tolerance, **_context(CoherenceKind.TSALLIS, rho.dim, 2.0)
    )


def check_half_order_identities(rho: DensityMatrix, tolerance: float = HALF_ORDER_TOL) -> List[TrialRecord]:
    """
    Identities of the alpha = 1/2 member

    half_order_skew: C_{1/2} = 2 * skew_info_sum
    half_order_displayed: C_{1/2} / (1 - sum_i <i|sqrt(rho)|i>^2) = 2,
        degenerate when the denominator is below RATIO_FLOOR
    half_order_l2: ||sqrt(rho) - sqrt(delta)||_2^2 = 2 (1 - Tr sqrt(rho) sqrt(delta))
        at the optimal incoherent delta
    """
    context = _context(CoherenceKind.TSALLIS, rho.dim, 0.5)
    half = coherence_alpha(rho, 0.5).value
    skew = skew_info_sum(rho)
    records = [TrialRecord.evaluate("half_order_skew", half, 2.0 * skew, -abs(half - 2.0 * skew), tolerance, **context)]

    if skew < RATIO_FLOOR:
        records.append(TrialRecord(
            check_name="half_order_displayed", lhs=half, rhs=2.0, margin=0.0,
            passed=True, degenerate=True, **context,
        ))
    else:
        ratio = half / skew
        records.append(TrialRecord.evaluate(
            "half_order_displayed", ratio, 2.0, -abs(ratio - 2.0) * skew, tolerance, **context
        ))

    root = rho.power(0.5)
    delta_root = np.diag(np.sqrt(optimal_incoherent_state(rho, 0.5).probs)).astype(np.complex128)
    distance = float(np.sum(np.abs(root - delta_root) ** 2))
    overlap = 2.0 * (1.0 - float(np.real(np.trace(root @ delta_root))))
    records.append(TrialRecord.evaluate(
        "half_order_l2", distance, overlap, -abs(distance - overlap), tolerance, **context
    ))
    return records


def check_alpha_one_continuity(rho: DensityMatrix, tolerance: float = DEFAULT_TOLERANCE) -> TrialRecord:
    """|C_{1 +- 1e-4}(rho) - (S(dephase(rho)) - S(rho))| <= 1e-3"""
    limit = relative_entropy_coherence(rho).value
    nearby = [coherence_alpha(rho, 1.0 + step).value for step in (-CONTINUITY_STEP, CONTINUITY_STEP)]
    worst = max(nearby, key=lambda value: abs(value - limit))
    return TrialRecord.evaluate(
        "alpha_one_continuity", worst, limit, CONTINUITY_BOUND - abs(worst - limit), tolerance,
        **_context(CoherenceKind.TSALLIS, rho.dim, None),
    )
