"""
Search service - randomized counterexample search for strong monotonicity
with hill-climbing refinement of promising instances
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.errors import CoherenceError
from src.models import Alpha, AlphaLike, CoherenceKind, DensityMatrix, KrausChannel, as_alpha
from src.models.records import ViolationReport
from src.services.channels import incoherent_channel_from_parameters, random_incoherent_parameters
from src.services.checks import check_strong_monotonicity
from src.services.states import density_from_factor, ginibre
from src.utils.rng import derive_stream, label_key

logger = logging.getLogger(__name__)

SEARCH_LABEL = "search"
DEFAULT_ALPHAS = (0.3, 0.5, 1.5, 2.0)
REFINE_THRESHOLD = 1e-8
FOUND_THRESHOLD = 1e-6
REVERIFY_TOL = 1e-12
INITIAL_STEP = 0.1
MIN_STEP = 1e-6
PROGRESS_EVERY = 10_000
COLLISION_PERIOD = 4


def witness_gap(kind: CoherenceKind, rho: DensityMatrix, channel: KrausChannel, alpha: Optional[AlphaLike]) -> float:
    """sum_n p_n C(rho_n) - C(rho); positive values violate strong monotonicity"""
    return -check_strong_monotonicity(kind, rho, channel, alpha).margin


@dataclass
class Candidate:
    """Continuous parameters of one search instance"""
    factor: np.ndarray
    weights: np.ndarray
    phases: np.ndarray
    rows: np.ndarray
    alpha: Alpha

    def build(self) -> Tuple[DensityMatrix, KrausChannel]:
        return density_from_factor(self.factor), incoherent_channel_from_parameters(self.weights, self.phases, self.rows)

    def gap(self, kind: CoherenceKind) -> float:
        try:
            rho, channel = self.build()
            return witness_gap(kind, rho, channel, self.alpha)
        except CoherenceError as e:
            logger.debug(f"Candidate rejected: {e}")
            return -math.inf

    def perturbed(self, rng: np.random.Generator, step: float) -> "Candidate":
        factor = self.factor + step * ginibre(*self.factor.shape, rng)
        weights = np.abs(self.weights + step * rng.standard_normal(self.weights.shape))
        weights = weights / weights.sum(axis=0, keepdims=True)
        phases = self.phases + step * rng.standard_normal(self.phases.shape)
        return Candidate(factor=factor, weights=weights, phases=phases, rows=self.rows, alpha=self.alpha)


def collisions_allowed(trial: int) -> bool:
    """Every COLLISION_PERIOD-th trial draws Kraus rows that may collide"""
    return trial % COLLISION_PERIOD == COLLISION_PERIOD - 1


def _draw_candidate(
    d: int,
    alphas: Sequence[Alpha],
    n_kraus_range: Tuple[int, int],
    rng,
    allow_collisions: bool = False,
) -> Candidate:
    alpha = alphas[int(rng.integers(len(alphas)))]
    rank = int(rng.integers(1, d + 1))
    factor = ginibre(d, rank, rng)
    low, high = n_kraus_range
    weights, phases, rows = random_incoherent_parameters(
        d, int(rng.integers(low, high + 1)), rng, allow_collisions=allow_collisions,
    )
    return Candidate(factor=factor, weights=weights, phases=phases, rows=rows, alpha=alpha)


def refine(candidate: Candidate, kind: CoherenceKind, steps: int, rng: np.random.Generator) -> Tuple[Candidate, float]:
    """
    Coordinate-perturbation hill climbing on the gap

    A perturbation is kept only when it increases the gap; the step halves
    after every rejection and doubles after every acceptance.
    """
    best_gap = candidate.gap(kind)
    step = INITIAL_STEP
    for _ in range(steps):
        trial = candidate.perturbed(rng, step)
        trial_gap = trial.gap(kind)
        if trial_gap > best_gap:
            candidate, best_gap = trial, trial_gap
            step = min(2.0 * step, 1.0)
        else:
            step *= 0.5
            if step < MIN_STEP:
                step = INITIAL_STEP
    return candidate, best_gap


def reverify(report: ViolationReport) -> bool:
    """Recompute the gap from freshly built copies of the witness"""
    rho = DensityMatrix(np.array(report.state.matrix))
    channel = KrausChannel(tuple(np.array(op) for op in report.channel.kraus))
    gap = witness_gap(report.kind, rho, channel, report.alpha)
    consistent = abs(gap - report.gap) <= REVERIFY_TOL * max(1.0, abs(gap))
    return consistent and gap > FOUND_THRESHOLD


def search_rastegin_violation(
    d: int,
    max_trials: int,
    master_seed: int = 0,
    alphas: Sequence[AlphaLike] = DEFAULT_ALPHAS,
    kind: CoherenceKind = CoherenceKind.RASTEGIN,
    refine_steps: int = 200,
    n_kraus_range: Tuple[int, int] = (2, 4),
) -> ViolationReport:
    """
    Random search for (rho, incoherent channel, alpha) with
    sum_n p_n C(rho_n) > C(rho) + 1e-6

    Trial t draws from its own substream of master_seed, so a reported trial
    index reproduces the starting instance. Trials where collisions_allowed
    holds may map several columns of one Kraus operator to one row. Gaps
    above 1e-8 are refined by hill climbing; a witness is reported only
    after it re-verifies.

    No qubit witness has turned up; dimension 3 finds one within about a
    thousand trials.

    Args:
        d: Dimension (>= 2)
        max_trials: Random instances to draw
        master_seed: Search seed
        alphas: Orders to sample from
        kind: Measure under test
        refine_steps: Hill-climbing budget per promising instance
        n_kraus_range: Inclusive range of Kraus operator counts

    Returns:
        ViolationReport, found = False with the best gap if the budget runs out
    """
    if d < 2:
        raise CoherenceError(f"Search needs d >= 2, got {d}")
    alphas = [as_alpha(alpha) for alpha in alphas]
    best_gap = -math.inf
    report = ViolationReport(found=False, kind=kind, seed=master_seed)

    for trial in range(max_trials):
        rng = derive_stream(master_seed, label_key(SEARCH_LABEL), d, trial)
        candidate = _draw_candidate(d, alphas, n_kraus_range, rng, allow_collisions=collisions_allowed(trial))
        gap = candidate.gap(kind)
        if gap > REFINE_THRESHOLD:
            logger.info(f"Trial {trial}: gap {gap:.3e} at alpha={candidate.alpha.value:g}, refining")
            candidate, gap = refine(candidate, kind, refine_steps, rng)
        best_gap = max(best_gap, gap)

        if gap > FOUND_THRESHOLD:
            rho, channel = candidate.build()
            record = check_strong_monotonicity(kind, rho, channel, candidate.alpha)
            report = ViolationReport(
                found=True,
                kind=kind,
                alpha=candidate.alpha,
                state=rho,
                channel=channel,
                c_before=record.lhs,
                avg_c_after=record.rhs,
                gap=-record.margin,
                trials_used=trial + 1,
                seed=master_seed,
                trial=trial,
            )
            if reverify(report):
                logger.info(f"Witness found after {trial + 1} trials: gap {gap:.6e}")
                return report
            logger.warning(f"Trial {trial}: gap {gap:.3e} did not re-verify, continuing")

        if (trial + 1) % PROGRESS_EVERY == 0:
            logger.info(f"Search progress: {trial + 1}/{max_trials} trials, best gap {best_gap:.3e}")

    logger.info(f"Search exhausted {max_trials} trials, best gap {best_gap:.3e}")
    return ViolationReport(found=False, kind=kind, gap=best_gap, trials_used=max_trials, seed=master_seed)
