"""
Suite service - randomized property suites over a dims x alphas x trials grid
Records are published through the Observer pattern in canonical order
"""
import logging
import math
import time
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.linalg import LinAlgError

from src.errors import CoherenceError
from src.models import Alpha, CoherenceKind, DensityMatrix, KrausChannel, ProbabilityVector, RankPolicy
from src.models.records import SuiteSummary, TrialConfig, TrialRecord, ViolationReport
from src.observers.record_observer import RecordPublisher
from src.services import checks
from src.services.channels import random_channel, random_incoherent_channel
from src.services.states import haar_unitary, random_density, random_incoherent
from src.utils.hermitian import ComplexMatrix
from src.utils.rng import derive_stream, label_key

logger = logging.getLogger(__name__)

SUITE_LABEL = "suite"
MAX_ANCILLA_DIM = 3
MAX_EXTENDED_DIM = 12
CHUNK_SIZE = 16


@dataclass(frozen=True)
class TrialInputs:
    """Every random object one trial consumes, drawn in a fixed order"""
    rho: DensityMatrix
    sigma: DensityMatrix
    incoherent_channel: KrausChannel
    channel: KrausChannel
    unitary: ComplexMatrix
    ancilla: ProbabilityVector
    incoherent_state: ProbabilityVector
    weights: Tuple[float, ...]
    ensemble: Tuple[DensityMatrix, ...]
    partners: Tuple[DensityMatrix, ...]

    @property
    def convex_ensemble(self):
        return list(zip(self.weights, self.ensemble))

    @property
    def pair_ensemble(self):
        return list(zip(self.weights, self.ensemble, self.partners))


def _draw_inputs(cfg: TrialConfig, dim: int, rng: np.random.Generator) -> TrialInputs:
    low, high = cfg.n_kraus_range
    rank = int(rng.integers(1, dim + 1)) if cfg.rank_policy is RankPolicy.MIXED_RANKS else dim
    rho = random_density(dim, rank, rng)
    sigma = random_density(dim, dim, rng)
    collisions = bool(rng.integers(2))
    incoherent_channel = random_incoherent_channel(
        dim, int(rng.integers(low, high + 1)), rng, allow_collisions=collisions,
    )
    channel = random_channel(dim, int(rng.integers(low, high + 1)), rng)
    unitary = haar_unitary(dim, rng)
    ancilla = random_incoherent(max(1, min(MAX_ANCILLA_DIM, MAX_EXTENDED_DIM // dim)), rng)
    incoherent_state = random_incoherent(dim, rng)
    size = int(rng.integers(2, 5))
    weights = rng.dirichlet(np.ones(size))
    weights = tuple(float(w) for w in weights / weights.sum())
    ensemble = tuple(random_density(dim, dim, rng) for _ in range(size))
    partners = tuple(random_density(dim, dim, rng) for _ in range(size))
    return TrialInputs(
        rho=rho,
        sigma=sigma,
        incoherent_channel=incoherent_channel,
        channel=channel,
        unitary=unitary,
        ancilla=ancilla,
        incoherent_state=incoherent_state,
        weights=weights,
        ensemble=ensemble,
        partners=partners,
    )


def _guarded(check_name: str, context: dict, call: Callable) -> List[TrialRecord]:
    """Run one check; an exception becomes a failed record instead of aborting the suite"""
    try:
        result = call()
    except (CoherenceError, LinAlgError, FloatingPointError) as e:
        logger.error(f"Check {check_name} raised at {context}: {e}")
        return [TrialRecord(
            check_name=check_name, lhs=math.nan, rhs=math.nan, margin=-math.inf, passed=False, **context,
        )]
    return result if isinstance(result, list) else [result]


def _kind_checks(cfg: TrialConfig, kind: CoherenceKind, alpha: Optional[Alpha], inputs: TrialInputs):
    tol = cfg.tolerance
    context = {"dim": inputs.rho.dim, "alpha": None if alpha is None else alpha.value, "kind": kind.value}
    records = []
    records += _guarded("strong_monotonicity", context, lambda: checks.check_strong_monotonicity(
        kind, inputs.rho, inputs.incoherent_channel, alpha, tol))
    records += _guarded("monotonicity", context, lambda: checks.check_monotonicity(
        kind, inputs.rho, inputs.incoherent_channel, alpha, tol))
    records += _guarded("convexity", context, lambda: checks.check_convexity(
        kind, inputs.convex_ensemble, alpha, tol))
    records += _guarded("upper_bound", context, lambda: checks.check_upper_bound(kind, inputs.rho, alpha, tol))
    records += _guarded("null", context, lambda: checks.check_null(
        kind, inputs.incoherent_state, alpha, min(tol, checks.NULL_TOL)))
    records += _guarded("null_positive", context, lambda: checks.check_null_positive(kind, inputs.rho, alpha))
    return records


def _divergence_checks(cfg: TrialConfig, alpha: Alpha, inputs: TrialInputs):
    tol = cfg.tolerance
    context = {"dim": inputs.rho.dim, "alpha": alpha.value, "kind": ""}
    records = []
    records += _guarded("lemma1", context, lambda: checks.check_lemma1(
        inputs.rho, inputs.sigma, inputs.channel, alpha, tol))
    records += _guarded("holder", context, lambda: checks.check_holder_step(
        inputs.rho, inputs.incoherent_channel, alpha, tol))
    records += _guarded("observation_1", context, lambda: checks.check_observations(
        inputs.rho, inputs.sigma, inputs.channel, inputs.unitary, inputs.ancilla, alpha,
        pairs=inputs.pair_ensemble, tolerance=tol))
    return records


def _identity_checks(cfg: TrialConfig, inputs: TrialInputs):
    tol = cfg.tolerance
    context = {"dim": inputs.rho.dim, "alpha": None, "kind": CoherenceKind.TSALLIS.value}
    records = []
    records += _guarded("c2_identity", context, lambda: checks.check_c2_identity(
        inputs.rho, min(tol, checks.C2_IDENTITY_TOL)))
    records += _guarded("half_order_skew", context, lambda: checks.check_half_order_identities(
        inputs.rho, min(tol, checks.HALF_ORDER_TOL)))
    records += _guarded("alpha_one_continuity", context, lambda: checks.check_alpha_one_continuity(inputs.sigma, tol))
    return records


def _run_task(task) -> List[TrialRecord]:
    """Worker: every check of one (dim, alpha slot, trial) cell entry"""
    cfg, dim, alpha_slot, trial = task
    inputs = SuiteService.trial_inputs(cfg, dim, alpha_slot, trial)
    records = []
    if alpha_slot == 0:
        records += _identity_checks(cfg, inputs)
        for kind in cfg.kinds:
            if not kind.needs_alpha:
                records += _kind_checks(cfg, kind, None, inputs)
    else:
        alpha = Alpha(cfg.alphas[alpha_slot - 1])
        for kind in cfg.kinds:
            if kind.needs_alpha:
                records += _kind_checks(cfg, kind, alpha, inputs)
        if not alpha.near_one:
            records += _divergence_checks(cfg, alpha, inputs)
    return [record.with_context(seed=cfg.master_seed, trial=trial) for record in records]


class SuiteService:
    """Service class for running verification suites"""

    @staticmethod
    def trial_inputs(cfg: TrialConfig, dim: int, alpha_slot: int, trial: int) -> TrialInputs:
        """
        Regenerate the random inputs of one trial

        Args:
            cfg: Suite configuration (master seed, rank policy, Kraus range)
            dim: Cell dimension
            alpha_slot: 1 + index into cfg.alphas, or 0 for alpha-free checks
            trial: Trial index inside the cell

        Returns:
            TrialInputs identical to those the suite drew for that trial
        """
        rng = derive_stream(cfg.master_seed, label_key(SUITE_LABEL), dim, alpha_slot, trial)
        return _draw_inputs(cfg, dim, rng)

    @staticmethod
    def tasks(cfg: TrialConfig) -> list:
        return [
            (cfg, dim, alpha_slot, trial)
            for dim in cfg.dims
            for alpha_slot in range(len(cfg.alphas) + 1)
            for trial in range(cfg.trials_per_cell)
        ]

    @staticmethod
    def run_records(cfg: TrialConfig, workers: int = 1) -> List[TrialRecord]:
        """
        Execute every task and return the records in canonical order

        The result does not depend on the worker count.
        """
        tasks = SuiteService.tasks(cfg)
        logger.info(f"Running {len(tasks)} trials on {max(workers, 1)} worker(s)")
        records = []
        if workers > 1:
            with Pool(processes=workers) as pool:
                for chunk in pool.imap_unordered(_run_task, tasks, chunksize=CHUNK_SIZE):
                    records.extend(chunk)
        else:
            for task in tasks:
                records.extend(_run_task(task))
        return sorted(records, key=TrialRecord.sort_key)

    @staticmethod
    def run_suite(
        cfg: TrialConfig,
        publisher: Optional[RecordPublisher] = None,
        workers: int = 1,
    ) -> SuiteSummary:
        """
        Run the full suite and notify observers of every record

        Args:
            cfg: Validated configuration
            publisher: Optional subject whose observers receive each record row
            workers: Worker processes (1 runs in-process)

        Returns:
            SuiteSummary over all records
        """
        started = time.perf_counter()
        records = SuiteService.run_records(cfg, workers)
        if publisher is not None:
            for record in records:
                publisher.notify(record.to_dict())

        summary = SuiteSummary.from_records(records, elapsed_seconds=time.perf_counter() - started)
        for stats in summary.checks.values():
            if stats.failed:
                logger.warning(f"{stats.check_name}: {stats.failed} failures, worst margin {stats.worst_margin:.3e}")
        logger.info(f"Suite finished: {summary.failures} failures in {summary.total} records "
                    f"({summary.elapsed_seconds:.2f}s)")
        return summary

    @staticmethod
    def check_witness(
        report: ViolationReport,
        tolerance: float,
        publisher: Optional[RecordPublisher] = None,
    ) -> SuiteSummary:
        """
        Re-run the strong-monotonicity check on a stored witness

        Args:
            report: Witness loaded from disk
            tolerance: Pass line
            publisher: Optional subject receiving the record row

        Returns:
            SuiteSummary over the single strong_monotonicity record
        """
        started = time.perf_counter()
        alpha = report.alpha
        context = {"dim": report.state.dim, "alpha": None if alpha is None else alpha.value, "kind": report.kind.value}
        records = _guarded("strong_monotonicity", context, lambda: checks.check_strong_monotonicity(
            report.kind, report.state, report.channel, alpha, tolerance))
        records = [record.with_context(seed=report.seed, trial=report.trial) for record in records]
        if publisher is not None:
            for record in records:
                publisher.notify(record.to_dict())
        return SuiteSummary.from_records(records, elapsed_seconds=time.perf_counter() - started)

    @staticmethod
    def replay(cfg: TrialConfig, record: TrialRecord) -> TrialInputs:
        """Inputs behind a per-measure record, from its (dim, alpha, trial) context"""
        kind = CoherenceKind(record.kind)
        alpha_slot = cfg.alphas.index(record.alpha) + 1 if kind.needs_alpha else 0
        return SuiteService.trial_inputs(cfg, record.dim, alpha_slot, record.trial)
