"""
Verification commands - verify (property suites) and search-violation
"""
import logging
import math
from dataclasses import replace

import click

from src.commands.common import (
    EXIT_PROPERTY_FAILURE,
    EXIT_SEARCH_EXHAUSTED,
    ValidationFailure,
    alpha_option,
    format_option,
    out_option,
    record_output,
    seed_option,
)
from src.errors import CoherenceError
from src.models import Alpha, CoherenceKind, RankPolicy
from src.models.records import TRIAL_COLUMNS, TrialConfig, ViolationReport
from src.services.search_service import search_rastegin_violation
from src.services.suite_service import SuiteService
from src.storage import load_trial_overrides, load_witness, save_witness

logger = logging.getLogger(__name__)


def build_trial_config(app_config, config_file=None, **flags) -> TrialConfig:
    """
    Suite configuration from defaults, command flags and an optional config file

    The config file overrides flags, which override the configured defaults.

    Raises:
        ValidationFailure: for any invalid value
    """
    try:
        cfg = TrialConfig(
            dims=app_config.DEFAULT_DIMS,
            alphas=app_config.DEFAULT_ALPHAS,
            trials_per_cell=app_config.COHERENCE_TRIALS,
            n_kraus_range=app_config.N_KRAUS_RANGE,
            master_seed=app_config.COHERENCE_SEED,
            tolerance=app_config.COHERENCE_TOLERANCE,
            rank_policy=app_config.RANK_POLICY,
        )
        cfg = cfg.with_overrides(**{key: value for key, value in flags.items() if value not in (None, ())})
        if config_file:
            cfg = cfg.with_overrides(**load_trial_overrides(config_file))
    except (CoherenceError, TypeError) as e:
        raise ValidationFailure(str(e)) from e
    return cfg


def failure_report(cfg: TrialConfig, summary) -> ViolationReport:
    """ViolationReport for the worst strong-monotonicity failure of a suite run"""
    stats = summary.checks.get("strong_monotonicity")
    record = stats.worst_record if stats else None
    if record is None or record.passed:
        return ViolationReport(found=False, kind=cfg.kinds[0], seed=cfg.master_seed)
    inputs = SuiteService.replay(cfg, record)
    return ViolationReport(
        found=True,
        kind=CoherenceKind(record.kind),
        alpha=None if record.alpha is None else Alpha(record.alpha),
        state=inputs.rho,
        channel=inputs.incoherent_channel,
        c_before=record.lhs,
        avg_c_after=record.rhs,
        gap=-record.margin,
        trials_used=cfg.trials_per_cell,
        seed=record.seed,
        trial=record.trial,
    )


def verify_witness(app_config, directory, tolerance, witness_dir, fmt, out):
    """
    Re-check a stored witness and exit 1 when it still violates strong monotonicity

    Raises:
        ValidationFailure: when the directory holds no readable witness
    """
    try:
        report = load_witness(directory)
    except CoherenceError as e:
        raise ValidationFailure(str(e)) from e
    if not report.found:
        raise ValidationFailure(f"{directory} holds no witness")
    tolerance = app_config.COHERENCE_TOLERANCE if tolerance is None else tolerance
    if not tolerance > 0:
        raise ValidationFailure(f"--tol must be positive, got {tolerance}")

    if out:
        with record_output(out, fmt, TRIAL_COLUMNS, "verify", log_failures=True) as publisher:
            summary = SuiteService.check_witness(report, tolerance, publisher)
    else:
        summary = SuiteService.check_witness(report, tolerance)

    click.echo(summary.render())
    if summary.passed:
        return

    record = summary.checks["strong_monotonicity"].worst_record
    checked = replace(report, c_before=record.lhs, avg_c_after=record.rhs, gap=-record.margin)
    click.echo()
    click.echo(checked.summary())
    if witness_dir and math.isfinite(checked.gap):
        save_witness(witness_dir, checked)
    click.get_current_context().exit(EXIT_PROPERTY_FAILURE)


@click.command("verify")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              help="JSON suite config (TrialConfig schema); overrides flags.")
@click.option("--replay", "replay_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Re-check the witness in this directory instead of running the suites.")
@click.option("--dim", "dims", type=int, multiple=True, help="Dimension; repeatable.")
@alpha_option
@click.option("--trials", type=int, default=None, help="Trials per (dim, alpha) cell.")
@click.option("--kind", "kinds", type=click.Choice([kind.value for kind in CoherenceKind]), multiple=True,
              help="Measure under test; repeatable (default: tsallis).")
@click.option("--rank-policy", type=click.Choice([policy.value for policy in RankPolicy]), default=None)
@click.option("--tol", type=float, default=None, help="Pass line: margin >= -tol.")
@click.option("--workers", type=int, default=None, help="Worker processes.")
@click.option("--witness-dir", type=click.Path(file_okay=False), default=None,
              help="Write the worst strong-monotonicity failure here as replayable files.")
@seed_option
@format_option
@out_option
@click.pass_obj
def verify(app_config, config_file, replay_dir, dims, alphas, trials, kinds, rank_policy, tol, workers,
           witness_dir, seed, fmt, out):
    """
    Run the randomized property suites and print a summary.

    Exits 0 when no non-degenerate record fails and 1 otherwise.
    With --replay only --tol, --witness-dir, --format and --out apply.
    """
    if replay_dir:
        verify_witness(app_config, replay_dir, tol, witness_dir, fmt, out)
        return

    cfg = build_trial_config(
        app_config, config_file,
        dims=dims, alphas=alphas, trials_per_cell=trials, kinds=kinds,
        rank_policy=rank_policy, tolerance=tol, master_seed=seed,
    )
    workers = app_config.COHERENCE_WORKERS if workers is None else workers
    logger.info(f"Suite config: {cfg.to_dict()}")

    if out:
        with record_output(out, fmt, TRIAL_COLUMNS, "verify", log_failures=True) as publisher:
            summary = SuiteService.run_suite(cfg, publisher=publisher, workers=workers)
    else:
        summary = SuiteService.run_suite(cfg, workers=workers)

    click.echo(summary.render())
    if summary.passed:
        return

    report = failure_report(cfg, summary)
    if report.found:
        click.echo()
        click.echo(report.summary())
        if witness_dir:
            save_witness(witness_dir, report)
    click.get_current_context().exit(EXIT_PROPERTY_FAILURE)


@click.command("search-violation")
@click.option("--dim", type=int, default=None, help="Dimension (>= 2); defaults to SEARCH_DIM (3).")
@alpha_option
@click.option("--trials", type=int, default=None, help="Search budget.")
@click.option("--kind", type=click.Choice([CoherenceKind.RASTEGIN.value, CoherenceKind.TSALLIS.value]),
              default=CoherenceKind.RASTEGIN.value, show_default=True, help="Measure under test.")
@click.option("--refine-steps", type=int, default=None, help="Hill-climbing steps per promising instance.")
@click.option("--out", "witness_dir", type=click.Path(file_okay=False), default="witness", show_default=True,
              help="Directory for state.json, channel.json and witness.json.")
@seed_option
@click.pass_obj
def search_violation(app_config, dim, alphas, trials, kind, refine_steps, witness_dir, seed):
    """
    Search for a strong-monotonicity violation.

    Exits 0 with witness files when one is found, 3 when the budget runs out.
    """
    dim = app_config.SEARCH_DIM if dim is None else dim
    if dim < 2:
        raise ValidationFailure(f"--dim must be >= 2, got {dim}")
    trials = app_config.SEARCH_TRIALS if trials is None else trials
    if trials < 1:
        raise ValidationFailure(f"--trials must be >= 1, got {trials}")
    try:
        alphas = [Alpha(value) for value in (alphas or app_config.SEARCH_ALPHAS)]
    except CoherenceError as e:
        raise ValidationFailure(str(e)) from e

    report = search_rastegin_violation(
        dim,
        trials,
        master_seed=app_config.COHERENCE_SEED if seed is None else seed,
        alphas=alphas,
        kind=CoherenceKind(kind),
        refine_steps=app_config.SEARCH_REFINE_STEPS if refine_steps is None else refine_steps,
    )
    click.echo(report.summary())
    if not report.found:
        click.get_current_context().exit(EXIT_SEARCH_EXHAUSTED)
    save_witness(witness_dir, report)
    click.echo(f"Witness written to {witness_dir}")
