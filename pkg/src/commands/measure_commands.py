"""
Measure commands - compute, sweep and oracle-compare
"""
import logging
import math

import click

from src.commands.common import (
    EXIT_PROPERTY_FAILURE,
    ValidationFailure,
    alpha_option,
    format_option,
    out_option,
    record_output,
    seed_option,
    units_option,
)
from src.errors import CoherenceError
from src.models import Alpha, CoherenceKind, Units
from src.models.records import MEASURE_COLUMNS, OutputRecord
from src.services.coherence import (
    brute_force_min,
    coherence_alpha,
    coherence_ceiling,
    coherence_value,
    rastegin_coherence,
)
from src.services.states import random_density
from src.storage import load_state
from src.utils.rng import derive_stream, label_key

logger = logging.getLogger(__name__)

DEFAULT_COMPUTE_ALPHAS = (0.5, 1.0, 2.0)
DEFAULT_ORACLE_ALPHAS = (0.3, 0.5, 0.7, 1.3, 1.5, 2.0)
ORACLE_SLACK = 1e-9


def _alphas(values):
    try:
        return [Alpha(value) for value in values]
    except CoherenceError as e:
        raise ValidationFailure(str(e)) from e


def _load(state_file):
    try:
        return load_state(state_file)
    except CoherenceError as e:
        raise ValidationFailure(str(e)) from e


def _converted(kind: CoherenceKind, units: Units, value):
    if value is None or not kind.entropic:
        return value
    return units.convert(value)


def _units_label(kind: CoherenceKind, units: Units) -> str:
    return units.value if kind.entropic else "dimensionless"


def _delta_text(delta) -> str:
    return ";".join(repr(float(p)) for p in delta.probs)


def parse_alpha_range(text: str):
    """
    Parse lo:hi:step into an ascending alpha grid that contains 1.0 when in range

    Raises:
        ValidationFailure: for malformed text, a non-positive step or an empty range
    """
    try:
        low, high, step = (float(part) for part in text.split(":"))
    except ValueError as e:
        raise ValidationFailure(f"--alpha-range must be lo:hi:step, got {text!r}") from e
    if not step > 0:
        raise ValidationFailure(f"--alpha-range step must be positive, got {step}")
    if not low <= high:
        raise ValidationFailure(f"--alpha-range is empty: {text}")
    count = int(math.floor((high - low) / step + 1e-9)) + 1
    grid = {round(low + k * step, 12) for k in range(count)}
    if low <= 1.0 <= high:
        grid.add(1.0)
    return _alphas(sorted(grid))


@click.command("compute")
@click.argument("state_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", "kinds", type=click.Choice([kind.value for kind in CoherenceKind]), multiple=True,
              help="Measure; repeatable (default: tsallis and rastegin).")
@alpha_option
@units_option
@format_option
@out_option
@click.option("--emit-delta", is_flag=True, help="Add the optimal incoherent state to each row.")
def compute(state_file, kinds, alphas, units, fmt, out, emit_delta):
    """
    Compute coherence measures of the state in STATE_FILE.

    One row per (measure, alpha); measures without an order give one row.
    """
    rho = _load(state_file)
    kinds = [CoherenceKind(kind) for kind in kinds] or [CoherenceKind.TSALLIS, CoherenceKind.RASTEGIN]
    alphas = _alphas(alphas or DEFAULT_COMPUTE_ALPHAS)
    units = Units(units)

    with record_output(out, fmt, MEASURE_COLUMNS, "compute") as publisher:
        index = 0
        for kind in kinds:
            for alpha in (alphas if kind.needs_alpha else [None]):
                delta = None
                if kind is CoherenceKind.TSALLIS:
                    result = coherence_alpha(rho, alpha)
                    value, delta = result.value, result.optimal_delta
                elif kind is CoherenceKind.RASTEGIN:
                    result = rastegin_coherence(rho, alpha)
                    value, delta = result.value, result.optimal_delta
                else:
                    value = coherence_value(kind, rho)
                row = OutputRecord(
                    measure=kind.value,
                    dim=rho.dim,
                    alpha=None if alpha is None else alpha.value,
                    value=_converted(kind, units, value),
                    units=_units_label(kind, units),
                    index=index,
                    delta=_delta_text(delta) if emit_delta and delta is not None else None,
                )
                publisher.notify(row.to_dict())
                index += 1
    logger.info(f"Computed {index} measure rows for {state_file}")


@click.command("sweep")
@click.argument("state_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha-range", "alpha_range", required=True, help="Grid as lo:hi:step; 1.0 is added when in range.")
@units_option
@format_option
@out_option
def sweep(state_file, alpha_range, units, fmt, out):
    """
    Sweep both coherence families of STATE_FILE over an alpha grid.

    Rows are ordered by alpha; the reference column holds the maximal value
    of each measure in the state's dimension.
    """
    alphas = parse_alpha_range(alpha_range)
    rho = _load(state_file)
    units = Units(units)

    with record_output(out, fmt, MEASURE_COLUMNS, "sweep") as publisher:
        index = 0
        for alpha in alphas:
            for kind, measure in ((CoherenceKind.TSALLIS, coherence_alpha), (CoherenceKind.RASTEGIN, rastegin_coherence)):
                row = OutputRecord(
                    measure=kind.value,
                    dim=rho.dim,
                    alpha=alpha.value,
                    value=units.convert(measure(rho, alpha).value),
                    units=units.value,
                    reference=units.convert(coherence_ceiling(kind, rho.dim, alpha)),
                    index=index,
                )
                publisher.notify(row.to_dict())
                index += 1


@click.command("oracle-compare")
@click.option("--dim", type=int, default=2, show_default=True, help="Dimension, 2 or 3.")
@alpha_option
@click.option("--states", "n_states", type=int, default=None, help="Random full-rank states per alpha.")
@click.option("--resolution", type=float, default=None, help="Simplex grid step (per-dimension default).")
@click.option("--bound", type=float, default=None, help="Largest accepted |closed form - oracle|.")
@seed_option
@format_option
@out_option
@click.pass_obj
def oracle_compare(app_config, dim, alphas, n_states, resolution, bound, seed, fmt, out):
    """
    Compare the closed-form coherence with the simplex grid oracle.

    Exits 1 when a difference exceeds the bound or the closed form lies
    above the oracle minimum.
    """
    if dim not in app_config.ORACLE_RESOLUTION:
        raise ValidationFailure(f"oracle-compare supports dims {sorted(app_config.ORACLE_RESOLUTION)}, got {dim}")
    alphas = _alphas(alphas or DEFAULT_ORACLE_ALPHAS)
    if any(alpha.near_one for alpha in alphas):
        raise ValidationFailure("oracle-compare needs every alpha away from 1")
    if n_states is None:
        n_states = app_config.ORACLE_STATES
    if n_states < 0:
        raise ValidationFailure(f"--states must be >= 0, got {n_states}")
    resolution = resolution if resolution is not None else app_config.ORACLE_RESOLUTION[dim]
    bound = bound if bound is not None else app_config.ORACLE_BOUND[dim]
    seed = app_config.COHERENCE_SEED if seed is None else seed

    failures = 0
    with record_output(out, fmt, MEASURE_COLUMNS, "oracle-compare") as publisher:
        for index in range(n_states):
            rho = random_density(dim, dim, derive_stream(seed, label_key("oracle"), dim, index))
            for alpha in alphas:
                closed = coherence_alpha(rho, alpha).value
                try:
                    oracle, _ = brute_force_min(rho, alpha, resolution)
                except CoherenceError as e:
                    raise ValidationFailure(str(e)) from e
                diff = abs(closed - oracle)
                if diff > bound or closed > oracle + ORACLE_SLACK:
                    failures += 1
                    logger.warning(f"Oracle mismatch state {index} alpha={alpha.value:g}: {closed:.10g} vs {oracle:.10g}")
                publisher.notify(OutputRecord(
                    measure="oracle",
                    dim=dim,
                    alpha=alpha.value,
                    value=closed,
                    reference=oracle,
                    abs_diff=diff,
                    seed=seed,
                    index=index,
                ).to_dict())

    if failures:
        click.echo(f"{failures} oracle comparisons out of bound", err=True)
        click.get_current_context().exit(EXIT_PROPERTY_FAILURE)
