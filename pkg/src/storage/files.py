"""
JSON file formats for states, channels, suite configs and violation witnesses
"""
import json
import logging
from pathlib import Path
from typing import Union

import numpy as np

from src.errors import CoherenceError, ConfigError, StateFileError
from src.models import Alpha, CoherenceKind, DensityMatrix, KrausChannel
from src.models.records import SCHEMA_VERSION, TRIAL_CONFIG_KEYS, TrialConfig, ViolationReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

WITNESS_STATE = "state.json"
WITNESS_CHANNEL = "channel.json"
WITNESS_REPORT = "witness.json"


def _read_json(path: PathLike) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise StateFileError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise StateFileError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise StateFileError(f"{path} must hold a JSON object")
    return data


def _write_json(path: PathLike, data: dict):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2)
        handle.write("\n")


def _complex_entries(entries, size: int, what: str) -> np.ndarray:
    """Row-major [[re, im], ...] pairs as a complex vector of the given size"""
    try:
        pairs = np.array(entries, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise StateFileError(f"{what}: entries must be [re, im] pairs") from e
    if pairs.shape != (size, 2):
        raise StateFileError(f"{what}: expected {size} [re, im] pairs, got shape {pairs.shape}")
    return pairs[:, 0] + 1j * pairs[:, 1]


def state_from_dict(data: dict) -> DensityMatrix:
    """Parse {"dim": d, "entries": [[re, im], ...]} and validate the state"""
    for field in ("dim", "entries"):
        if field not in data:
            raise StateFileError(f"State is missing required field: {field}")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise StateFileError(f"State dim must be a positive integer, got {dim!r}")
    matrix = _complex_entries(data["entries"], dim * dim, "State").reshape(dim, dim)
    try:
        return DensityMatrix(matrix)
    except CoherenceError as e:
        raise StateFileError(f"Invalid state: {e}") from e


def channel_from_dict(data: dict) -> KrausChannel:
    """Parse {"d": d, "kraus": [[[re, im], ...], ...]} and validate completeness"""
    for field in ("d", "kraus"):
        if field not in data:
            raise StateFileError(f"Channel is missing required field: {field}")
    d = data["d"]
    if not isinstance(d, int) or d < 1:
        raise StateFileError(f"Channel d must be a positive integer, got {d!r}")
    if not isinstance(data["kraus"], list) or not data["kraus"]:
        raise StateFileError("Channel needs a non-empty kraus list")
    ops = tuple(
        _complex_entries(entries, d * d, f"Kraus operator {n}").reshape(d, d)
        for n, entries in enumerate(data["kraus"])
    )
    try:
        return KrausChannel(ops)
    except CoherenceError as e:
        raise StateFileError(f"Invalid channel: {e}") from e


def load_state(path: PathLike) -> DensityMatrix:
    """
    Load a density-matrix file

    Raises:
        StateFileError: naming the failed field or invariant
    """
    state = state_from_dict(_read_json(path))
    logger.info(f"Loaded state from {path}: {state!r}")
    return state


def save_state(path: PathLike, state: DensityMatrix):
    _write_json(path, state.to_dict())
    logger.info(f"Saved state to {path}")


def load_channel(path: PathLike) -> KrausChannel:
    """
    Load a channel file and report whether it is incoherent

    Raises:
        StateFileError: naming the failed field or invariant
    """
    channel = channel_from_dict(_read_json(path))
    if channel.is_incoherent():
        logger.info(f"Loaded incoherent channel from {path}: {channel!r}")
    else:
        logger.warning(f"Loaded channel from {path} is not incoherent: {channel!r}")
    return channel


def save_channel(path: PathLike, channel: KrausChannel):
    _write_json(path, channel.to_dict())
    logger.info(f"Saved channel to {path}")


def load_trial_config(path: PathLike) -> TrialConfig:
    """Load a suite config in the TrialConfig JSON schema"""
    config = TrialConfig.from_dict(_read_json(path))
    logger.info(f"Loaded suite config from {path}")
    return config


def save_witness(directory: PathLike, report: ViolationReport) -> Path:
    """
    Write state.json, channel.json and witness.json for a found violation

    The state and channel files are ordinary input files, so the witness
    replays through compute and verify.

    Returns:
        The witness directory
    """
    if not report.found:
        raise StateFileError("Only found violations have a witness")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_state(directory / WITNESS_STATE, report.state)
    save_channel(directory / WITNESS_CHANNEL, report.channel)
    _write_json(directory / WITNESS_REPORT, report.to_dict())
    logger.info(f"Wrote witness to {directory}")
    return directory


def load_witness(directory: PathLike) -> ViolationReport:
    """Rebuild a ViolationReport from the three witness files"""
    directory = Path(directory)
    meta = _read_json(directory / WITNESS_REPORT)
    if meta.get("schema") != SCHEMA_VERSION:
        raise StateFileError(f"Unsupported witness schema {meta.get('schema')!r}")
    try:
        kind = CoherenceKind(meta["kind"])
        alpha = meta["alpha"]
    except (KeyError, ValueError) as e:
        raise StateFileError(f"Malformed witness metadata: {e}") from e
    return ViolationReport(
        found=bool(meta.get("found", True)),
        kind=kind,
        alpha=None if alpha is None else Alpha(alpha),
        state=load_state(directory / WITNESS_STATE),
        channel=load_channel(directory / WITNESS_CHANNEL),
        c_before=float(meta.get("c_before", 0.0)),
        avg_c_after=float(meta.get("avg_c_after", 0.0)),
        gap=float(meta.get("gap", 0.0)),
        trials_used=int(meta.get("trials_used", 0)),
        seed=meta.get("seed"),
        trial=meta.get("trial"),
    )


def load_trial_overrides(path: PathLike) -> dict:
    """
    Keys present in a suite config file, for layering over other settings

    Raises:
        ConfigError: for unknown keys
    """
    data = _read_json(path)
    data.pop("schema", None)
    unknown = set(data) - TRIAL_CONFIG_KEYS
    if unknown:
        raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
    if "n_kraus_range" in data and isinstance(data["n_kraus_range"], list):
        data["n_kraus_range"] = tuple(data["n_kraus_range"])
    return data
