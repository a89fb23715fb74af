"""
Record types for the verification harness and the command layer
"""
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from src.errors import ConfigError, InvalidAlphaError
from src.models import Alpha, CoherenceKind, DensityMatrix, KrausChannel, RankPolicy

SCHEMA_VERSION = 1

TRIAL_COLUMNS = [
    "check_name", "dim", "alpha", "kind", "lhs", "rhs", "margin", "passed", "seed", "trial", "degenerate",
]

MEASURE_COLUMNS = [
    "measure", "dim", "alpha", "value", "units", "reference", "abs_diff", "seed", "index", "delta",
]

# Canonical ordering of checks in summaries and record streams.
CHECK_ORDER = [
    "strong_monotonicity",
    "monotonicity",
    "convexity",
    "lemma1",
    "holder",
    "observation_1",
    "observation_2",
    "observation_3",
    "observation_4",
    "observation_5",
    "upper_bound",
    "null",
    "null_positive",
    "c2_identity",
    "half_order_skew",
    "half_order_displayed",
    "half_order_l2",
    "alpha_one_continuity",
]


TRIAL_CONFIG_KEYS = frozenset({
    "dims", "alphas", "trials_per_cell", "n_kraus_range", "master_seed", "tolerance", "rank_policy", "kinds",
})


def check_rank(check_name: str) -> int:
    try:
        return CHECK_ORDER.index(check_name)
    except ValueError:
        return len(CHECK_ORDER)


@dataclass(frozen=True)
class TrialConfig:
    """Grid, budget and seed of a verification suite"""
    dims: Tuple[int, ...]
    alphas: Tuple[float, ...]
    trials_per_cell: int
    n_kraus_range: Tuple[int, int] = (1, 4)
    master_seed: int = 0
    tolerance: float = 1e-9
    rank_policy: RankPolicy = RankPolicy.MIXED_RANKS
    kinds: Tuple[CoherenceKind, ...] = (CoherenceKind.TSALLIS,)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "alphas", tuple(dict.fromkeys(float(a) for a in self.alphas)))
        object.__setattr__(self, "kinds", tuple(CoherenceKind(k) for k in self.kinds))
        object.__setattr__(self, "rank_policy", RankPolicy(self.rank_policy))
        object.__setattr__(self, "n_kraus_range", tuple(int(n) for n in self.n_kraus_range))

        if not self.dims or any(d < 1 for d in self.dims):
            raise ConfigError(f"dims must be a non-empty list of positive integers, got {self.dims}")
        if not self.alphas:
            raise ConfigError("alphas must be non-empty")
        try:
            for value in self.alphas:
                Alpha(value)
        except InvalidAlphaError as e:
            raise ConfigError(str(e)) from e
        if not self.kinds:
            raise ConfigError("kinds must be non-empty")
        if int(self.trials_per_cell) < 1:
            raise ConfigError(f"trials_per_cell must be >= 1, got {self.trials_per_cell}")
        object.__setattr__(self, "trials_per_cell", int(self.trials_per_cell))
        low, high = self.n_kraus_range if len(self.n_kraus_range) == 2 else (0, -1)
        if low < 1 or high < low:
            raise ConfigError(f"n_kraus_range must be an interval of integers >= 1, got {self.n_kraus_range}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")

    @classmethod
    def from_dict(cls, data: dict) -> "TrialConfig":
        """Build a config from its JSON form"""
        unknown = set(data) - TRIAL_CONFIG_KEYS - {"schema"}
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        try:
            return cls(**{key: data[key] for key in TRIAL_CONFIG_KEYS if key in data})
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid config: {e}") from e

    def with_overrides(self, **overrides) -> "TrialConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "dims": list(self.dims),
            "alphas": list(self.alphas),
            "trials_per_cell": self.trials_per_cell,
            "n_kraus_range": list(self.n_kraus_range),
            "master_seed": self.master_seed,
            "tolerance": self.tolerance,
            "rank_policy": self.rank_policy.value,
            "kinds": [kind.value for kind in self.kinds],
        }


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one property check"""
    check_name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    dim: int = 0
    alpha: Optional[float] = None
    kind: str = ""
    seed: Optional[int] = None
    trial: Optional[int] = None
    degenerate: bool = False

    @classmethod
    def evaluate(cls, check_name: str, lhs: float, rhs: float, margin: float, tolerance: float, **context) -> "TrialRecord":
        """Build a record whose verdict follows margin >= -tolerance"""
        if math.isnan(margin):
            margin = -math.inf
        return cls(
            check_name=check_name,
            lhs=float(lhs),
            rhs=float(rhs),
            margin=float(margin),
            passed=bool(margin >= -tolerance),
            **context,
        )

    def with_context(self, **context) -> "TrialRecord":
        return replace(self, **context)

    def sort_key(self):
        return (
            check_rank(self.check_name),
            self.check_name,
            self.kind,
            self.dim,
            -1.0 if self.alpha is None else self.alpha,
            -1 if self.trial is None else self.trial,
        )

    def to_dict(self):
        return {
            "check_name": self.check_name,
            "dim": self.dim,
            "alpha": self.alpha,
            "kind": self.kind,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
            "seed": self.seed,
            "trial": self.trial,
            "degenerate": self.degenerate,
        }

    def __repr__(self):
        verdict = "degenerate" if self.degenerate else ("pass" if self.passed else "FAIL")
        return f"<TrialRecord {self.check_name} d={self.dim} alpha={self.alpha} margin={self.margin:.3e} {verdict}>"


@dataclass
class CheckStats:
    """Aggregate over the records of one check"""
    check_name: str
    total: int = 0
    passed: int = 0
    failed: int = 0
    degenerate: int = 0
    worst_margin: float = math.inf
    worst_record: Optional[TrialRecord] = None

    def add(self, record: TrialRecord):
        self.total += 1
        if record.degenerate:
            self.degenerate += 1
            return
        if record.passed:
            self.passed += 1
        else:
            self.failed += 1
        if self.worst_record is None or record.margin < self.worst_margin:
            self.worst_margin = record.margin
            self.worst_record = record

    def to_dict(self):
        return {
            "check_name": self.check_name,
            "total": self.total,
            "passed": self.passed,
            "failed": self.failed,
            "degenerate": self.degenerate,
            "worst_margin": self.worst_margin,
        }


@dataclass
class SuiteSummary:
    """Per-check counts and worst margins over a suite run"""
    checks: Dict[str, CheckStats] = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    @classmethod
    def from_records(cls, records: Sequence[TrialRecord], elapsed_seconds: float = 0.0) -> "SuiteSummary":
        summary = cls(elapsed_seconds=elapsed_seconds)
        for record in records:
            summary.checks.setdefault(record.check_name, CheckStats(record.check_name)).add(record)
        summary.checks = dict(sorted(summary.checks.items(), key=lambda item: (check_rank(item[0]), item[0])))
        return summary

    @property
    def total(self) -> int:
        return sum(stats.total for stats in self.checks.values())

    @property
    def failures(self) -> int:
        return sum(stats.failed for stats in self.checks.values())

    @property
    def passed(self) -> bool:
        """Exit verdict: zero non-degenerate failures"""
        return self.failures == 0

    def render(self) -> str:
        lines = [
            "Verification summary",
            "=" * 72,
            f"{'check':<24}{'total':>8}{'passed':>8}{'failed':>8}{'degen':>8}{'worst margin':>16}",
        ]
        for stats in self.checks.values():
            lines.append(
                f"{stats.check_name:<24}{stats.total:>8}{stats.passed:>8}{stats.failed:>8}"
                f"{stats.degenerate:>8}{stats.worst_margin:>16.3e}"
            )
        lines.append("-" * 72)
        lines.append(f"Verdict: {'PASS' if self.passed else 'FAIL'} ({self.failures} failures in {self.total} records)")
        return "\n".join(lines)

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "checks": [stats.to_dict() for stats in self.checks.values()],
            "failures": self.failures,
            "passed": self.passed,
        }


@dataclass
class ViolationReport:
    """Witness (state, channel, alpha) of a strong-monotonicity violation"""
    found: bool
    kind: CoherenceKind
    alpha: Optional[Alpha] = None
    state: Optional[DensityMatrix] = None
    channel: Optional[KrausChannel] = None
    c_before: float = 0.0
    avg_c_after: float = 0.0
    gap: float = -math.inf
    trials_used: int = 0
    seed: Optional[int] = None
    trial: Optional[int] = None

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "found": self.found,
            "kind": self.kind.value,
            "alpha": None if self.alpha is None else self.alpha.value,
            "c_before": self.c_before,
            "avg_c_after": self.avg_c_after,
            "gap": self.gap,
            "trials_used": self.trials_used,
            "seed": self.seed,
            "trial": self.trial,
        }

    def reverify(self) -> float:
        """Recompute the gap from the stored witness"""
        from src.services.search_service import witness_gap

        if not self.found:
            raise ValueError("Report carries no witness")
        return witness_gap(self.kind, self.state, self.channel, self.alpha)

    def summary(self) -> str:
        lines = [
            "Strong-monotonicity violation search",
            "=" * 48,
            f"Measure:        {self.kind.value}",
            f"Trials used:    {self.trials_used}",
        ]
        if self.found:
            lines += [
                "Witness found:  yes",
                f"alpha:          {self.alpha.value:g}",
                f"dim:            {self.state.dim}",
                f"Kraus ops:      {self.channel.n_kraus}",
                f"C(rho):         {self.c_before:.12g}",
                f"sum p_n C(rho_n): {self.avg_c_after:.12g}",
                f"gap:            {self.gap:.6e}",
                f"digest:         {self.seed}:{self.trial}",
            ]
        else:
            lines += ["Witness found:  no", f"Best gap:       {self.gap:.6e}"]
        return "\n".join(lines)

    def __repr__(self):
        return f"<ViolationReport found={self.found} kind={self.kind.value} gap={self.gap:.3e}>"


@dataclass(frozen=True)
class OutputRecord:
    """Flat measure row emitted by compute, sweep and oracle-compare"""
    measure: str
    dim: int
    value: float
    alpha: Optional[float] = None
    units: str = "nats"
    reference: Optional[float] = None
    abs_diff: Optional[float] = None
    seed: Optional[int] = None
    index: Optional[int] = None
    delta: Optional[str] = None

    def to_dict(self):
        return {column: getattr(self, column) for column in MEASURE_COLUMNS}
