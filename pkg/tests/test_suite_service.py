"""
Tests for the verification suite service
"""
import math

import numpy as np
import pytest

from src.errors import ConfigError, NumericalInconsistencyError
from src.models import CoherenceKind, RankPolicy
from src.models.records import SuiteSummary, TrialConfig, TrialRecord
from src.observers import RecordObserver, RecordPublisher
from src.services import checks
from src.services.suite_service import SuiteService


@pytest.fixture
def small_config():
    """Two dims, three orders, two trials per cell"""
    return TrialConfig(
        dims=(2, 3),
        alphas=(0.5, 1.0, 1.5),
        trials_per_cell=2,
        master_seed=4242,
        kinds=(CoherenceKind.TSALLIS, CoherenceKind.RELATIVE_ENTROPY, CoherenceKind.L1),
    )


class TestTrialConfig:
    """Test suite configuration validation"""

    @pytest.mark.parametrize("overrides", [
        {"dims": ()},
        {"alphas": (0.5, 2.5)},
        {"trials_per_cell": 0},
        {"n_kraus_range": (3, 1)},
        {"tolerance": 0.0},
        {"master_seed": -1},
    ])
    def test_invalid_values(self, small_config, overrides):
        with pytest.raises(ConfigError):
            small_config.with_overrides(**overrides)

    def test_unknown_rank_policy(self, small_config):
        with pytest.raises(ValueError):
            small_config.with_overrides(rank_policy="half")

    def test_duplicate_alphas_collapse(self):
        cfg = TrialConfig(dims=(2,), alphas=(0.5, 1.5, 0.5), trials_per_cell=1)
        assert cfg.alphas == (0.5, 1.5)

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ConfigError):
            TrialConfig.from_dict({"dims": [2], "alphas": [0.5], "trials_per_cell": 1, "budget": 3})

    def test_dict_form(self, small_config):
        assert TrialConfig.from_dict(small_config.to_dict()) == small_config


class TestTrialInputs:
    """Test per-trial random streams"""

    def test_reproducible(self, small_config):
        first = SuiteService.trial_inputs(small_config, 3, 1, 0)
        second = SuiteService.trial_inputs(small_config, 3, 1, 0)
        assert np.array_equal(first.rho.matrix, second.rho.matrix)
        assert np.array_equal(first.unitary, second.unitary)
        assert first.incoherent_channel.n_kraus == second.incoherent_channel.n_kraus

    def test_trials_differ(self, small_config):
        first = SuiteService.trial_inputs(small_config, 2, 1, 0)
        second = SuiteService.trial_inputs(small_config, 2, 1, 1)
        assert not np.array_equal(first.rho.matrix, second.rho.matrix)

    def test_shapes(self, small_config):
        inputs = SuiteService.trial_inputs(small_config, 3, 0, 0)
        assert inputs.sigma.rank == 3
        assert inputs.incoherent_channel.is_incoherent()
        assert inputs.ancilla.dim <= 3
        assert len(inputs.convex_ensemble) == len(inputs.pair_ensemble) >= 2

    def test_incoherent_channels_mix_collisions(self, small_config):
        def collides(channel):
            return any(np.count_nonzero(np.abs(op) > 0, axis=1).max() > 1 for op in channel.kraus)

        channels = [SuiteService.trial_inputs(small_config, 3, 1, trial).incoherent_channel for trial in range(40)]
        flags = [collides(channel) for channel in channels]
        assert any(flags)
        assert not all(flags)
        assert all(channel.is_incoherent() for channel in channels)

    def test_full_rank_policy(self, small_config):
        cfg = small_config.with_overrides(rank_policy=RankPolicy.FULL)
        for trial in range(4):
            assert SuiteService.trial_inputs(cfg, 3, 1, trial).rho.rank == 3


class TestRunSuite:
    """Test whole-suite runs"""

    def test_small_suite_passes(self, small_config):
        summary = SuiteService.run_suite(small_config)
        assert summary.passed, summary.render()
        assert "strong_monotonicity" in summary.checks
        assert "lemma1" in summary.checks
        assert "half_order_displayed" in summary.checks
        assert "null_positive" in summary.checks
        assert summary.checks["null_positive"].failed == 0

    def test_identity_checks_use_tight_tolerances(self, mocker, small_config):
        c2 = mocker.patch("src.services.checks.check_c2_identity", wraps=checks.check_c2_identity)
        half = mocker.patch("src.services.checks.check_half_order_identities",
                            wraps=checks.check_half_order_identities)

        SuiteService.run_records(small_config.with_overrides(dims=(2,), trials_per_cell=1, tolerance=1e-6))

        assert c2.call_args.args[1] == 1e-12
        assert half.call_args.args[1] == 1e-10

    def test_alpha_one_skips_divergence_checks(self, small_config):
        records = SuiteService.run_records(small_config.with_overrides(alphas=(1.0,), dims=(2,)))
        names = {record.check_name for record in records}
        assert "lemma1" not in names
        assert "strong_monotonicity" in names

    def test_records_carry_seed_and_trial(self, small_config):
        records = SuiteService.run_records(small_config.with_overrides(dims=(2,), trials_per_cell=1))
        assert all(record.seed == 4242 and record.trial == 0 for record in records)

    def test_deterministic(self, small_config):
        first = [r.to_dict() for r in SuiteService.run_records(small_config)]
        second = [r.to_dict() for r in SuiteService.run_records(small_config)]
        assert first == second

    def test_worker_count_does_not_matter(self, small_config):
        cfg = small_config.with_overrides(dims=(2,))
        serial = [r.to_dict() for r in SuiteService.run_records(cfg, workers=1)]
        parallel = [r.to_dict() for r in SuiteService.run_records(cfg, workers=2)]
        assert serial == parallel

    def test_publisher_receives_every_record(self, mocker, small_config):
        cfg = small_config.with_overrides(dims=(2,), trials_per_cell=1)
        observer = mocker.Mock(spec=RecordObserver)
        publisher = RecordPublisher()
        publisher.attach(observer)

        summary = SuiteService.run_suite(cfg, publisher=publisher)

        assert observer.update.call_count == summary.total

    def test_raising_check_becomes_failure(self, mocker, small_config):
        mocker.patch(
            "src.services.checks.check_c2_identity",
            side_effect=NumericalInconsistencyError("forms disagree"),
        )
        summary = SuiteService.run_suite(small_config.with_overrides(dims=(2,), trials_per_cell=1))

        stats = summary.checks["c2_identity"]
        assert not summary.passed
        assert stats.failed == stats.total == 1
        assert stats.worst_margin == -math.inf

    def test_replay_matches_record(self, small_config):
        records = SuiteService.run_records(small_config.with_overrides(dims=(3,), trials_per_cell=1))
        record = next(r for r in records if r.check_name == "strong_monotonicity" and r.alpha == 1.5)
        inputs = SuiteService.replay(small_config, record)
        assert np.array_equal(inputs.rho.matrix, SuiteService.trial_inputs(small_config, 3, 3, 0).rho.matrix)


class TestSummary:
    """Test aggregation of records"""

    def test_degenerate_records_do_not_fail(self):
        records = [
            TrialRecord("lemma1", 1.0, math.inf, -math.inf, True, dim=2, alpha=1.5, degenerate=True),
            TrialRecord("lemma1", 1.0, 0.5, 0.5, True, dim=2, alpha=1.5),
        ]
        summary = SuiteSummary.from_records(records)
        stats = summary.checks["lemma1"]
        assert summary.passed
        assert stats.degenerate == 1
        assert stats.worst_margin == 0.5

    def test_render_verdict(self):
        summary = SuiteSummary.from_records([TrialRecord("null", 0.1, 0.0, -0.1, False, dim=2)])
        assert "Verdict: FAIL" in summary.render()
        assert summary.failures == 1
