"""
Tests for the strong-monotonicity violation search
"""
import math

import numpy as np
import pytest

from src.errors import CoherenceError
from src.models import Alpha, CoherenceKind
from src.models.records import ViolationReport
from src.services.channels import dephasing_channel, identity_channel
from src.services.search_service import (
    Candidate,
    _draw_candidate,
    collisions_allowed,
    refine,
    reverify,
    search_rastegin_violation,
    witness_gap,
)
from src.utils.rng import derive_stream


@pytest.fixture
def candidate():
    rng = derive_stream(11, 0)
    return _draw_candidate(2, [Alpha(1.5)], (2, 3), rng)


class TestWitnessGap:
    """Test the violation gap"""

    def test_identity_has_no_gap(self, plus_state):
        assert witness_gap(CoherenceKind.RASTEGIN, plus_state, identity_channel(2), 1.5) == pytest.approx(0.0, abs=1e-12)

    def test_dephasing_gap_is_negative_coherence(self, plus_state):
        assert witness_gap(CoherenceKind.RASTEGIN, plus_state, dephasing_channel(2), 2.0) == pytest.approx(-1.0)


class TestCandidate:
    """Test search instances"""

    def test_build_is_valid(self, candidate):
        rho, channel = candidate.build()
        assert rho.dim == 2
        assert channel.is_incoherent()

    def test_perturbed_keeps_columns_normalized(self, candidate):
        moved = candidate.perturbed(derive_stream(1), 0.3)
        assert np.allclose(moved.weights.sum(axis=0), 1.0)
        assert np.array_equal(moved.rows, candidate.rows)

    def test_refine_never_lowers_gap(self, candidate):
        start = candidate.gap(CoherenceKind.RASTEGIN)
        _, refined = refine(candidate, CoherenceKind.RASTEGIN, 15, derive_stream(2))
        assert refined >= start

    def test_invalid_candidate_scores_minus_infinity(self, candidate):
        broken = Candidate(
            factor=np.zeros((2, 1)), weights=candidate.weights, phases=candidate.phases,
            rows=candidate.rows, alpha=candidate.alpha,
        )
        assert broken.gap(CoherenceKind.RASTEGIN) == -math.inf


def _has_collision(rows: np.ndarray) -> bool:
    return any(len(set(op_rows.tolist())) < op_rows.size for op_rows in rows)


class TestCollisions:
    """Test Kraus row collisions in search instances"""

    @pytest.mark.parametrize("trial,expected", [(0, False), (1, False), (2, False), (3, True), (7, True), (8, False)])
    def test_collision_schedule(self, trial, expected):
        assert collisions_allowed(trial) is expected

    def test_permutation_rows_without_collisions(self):
        for index in range(10):
            drawn = _draw_candidate(3, [Alpha(1.5)], (2, 4), derive_stream(31, index))
            assert not _has_collision(drawn.rows)

    def test_collision_draws_repeat_rows(self):
        drawn = [
            _draw_candidate(3, [Alpha(1.5)], (2, 4), derive_stream(31, index), allow_collisions=True)
            for index in range(10)
        ]
        assert any(_has_collision(candidate.rows) for candidate in drawn)
        for candidate in drawn:
            assert candidate.build()[1].is_incoherent()

    def test_search_passes_schedule_to_draws(self, mocker):
        spy = mocker.patch("src.services.search_service._draw_candidate", wraps=_draw_candidate)

        search_rastegin_violation(3, 8, master_seed=5, kind=CoherenceKind.TSALLIS, refine_steps=2)

        flags = [call.kwargs["allow_collisions"] for call in spy.call_args_list]
        assert flags == [False, False, False, True, False, False, False, True]


class TestSearch:
    """Test the search loop"""

    def test_tsallis_negative_control(self):
        report = search_rastegin_violation(2, 40, master_seed=5, kind=CoherenceKind.TSALLIS, refine_steps=10)
        assert not report.found
        assert report.trials_used == 40
        assert report.gap <= 1e-6

    def test_near_one_control(self):
        report = search_rastegin_violation(2, 20, master_seed=5, alphas=(1.0,), refine_steps=5)
        assert not report.found

    def test_rejects_small_dimension(self):
        with pytest.raises(CoherenceError):
            search_rastegin_violation(1, 10)

    def test_deterministic(self):
        first = search_rastegin_violation(2, 25, master_seed=9, refine_steps=5)
        second = search_rastegin_violation(2, 25, master_seed=9, refine_steps=5)
        assert first.to_dict() == second.to_dict()

    def test_qutrit_search_finds_witness(self, qutrit_witness):
        assert qutrit_witness.found is True
        assert qutrit_witness.trials_used <= 965
        assert qutrit_witness.state.dim == 3
        assert qutrit_witness.gap > 1e-6
        assert qutrit_witness.channel.is_incoherent()

    def test_qutrit_witness_reverifies(self, qutrit_witness):
        assert reverify(qutrit_witness)
        assert qutrit_witness.reverify() == pytest.approx(qutrit_witness.gap, rel=1e-12)
        assert qutrit_witness.c_before + qutrit_witness.gap == pytest.approx(qutrit_witness.avg_c_after, rel=1e-12)

    def test_qutrit_witness_replays_from_trial_index(self, qutrit_witness):
        replayed = search_rastegin_violation(
            3, qutrit_witness.trials_used, master_seed=qutrit_witness.seed,
        )
        assert replayed.to_dict() == qutrit_witness.to_dict()

    def test_reverify_rejects_edited_gap(self, plus_state):
        report = ViolationReport(
            found=True, kind=CoherenceKind.RASTEGIN, alpha=Alpha(2.0), state=plus_state,
            channel=dephasing_channel(2), gap=0.5,
        )
        assert not reverify(report)
