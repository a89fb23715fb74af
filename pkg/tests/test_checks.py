"""
Tests for the property checks
"""
import math

import numpy as np
import pytest

from src.errors import BadWeightsError, InvalidAlphaError, NotIncoherentChannelError
from src.models import CoherenceKind, DensityMatrix, ProbabilityVector
from src.services import checks
from src.services.channels import (
    dephasing_channel,
    identity_channel,
    random_channel,
    random_incoherent_channel,
    unitary_channel,
)
from src.services.states import haar_unitary, maximally_coherent, random_density, random_incoherent
from src.utils.rng import derive_stream

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


class TestMarginHelpers:
    """Test margin arithmetic"""

    def test_difference_of_infinities(self):
        assert checks.difference(math.inf, math.inf) == 0.0
        assert checks.difference(2.0, 0.5) == 1.5

    def test_relative_margin_scales(self):
        assert checks.relative_margin(3.0, 1.0) == pytest.approx(2.0 / 3.0)
        assert checks.relative_margin(0.2, 0.1) == pytest.approx(0.1)

    def test_relative_margin_infinite(self):
        assert checks.relative_margin(math.inf, 1.0) == math.inf
        assert checks.relative_margin(1.0, math.inf) == -math.inf


class TestStrongMonotonicity:
    """Test C(rho) >= sum p_n C(rho_n)"""

    def test_identity_channel_is_tight(self, random_states):
        record = checks.check_strong_monotonicity(CoherenceKind.TSALLIS, random_states[1], identity_channel(3), 0.5)
        assert record.passed
        assert abs(record.margin) <= 1e-9

    def test_dephasing_channel_leaves_nothing(self, plus_state):
        record = checks.check_strong_monotonicity(CoherenceKind.TSALLIS, plus_state, dephasing_channel(2), 2.0)
        assert record.rhs == pytest.approx(0.0, abs=1e-12)
        assert record.margin == pytest.approx(math.sqrt(2.0) - 1.0)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8, 1.0, 1.2, 1.6, 2.0])
    def test_random_incoherent_channels_pass(self, rng, random_states, alpha):
        for rho in random_states:
            channel = random_incoherent_channel(rho.dim, 3, rng)
            record = checks.check_strong_monotonicity(CoherenceKind.TSALLIS, rho, channel, alpha)
            assert record.passed, record

    @pytest.mark.parametrize("kind", [CoherenceKind.RELATIVE_ENTROPY, CoherenceKind.L1])
    def test_alpha_free_kinds(self, rng, random_states, kind):
        for rho in random_states:
            record = checks.check_strong_monotonicity(kind, rho, random_incoherent_channel(rho.dim, 2, rng))
            assert record.passed, record
            assert record.alpha is None

    def test_rejects_coherent_channel(self, plus_state):
        with pytest.raises(NotIncoherentChannelError):
            checks.check_strong_monotonicity(CoherenceKind.TSALLIS, plus_state, unitary_channel(HADAMARD), 0.5)

    def test_monotonicity(self, rng, random_states):
        for rho in random_states:
            channel = random_incoherent_channel(rho.dim, 2, rng)
            assert checks.check_monotonicity(CoherenceKind.TSALLIS, rho, channel, 1.5).passed


class TestConvexity:
    """Test sum q_i C(sigma_i) >= C(sum q_i sigma_i)"""

    def test_singleton_is_tight(self, plus_state):
        record = checks.check_convexity(CoherenceKind.TSALLIS, [(1.0, plus_state)], 0.5)
        assert record.margin == pytest.approx(0.0, abs=1e-12)

    def test_random_ensembles_pass(self, random_states):
        qutrits = [rho for rho in random_states if rho.dim == 3]
        for alpha in (0.3, 1.7):
            ensemble = list(zip([0.2, 0.3, 0.5], qutrits[:3]))
            assert checks.check_convexity(CoherenceKind.TSALLIS, ensemble, alpha).passed

    def test_bad_weights(self, plus_state):
        with pytest.raises(BadWeightsError):
            checks.check_convexity(CoherenceKind.TSALLIS, [(0.6, plus_state), (0.6, plus_state)], 0.5)
        with pytest.raises(BadWeightsError):
            checks.check_convexity(CoherenceKind.TSALLIS, [], 0.5)


class TestLemma1:
    """Test the sub-selective contraction of f_alpha"""

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.3, 2.0])
    def test_random_channels_pass(self, rng, alpha):
        for d in (2, 3):
            rho = random_density(d, d, rng)
            sigma = random_density(d, d, rng)
            record = checks.check_lemma1(rho, sigma, random_channel(d, 3, rng), alpha)
            assert record.passed, record
            assert not record.degenerate

    def test_identity_is_tight(self, random_states):
        rho, sigma = random_states[0], random_states[3]
        record = checks.check_lemma1(rho, sigma, identity_channel(2), 0.5)
        assert abs(record.margin) <= 1e-9

    def test_disjoint_supports_are_degenerate(self):
        rho = ProbabilityVector([1.0, 0.0]).embed()
        sigma = ProbabilityVector([0.0, 1.0]).embed()
        record = checks.check_lemma1(rho, sigma, dephasing_channel(2), 1.5)
        assert record.degenerate
        assert record.passed

    def test_disjoint_supports_below_one(self):
        rho = ProbabilityVector([1.0, 0.0]).embed()
        sigma = ProbabilityVector([0.0, 1.0]).embed()
        record = checks.check_lemma1(rho, sigma, dephasing_channel(2), 0.5)
        assert record.passed
        assert not record.degenerate

    def test_rejects_alpha_one(self, plus_state):
        with pytest.raises(InvalidAlphaError):
            checks.check_lemma1(plus_state, plus_state, identity_channel(2), 1.0)


class TestHolderStep:
    """Test the Hoelder inequality on sub-selected outcomes"""

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.3, 2.0])
    def test_random_channels_pass(self, rng, random_states, alpha):
        for rho in random_states:
            record = checks.check_holder_step(rho, random_incoherent_channel(rho.dim, 3, rng), alpha)
            assert record.passed, record

    def test_single_kraus_is_tight(self, random_states):
        record = checks.check_holder_step(random_states[3], unitary_channel(SWAP), 1.5)
        assert abs(record.margin) <= 1e-9

    def test_rejects_coherent_channel(self, plus_state):
        with pytest.raises(NotIncoherentChannelError):
            checks.check_holder_step(plus_state, unitary_channel(HADAMARD), 0.5)


class TestObservations:
    """Test the five structural properties of f_alpha"""

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.3, 2.0])
    def test_random_draws_pass(self, rng, alpha):
        for d in (2, 3):
            rho = random_density(d, d, rng)
            sigma = random_density(d, d, rng)
            records = checks.check_observations(
                rho, sigma, random_channel(d, 2, rng), haar_unitary(d, rng), random_incoherent(2, rng), alpha,
            )
            assert [r.check_name for r in records] == [f"observation_{n}" for n in range(1, 6)]
            assert all(r.passed for r in records), records

    def test_equality_cases(self, random_states):
        rho = random_states[3]
        records = checks.check_observations(
            rho, rho, identity_channel(2), np.eye(2), ProbabilityVector([1.0]), 1.5,
        )
        assert records[0].margin == pytest.approx(0.0, abs=1e-12)
        assert records[1].margin == pytest.approx(0.0, abs=1e-12)


class TestBoundsAndIdentities:
    """Test ceilings, null values and special orders"""

    def test_upper_bound_attained(self):
        record = checks.check_upper_bound(CoherenceKind.TSALLIS, maximally_coherent(3), 0.5)
        assert record.passed
        assert record.margin == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("kind", list(CoherenceKind))
    def test_null(self, kind):
        record = checks.check_null(kind, ProbabilityVector([0.2, 0.5, 0.3]), 1.5)
        assert record.passed

    def test_null_positive_on_random_states(self):
        """Every state with l1 coherence >= 1e-3 has C_alpha > 1e-6"""
        grid = (0.3, 0.5, 1.0, 1.5, 2.0)
        checked = 0
        for index in range(1000):
            stream = derive_stream(606, index)
            d = 2 + index % 2
            rho = random_density(d, 1 + index % d, stream)
            record = checks.check_null_positive(CoherenceKind.TSALLIS, rho, grid[index % len(grid)])
            if record.degenerate:
                continue
            checked += 1
            assert record.passed, record
            assert record.lhs > checks.NULL_POSITIVE_FLOOR
        assert checked > 900

    def test_null_positive_degenerate_on_incoherent(self, diagonal_state):
        record = checks.check_null_positive(CoherenceKind.TSALLIS, diagonal_state, 2.0)
        assert record.degenerate
        assert record.passed

    def test_null_positive_on_weak_coherence(self):
        rho = DensityMatrix(np.array([[0.5, 0.01], [0.01, 0.5]]))
        record = checks.check_null_positive(CoherenceKind.TSALLIS, rho, 2.0)
        assert not record.degenerate
        assert record.passed

    def test_identity_tolerances(self):
        assert checks.C2_IDENTITY_TOL == 1e-12
        assert checks.HALF_ORDER_TOL == 1e-10

    def test_c2_identity(self, random_states):
        for rho in random_states:
            record = checks.check_c2_identity(rho)
            assert record.passed
            assert abs(record.margin) <= 1e-12

    def test_half_order_identities(self, random_states):
        for rho in random_states:
            records = checks.check_half_order_identities(rho)
            assert [r.check_name for r in records] == ["half_order_skew", "half_order_displayed", "half_order_l2"]
            assert all(r.passed for r in records), records
            assert records[1].lhs == pytest.approx(2.0)

    def test_displayed_ratio_degenerate_on_incoherent(self, diagonal_state):
        records = checks.check_half_order_identities(diagonal_state)
        assert records[1].degenerate

    def test_alpha_one_continuity(self, smooth_states):
        for rho in smooth_states:
            record = checks.check_alpha_one_continuity(rho)
            assert record.passed
            assert record.alpha is None
