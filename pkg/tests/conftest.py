"""
Shared fixtures for the test suite
Run with: pytest tests/ -v
"""
import json

import numpy as np
import pytest
from click.testing import CliRunner

from src.app import create_cli
from src.models import DensityMatrix, ProbabilityVector
from src.services.search_service import search_rastegin_violation
from src.services.states import maximally_coherent, random_density
from src.utils.rng import derive_stream


@pytest.fixture
def rng():
    """Deterministic generator for one test"""
    return derive_stream(2024, 7)


@pytest.fixture
def plus_state():
    """Maximally coherent qubit |+><+|"""
    return maximally_coherent(2)


@pytest.fixture
def diagonal_state():
    """Incoherent qutrit"""
    return ProbabilityVector([0.5, 0.3, 0.2]).embed()


@pytest.fixture
def random_states():
    """Full-rank and rank-deficient random states of dims 2..4"""
    states = []
    for index in range(12):
        stream = derive_stream(99, index)
        d = 2 + index % 3
        states.append(random_density(d, 1 + index % d, stream))
    return states


@pytest.fixture
def smooth_states():
    """Random states mixed with the maximally mixed state (eigenvalues >= 1/(2d))"""
    states = []
    for index in range(6):
        d = 2 + index % 2
        rho = random_density(d, d, derive_stream(7, index))
        states.append(DensityMatrix.from_operator(0.5 * rho.matrix + 0.5 * np.eye(d) / d))
    return states


@pytest.fixture
def cli():
    """CLI built with the testing configuration"""
    return create_cli('testing')


@pytest.fixture
def runner():
    """Click test runner"""
    return CliRunner()


@pytest.fixture
def write_state(tmp_path):
    """Write a DensityMatrix to a state file and return its path"""
    def _write(state: DensityMatrix, name: str = "state.json"):
        path = tmp_path / name
        path.write_text(json.dumps(state.to_dict()))
        return str(path)
    return _write


WITNESS_SEED = 20240601


@pytest.fixture(scope="session")
def qutrit_witness():
    """Rastegin violation found by the qutrit search at WITNESS_SEED"""
    return search_rastegin_violation(3, 1000, master_seed=WITNESS_SEED)
