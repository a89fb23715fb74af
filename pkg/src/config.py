"""
Configuration settings for the coherence toolkit
"""
import os
from dotenv import load_dotenv

load_dotenv()


def _floats(value: str):
    return tuple(float(item) for item in value.split(",") if item.strip())


def _ints(value: str):
    return tuple(int(item) for item in value.split(",") if item.strip())


class Config:
    """Base configuration"""

    # Application
    APP_NAME = "Tsallis Coherence Toolkit"
    LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")

    # Reproducibility
    COHERENCE_SEED = int(os.getenv("COHERENCE_SEED", "20240601"))
    COHERENCE_TOLERANCE = float(os.getenv("COHERENCE_TOLERANCE", "1e-9"))

    # Verification suite
    COHERENCE_TRIALS = int(os.getenv("COHERENCE_TRIALS", "200"))
    COHERENCE_WORKERS = int(os.getenv("COHERENCE_WORKERS", "1"))
    DEFAULT_DIMS = _ints(os.getenv("DEFAULT_DIMS", "2,3,4"))
    DEFAULT_ALPHAS = _floats(os.getenv("DEFAULT_ALPHAS", "0.1,0.3,0.5,0.7,0.9,1.0,1.1,1.3,1.5,2.0"))
    N_KRAUS_RANGE = (1, 4)
    RANK_POLICY = os.getenv("RANK_POLICY", "mixed-ranks")

    # Violation search
    SEARCH_DIM = int(os.getenv("SEARCH_DIM", "3"))
    SEARCH_ALPHAS = (0.3, 0.5, 1.5, 2.0)
    SEARCH_TRIALS = int(os.getenv("SEARCH_TRIALS", "100000"))
    SEARCH_REFINE_STEPS = 200

    # Grid oracle, per dimension
    ORACLE_RESOLUTION = {2: 1e-4, 3: 2e-3}
    ORACLE_BOUND = {2: 2e-3, 3: 2e-2}
    ORACLE_STATES = int(os.getenv("ORACLE_STATES", "200"))


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")


class TestingConfig(Config):
    """Testing configuration"""
    COHERENCE_SEED = 12345
    COHERENCE_TRIALS = 3
    COHERENCE_WORKERS = 1
    DEFAULT_DIMS = (2, 3)
    DEFAULT_ALPHAS = (0.5, 1.0, 1.5)
    SEARCH_TRIALS = 200
    SEARCH_REFINE_STEPS = 20
    ORACLE_RESOLUTION = {2: 1e-3, 3: 1e-2}
    ORACLE_STATES = 3


class AcceptanceConfig(Config):
    """Acceptance-run sizes"""
    COHERENCE_TRIALS = 10_000
    DEFAULT_ALPHAS = (0.1, 0.25, 0.5, 0.75, 0.9, 1.1, 1.5, 2.0)
    SEARCH_DIM = 3
    SEARCH_TRIALS = 1_000_000


config = {
    "development": DevelopmentConfig,
    "testing": TestingConfig,
    "acceptance": AcceptanceConfig,
    "default": Config,
}
