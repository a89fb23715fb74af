"""
File storage for states, channels, suite configs and witnesses
"""
from src.storage.files import (
    load_state,
    save_state,
    load_channel,
    save_channel,
    load_trial_config,
    load_trial_overrides,
    save_witness,
    load_witness,
)

__all__ = [
    'load_state',
    'save_state',
    'load_channel',
    'save_channel',
    'load_trial_config',
    'load_trial_overrides',
    'save_witness',
    'load_witness',
]
