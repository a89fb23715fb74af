"""
Initialize observers package
"""
from src.observers.record_observer import (
    RecordObserver,
    LogReporter,
    CsvReporter,
    JsonReporter,
    RecordPublisher,
)

__all__ = [
    'RecordObserver',
    'LogReporter',
    'CsvReporter',
    'JsonReporter',
    'RecordPublisher',
]
