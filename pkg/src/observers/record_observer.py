"""
Observer Pattern Implementation for record reporting
Suite runs and measure commands publish flat rows; reporters render them
to the log, to CSV or to a versioned JSON document.
"""
import csv
import json
import logging
import math
from abc import ABC, abstractmethod
from typing import List, Sequence, TextIO

from src.models.records import SCHEMA_VERSION

logger = logging.getLogger(__name__)


class RecordObserver(ABC):
    """
    Abstract Observer class
    All concrete reporters must implement the update method
    """

    @abstractmethod
    def update(self, row: dict):
        """
        Called for every published row

        Args:
            row: Flat record (TrialRecord.to_dict() or OutputRecord.to_dict())
        """
        pass

    def close(self):
        """Flush pending output once the run is over"""
        pass


class LogReporter(RecordObserver):
    """
    Concrete Observer - logs failed and degenerate trial records
    """

    def __init__(self):
        self.failures = 0

    def update(self, row: dict):
        if row.get("degenerate"):
            logger.warning(f"[DEGENERATE] {row.get('check_name')} d={row.get('dim')} alpha={row.get('alpha')} "
                           f"trial={row.get('trial')}")
        elif row.get("passed") is False:
            self.failures += 1
            logger.warning(f"[FAIL] {row.get('check_name')} d={row.get('dim')} alpha={row.get('alpha')} "
                           f"kind={row.get('kind')} margin={row.get('margin'):.3e} trial={row.get('trial')}")
        else:
            logger.debug(f"Record: {row}")


class CsvReporter(RecordObserver):
    """
    Concrete Observer - writes rows under a fixed header
    """

    def __init__(self, stream: TextIO, columns: Sequence[str]):
        self._writer = csv.DictWriter(stream, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        self._writer.writeheader()
        self._stream = stream

    def update(self, row: dict):
        self._writer.writerow({key: _csv_cell(value) for key, value in row.items()})

    def close(self):
        self._stream.flush()


class JsonReporter(RecordObserver):
    """
    Concrete Observer - collects rows into {"schema": 1, "kind": ..., "rows": [...]}
    written on close
    """

    def __init__(self, stream: TextIO, kind: str):
        self._stream = stream
        self._kind = kind
        self.rows: List[dict] = []

    def update(self, row: dict):
        self.rows.append({key: _json_cell(value) for key, value in row.items()})

    def close(self):
        document = {"schema": SCHEMA_VERSION, "kind": self._kind, "rows": self.rows}
        json.dump(document, self._stream, indent=2, allow_nan=False)
        self._stream.write("\n")
        self._stream.flush()


def _json_cell(value):
    """Non-finite floats become "inf", "-inf" or "nan", the same text the CSV rows carry"""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


class RecordPublisher:
    """
    Subject class that manages reporters and fans rows out to them
    """

    def __init__(self):
        self._observers: List[RecordObserver] = []

    def attach(self, observer: RecordObserver):
        """
        Attach a reporter

        Args:
            observer: RecordObserver instance to attach
        """
        if observer not in self._observers:
            self._observers.append(observer)
            logger.debug(f"Attached observer: {observer.__class__.__name__}")

    def detach(self, observer: RecordObserver):
        """
        Detach a reporter

        Args:
            observer: RecordObserver instance to detach
        """
        if observer in self._observers:
            self._observers.remove(observer)
            logger.debug(f"Detached observer: {observer.__class__.__name__}")

    def notify(self, row: dict) -> int:
        """
        Send one row to every attached reporter

        A failing reporter is logged and skipped; the others still receive the row.

        Returns:
            Number of reporters that accepted the row
        """
        delivered = 0
        for observer in self._observers:
            try:
                observer.update(row)
                delivered += 1
            except Exception as e:
                logger.error(f"Error publishing record via {observer.__class__.__name__}: {str(e)}")
        return delivered

    def close(self):
        for observer in self._observers:
            try:
                observer.close()
            except Exception as e:
                logger.error(f"Error closing {observer.__class__.__name__}: {str(e)}")

    def get_observer_count(self) -> int:
        """Get the number of attached observers"""
        return len(self._observers)
