"""Run output: per-step readings, coincidence tabulation, and file export."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import DELTA_T


@dataclass
class RunRecords:
    """Columnar per-step readings of every meter and detector in a run."""

    num_steps: int
    meter_labels: list
    detector_labels: list
    powers: np.ndarray  # (num_steps, n_meters) float64, quantized watts
    clicks: np.ndarray  # (num_steps, n_detectors) uint8

    @classmethod
    def empty(cls, num_steps: int, meter_labels, detector_labels) -> "RunRecords":
        return cls(
            num_steps=num_steps,
            meter_labels=list(meter_labels),
            detector_labels=list(detector_labels),
            powers=np.zeros((num_steps, len(meter_labels))),
            clicks=np.zeros((num_steps, len(detector_labels)), dtype=np.uint8),
        )

    def power(self, label: str) -> np.ndarray:
        return self.powers[:, self.meter_labels.index(label)]

    def click(self, label: str) -> np.ndarray:
        return self.clicks[:, self.detector_labels.index(label)]

    def totals(self) -> dict:
        return {
            label: int(self.clicks[:, i].sum())
            for i, label in enumerate(self.detector_labels)
        }


@dataclass
class CoincidenceTable:
    """Counts of each exclusive click pattern over a run.

    ``counts[p]`` is the number of steps whose click pattern, read as a bit
    mask over ``detector_labels``, equals ``p``.  Patterns are mutually
    exclusive per step, so the counts sum to the number of steps.
    """

    detector_labels: list
    counts: np.ndarray  # (2**n,) int64
    num_steps: int = field(default=0)

    def count(self, *labels: str) -> int:
        """Count of the exclusive pattern where exactly these detectors click."""

        mask = 0
        for label in labels:
            mask |= 1 << self.detector_labels.index(label)
        return int(self.counts[mask])

    def pattern_items(self):
        """(labels tuple, count) for every pattern with a nonzero count."""

        for mask in range(len(self.counts)):
            if self.counts[mask]:
                labels = tuple(
                    label
                    for i, label in enumerate(self.detector_labels)
                    if mask >> i & 1
                )
                yield labels, int(self.counts[mask])

    def to_dict(self) -> dict:
        return {
            "+".join(labels) if labels else "none": count
            for labels, count in self.pattern_items()
        }


def tabulate(records: RunRecords) -> CoincidenceTable:
    """Fold per-step click bits into exclusive-pattern counts."""

    n = len(records.detector_labels)
    if n > 16:
        raise ValueError("coincidence tabulation supports at most 16 detectors")
    if records.num_steps == 0:
        raise ValueError("cannot tabulate an empty run")
    weights = (1 << np.arange(n)).astype(np.int64)
    masks = records.clicks.astype(np.int64) @ weights
    counts = np.bincount(masks, minlength=1 << n)
    return CoincidenceTable(list(records.detector_labels), counts, records.num_steps)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def write_csv(records: RunRecords, path) -> None:
    """Per-step CSV: step, time_s, one power column per meter (9 decimals,
    i.e. 1 nW resolution) and one 0/1 column per detector."""

    path = Path(path)
    header = ["step", "time_s"]
    header += [f"pm_{label}_W" for label in records.meter_labels]
    header += [f"det_{label}" for label in records.detector_labels]
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for t in range(records.num_steps):
                row = [str(t), f"{t * DELTA_T:.6e}"]
                row += [f"{p:.9f}" for p in records.powers[t]]
                row += [str(int(c)) for c in records.clicks[t]]
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing records to {path}: {exc}") from exc


def read_csv(path) -> RunRecords:
    """Inverse of :func:`write_csv`; lossless at 1 nW / click-bit resolution."""

    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        meter_labels = [c[3:-2] for c in header if c.startswith("pm_") and c.endswith("_W")]
        detector_labels = [c[4:] for c in header if c.startswith("det_")]
        rows = [line.strip().split(",") for line in fh if line.strip()]
    n_m = len(meter_labels)
    records = RunRecords.empty(len(rows), meter_labels, detector_labels)
    for t, row in enumerate(rows):
        records.powers[t] = [float(v) for v in row[2 : 2 + n_m]]
        records.clicks[t] = [int(v) for v in row[2 + n_m :]]
    return records


def write_summary(table: CoincidenceTable, metadata: dict, path) -> None:
    """Key-value run summary plus the full coincidence pattern table."""

    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            for key, value in metadata.items():
                fh.write(f"{key} = {value}\n")
            fh.write(f"num_steps = {table.num_steps}\n")
            totals = _totals_from_table(table)
            for label in table.detector_labels:
                fh.write(f"detector_{label}_total = {totals[label]}\n")
            fh.write("[coincidence_patterns]\n")
            for labels, count in table.pattern_items():
                name = "+".join(labels) if labels else "none"
                fh.write(f"{name} = {count}\n")
    except OSError as exc:
        raise OSError(f"failed writing summary to {path}: {exc}") from exc


def _totals_from_table(table: CoincidenceTable) -> dict:
    totals = {label: 0 for label in table.detector_labels}
    for labels, count in table.pattern_items():
        for label in labels:
            totals[label] += count
    return totals
