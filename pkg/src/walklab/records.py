"""Result records and their output formats."""

from __future__ import annotations

import csv
import sys
from collections.abc import Mapping, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from walklab import __version__

__all__ = ["ResultRecord", "write_record", "write_sequence_csv"]


class ResultRecord(BaseModel):
    """One run of a command: its configuration, outputs and provenance.

    Re-running an identical configuration yields an identical ``outputs``
    section; only the provenance fields (timing, cache status) differ.
    """

    command: str
    """Subcommand name, such as ``growth``."""

    config: dict[str, Any]
    """Echo of the run configuration."""

    config_hash: str
    """SHA-256 of the canonical configuration (the cache key)."""

    outputs: dict[str, Any]
    """Command outputs in JSON form. Numbers carry units in their models."""

    status: str = "ok"
    """``ok``, or ``partial`` when a budget stopped the computation."""

    error: str | None = None
    """Message of the error that stopped a partial run."""

    version: str = __version__
    """Walklab version that produced the outputs."""

    created: datetime = Field(default_factory=lambda: datetime.now(tz=timezone.utc))
    """When the run finished."""

    wall_clock: float = 0.0
    """Run time in seconds."""

    cached: bool = False
    """Whether the record was served from the cache."""

    def to_line(self) -> str:
        """The record as one line of newline-delimited JSON."""
        return self.model_dump_json() + "\n"


def write_record(record: ResultRecord, out: Path | None = None) -> None:
    """Append a record to an NDJSON file, or print it to standard output."""
    if out is None:
        sys.stdout.write(record.to_line())
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("a") as f:
        f.write(record.to_line())


def write_sequence_csv(
    path: Path, columns: Mapping[str, Sequence[float | int]]
) -> None:
    """Write equal-length sequences as CSV columns, preceded by ``n``
    (starting at 1).
    """
    lengths = {len(values) for values in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"Columns of {path} differ in length: {lengths}.")
    rows = zip(*columns.values(), strict=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["n", *columns])
        for n, row in enumerate(rows, 1):
            writer.writerow([n, *row])
