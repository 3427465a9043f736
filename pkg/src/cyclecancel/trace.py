"""JSON-lines trace events.

Each line is one object with a ``schema`` version, an ``event`` name and
event-specific fields. Keys are sorted so identical runs give identical bytes.
"""

from __future__ import annotations

import json
from typing import IO

SCHEMA_VERSION = 1

EVENTS = (
    "column-entered",
    "path-underlined",
    "path-italicized",
    "cycle-found",
    "block-snapshot",
    "fold-fallback",
    "phase1-start",
    "phase1-trial",
    "phase1-apply",
    "phase2-apply",
    "phase2-oracle-fallback",
    "phase3-tour",
    "phase3-bound",
    "phase3-certificate",
)


class Trace:
    """Collects events in memory and optionally streams them to a text file."""

    def __init__(self, stream: IO[str] | None = None, snapshots: bool = False):
        self.stream = stream
        self.snapshots = snapshots
        self.events: list[dict] = []

    def emit(self, event: str, **fields) -> None:
        if event not in EVENTS:
            raise ValueError(f"unknown trace event {event!r}")
        rec = {"schema": SCHEMA_VERSION, "event": event, **fields}
        self.events.append(rec)
        if self.stream is not None:
            self.stream.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")

    def of(self, event: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event]


class NullTrace(Trace):
    """Discards everything; the default when no trace is requested."""

    def __init__(self):
        super().__init__(None, False)

    def emit(self, event: str, **fields) -> None:
        return None


NULL = NullTrace()
