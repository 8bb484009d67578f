"""Execution traces: an ordered, replayable event log of an algorithm run.

Events are plain dicts with a ``"kind"`` key.  Kinds and fields:

* ``attempt``: a fresh pass begins (the state resets to all-unmatched).
  Fields: ``index`` (0-based attempt counter), ``pi`` (1-based positions
  into the id-sorted sibling-family list), ``families`` (the same order
  as family ids).
* ``insert``: a sibling family starts its iteration.  Fields: ``family``,
  ``position`` (0-based position within the current order).
* ``reject``: a proposed tuple was refused.  Fields: ``family``,
  ``tuple_index``, ``daycare`` (first refusing), ``children`` (refused).
* ``place``: a family's tuple was accepted.  Fields: ``family``,
  ``tuple_index``, ``placed`` (child -> daycare, dummy included),
  ``evicted`` (list of ``[child, daycare, displacer]`` in eviction order).
* ``exhausted``: preference list ran out; the family rests unmatched.
  Fields: ``family``.
* ``restart``: a sibling family was displaced and a new order is tried.
  Fields: ``inserting``, ``displaced``, ``new_pi`` (1-based).
* ``repeat``: the new order was already attempted (terminal).  Fields as
  ``restart``.
* ``improvement``: the just-processed family could still upgrade via a
  seat transfer (terminal).  Fields: ``family``, ``tuple_index``.
* ``clash``: sequential-couples failure (terminal).  Fields: ``family``,
  ``child``, ``daycare``, ``reason``.
* ``success``: the run produced a matching (terminal).

Replaying the ``place`` events of the final attempt onto the all-unmatched
assignment reproduces the final matching exactly; :func:`replay_trace`
implements that and is property-tested against every algorithm.
"""

from __future__ import annotations

import json
from typing import Iterator

from sibmatch.model import DUMMY_ID, Instance, Matching

__all__ = ["ExecutionTrace", "replay_trace"]

TERMINAL_KINDS = ("repeat", "improvement", "clash", "success")


class ExecutionTrace:
    """Append-only event log; see the module docstring for the format."""

    def __init__(self, events: list[dict] | None = None):
        self.events: list[dict] = list(events) if events else []

    def append(self, kind: str, **fields) -> dict:
        event = {"kind": kind, **fields}
        self.events.append(event)
        return event

    def __iter__(self) -> Iterator[dict]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    @property
    def pi_history(self) -> list[tuple[int, ...]]:
        """Attempted orders over the sibling families, 1-based, in order."""
        return [tuple(e["pi"]) for e in self.events if e["kind"] == "attempt"]

    @property
    def terminal(self) -> dict | None:
        """The terminal event, if the run has ended."""
        for event in reversed(self.events):
            if event["kind"] in TERMINAL_KINDS:
                return event
        return None

    def attempts(self) -> list[list[dict]]:
        """Events grouped per attempt (the leading ``attempt`` included)."""
        groups: list[list[dict]] = []
        for event in self.events:
            if event["kind"] == "attempt":
                groups.append([])
            if groups:
                groups[-1].append(event)
        return groups

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True) for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> "ExecutionTrace":
        lines = [line for line in text.splitlines() if line.strip()]
        return cls([json.loads(line) for line in lines])


def replay_trace(instance: Instance, trace: ExecutionTrace) -> Matching:
    """Apply the event log to the all-unmatched assignment.

    Each ``attempt`` event resets the state; ``place`` events move the
    family's children and push the evicted back to the dummy.  The result
    equals the matching the traced run produced (for successful runs).
    """
    assign = {child: DUMMY_ID for child, _ in instance.children}
    for event in trace:
        kind = event["kind"]
        if kind == "attempt":
            assign = {child: DUMMY_ID for child, _ in instance.children}
        elif kind == "place":
            for child, _, _ in event["evicted"]:
                assign[child] = DUMMY_ID
            for child, d in event["placed"].items():
                assign[child] = d
    return Matching(instance, assign)
