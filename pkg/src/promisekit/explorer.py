"""Exhaustive exploration of the negotiation state space.

Terms are finite and every transition consumes one action, so the
transition system of any configuration is a finite DAG. The explorer
builds it breadth-first, enumerates the maximal traces (event sequences
ending in a configuration with no outgoing transitions), verifies
externally supplied traces, and checks the state invariants over every
reachable node. All outputs are deterministically ordered so repeated
runs are byte-identical.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .process_algebra import (
    Configuration,
    Event,
    can_terminate,
    step,
)
from .promise_state import (
    PromiseModel,
    State,
    exclusiveness_breaches,
)
from .task_algebra import incompatible

__all__ = [
    "Lts",
    "Outcome",
    "Trace",
    "Accepted",
    "Rejected",
    "Violation",
    "LimitExceeded",
    "build_lts",
    "maximal_traces",
    "verify_trace",
    "check_invariants",
    "find_deadlocks",
    "DEFAULT_NODE_LIMIT",
    "DEFAULT_TRACE_LIMIT",
]

DEFAULT_NODE_LIMIT = 100_000
DEFAULT_TRACE_LIMIT = 10_000


class LimitExceeded(Exception):
    """Exploration hit a resource cap; ``partial`` holds what was built."""

    def __init__(self, what: str, limit: int, partial=None):
        super().__init__(f"{what} limit of {limit} exceeded")
        self.what = what
        self.limit = limit
        self.partial = partial


def _config_key(config: Configuration) -> tuple[str, str]:
    return (str(config.term), str(config.state))


class Lts:
    """A fully explored transition system.

    ``nodes`` are in breadth-first discovery order; per-node outgoing
    transitions are sorted by rendered event, then successor.
    """

    def __init__(
        self,
        initial: Configuration,
        nodes: tuple[Configuration, ...],
        edges: tuple[tuple[Configuration, Event, Configuration], ...],
    ):
        self.initial = initial
        self.nodes = nodes
        self.edges = edges
        self._outgoing: dict[Configuration, list[tuple[Event, Configuration]]] = {
            node: [] for node in nodes
        }
        for source, event, target in edges:
            self._outgoing[source].append((event, target))

    def outgoing(self, config: Configuration) -> list[tuple[Event, Configuration]]:
        return self._outgoing[config]

    def terminal_nodes(self) -> list[Configuration]:
        return [node for node in self.nodes if not self._outgoing[node]]


def build_lts(
    model: PromiseModel,
    initial: Configuration,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> Lts:
    """Breadth-first closure of ``step`` starting from ``initial``.

    Configurations are deduplicated structurally. Raises LimitExceeded
    (with the partial system attached) when more than ``node_limit``
    configurations are reachable.
    """
    if node_limit <= 0:
        raise ValueError("node_limit must be positive")
    seen = {initial}
    order = [initial]
    edges: list[tuple[Configuration, Event, Configuration]] = []
    queue = deque([initial])
    truncated = False
    while queue:
        config = queue.popleft()
        transitions = sorted(
            step(model, config), key=lambda tr: (str(tr[0]), _config_key(tr[1]))
        )
        for event, successor in transitions:
            edges.append((config, event, successor))
            if successor not in seen:
                if len(seen) >= node_limit:
                    truncated = True
                    continue
                seen.add(successor)
                order.append(successor)
                queue.append(successor)
    if truncated:
        raise LimitExceeded(
            "node", node_limit, partial=Lts(initial, tuple(order), tuple(edges))
        )
    return Lts(initial, tuple(order), tuple(edges))


class Outcome(enum.Enum):
    SUCCESSFUL = "successful"
    DEADLOCKED = "deadlocked"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Trace:
    """A maximal run: its events in order, and how it ended."""

    events: tuple[Event, ...]
    outcome: Outcome

    def __str__(self) -> str:
        return "\n".join(str(event) for event in self.events)


def _final_outcome(config: Configuration) -> Outcome:
    return Outcome.SUCCESSFUL if can_terminate(config.term) else Outcome.DEADLOCKED


def maximal_traces(lts: Lts, max_traces: int = DEFAULT_TRACE_LIMIT) -> list[Trace]:
    """Every event sequence from the initial node to a terminal node.

    Distinct paths yielding the same (events, outcome) pair collapse to
    one trace. The result is sorted by rendered events, then outcome.
    """
    collected: set[tuple[tuple[str, ...], Trace]] = set()

    def walk(config: Configuration, prefix: tuple[Event, ...]) -> None:
        transitions = lts.outgoing(config)
        if not transitions:
            trace = Trace(prefix, _final_outcome(config))
            collected.add((tuple(str(e) for e in prefix), trace))
            if len(collected) > max_traces:
                raise LimitExceeded(
                    "trace", max_traces, partial=[t for _, t in sorted(collected, key=_trace_key)]
                )
            return
        for event, successor in transitions:
            walk(successor, prefix + (event,))

    def _trace_key(item: tuple[tuple[str, ...], Trace]):
        return (item[0], item[1].outcome.value)

    walk(lts.initial, ())
    return [trace for _, trace in sorted(collected, key=_trace_key)]


@dataclass(frozen=True)
class Accepted:
    """Trace verdict: every event labelled an available transition."""

    final_state: State
    maximal: bool
    outcome: Outcome | None  # None when the trace can still be extended

    @property
    def accepted(self) -> bool:
        return True


@dataclass(frozen=True)
class Rejected:
    """Trace verdict: mismatch at ``index``; ``available`` lists the
    events that were enabled there instead."""

    index: int
    available: tuple[Event, ...]
    state: State

    @property
    def accepted(self) -> bool:
        return False


def verify_trace(
    model: PromiseModel,
    initial: Configuration,
    events: tuple[Event, ...] | list[Event],
) -> Accepted | Rejected:
    """Replay an event sequence against the step semantics.

    The same event may label transitions into different terms, so the
    replay tracks every configuration the prefix can reach; the promise
    state is identical across them because it is a function of the events.
    """
    current: set[Configuration] = {initial}
    for index, wanted in enumerate(events):
        available: set[Event] = set()
        successors: set[Configuration] = set()
        for config in current:
            for event, successor in step(model, config):
                available.add(event)
                if event == wanted:
                    successors.add(successor)
        if not successors:
            state = next(iter(current)).state
            return Rejected(
                index=index,
                available=tuple(sorted(available, key=str)),
                state=state,
            )
        current = successors

    final_state = next(iter(current)).state
    terminal = [config for config in current if not step(model, config)]
    if not terminal:
        return Accepted(final_state=final_state, maximal=False, outcome=None)
    if any(can_terminate(config.term) for config in terminal):
        outcome = Outcome.SUCCESSFUL
    else:
        outcome = Outcome.DEADLOCKED
    return Accepted(final_state=final_state, maximal=True, outcome=outcome)


@dataclass(frozen=True)
class Violation:
    """A reachable state breaking an invariant; ``kind`` is 'conflict' or
    'exclusiveness'."""

    kind: str
    config: Configuration
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail} in state {self.config.state}"


def check_invariants(model: PromiseModel, lts: Lts) -> list[Violation]:
    """Check every reachable state for dyadic conflicts and for exclusive
    bodies promised to more than one counterparty. Expected empty for any
    system reached through enabled speech acts."""
    violations: list[Violation] = []
    for node in lts.nodes:
        promises = sorted(node.state, key=str)
        for i, p in enumerate(promises):
            for q in promises[i + 1 :]:
                if (
                    p.promiser == q.promiser
                    and p.promisee == q.promisee
                    and incompatible(model.incompatibility, p.body, q.body)
                ):
                    violations.append(
                        Violation("conflict", node, f"{p} conflicts with {q}")
                    )
        for promiser, body in exclusiveness_breaches(model, node.state):
            violations.append(
                Violation(
                    "exclusiveness",
                    node,
                    f"{promiser} promises exclusive {body} to several agents",
                )
            )
    return violations


def find_deadlocks(lts: Lts) -> list[Configuration]:
    """Terminal configurations that cannot terminate successfully."""
    return [
        node
        for node in lts.terminal_nodes()
        if not can_terminate(node.term)
    ]
