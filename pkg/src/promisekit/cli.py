"""Command-line front end.

    promise check FILE       validate a scenario and re-verify the algebra laws
    promise explore FILE     build the full state space, list traces/deadlocks
    promise run FILE         one seeded random walk to a terminal configuration
    promise verify-trace FILE --trace TRACEFILE   replay a trace file

Reports go to stdout, diagnostics to stderr. Exit codes: 0 success,
1 semantic failure, 2 resource limit, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from .dsl import ParseError, Scenario, ValidationError, parse_scenario, parse_trace
from .explorer import (
    DEFAULT_NODE_LIMIT,
    DEFAULT_TRACE_LIMIT,
    Accepted,
    LimitExceeded,
    Outcome,
    build_lts,
    check_invariants,
    find_deadlocks,
    maximal_traces,
    verify_trace,
)
from .process_algebra import (
    Act,
    Alt,
    Configuration,
    GeneralizedIntroduceEvent,
    Guard,
    Par,
    ProcessTerm,
    Seq,
    can_terminate,
    event_promise,
    step,
)
from .promise_state import obligation_warnings
from .task_algebra import algebra_law_violations, incompatibility_law_violations

__all__ = ["main", "CliConfig"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_LIMIT = 2
EXIT_USAGE = 64


@dataclass(frozen=True)
class CliConfig:
    command: str
    scenario_path: Path
    trace_path: Path | None
    strict_conflicts: bool
    seed: int
    node_limit: int
    max_traces: int
    format: str


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the convention here is 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="promise", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_trace in (
        ("check", False),
        ("explore", False),
        ("run", False),
        ("verify-trace", True),
    ):
        p = sub.add_parser(name)
        p.add_argument("scenario", type=Path, help="scenario (.promise) file")
        if needs_trace:
            p.add_argument("--trace", type=Path, required=True, help="trace file to replay")
        p.add_argument(
            "--strict-conflicts",
            action="store_true",
            help="check introductions against all of a promiser's promises, "
            "not only those toward the same promisee",
        )
        if name == "run":
            p.add_argument("--seed", type=int, default=0, help="random-walk seed")
        if name in ("explore", "run"):
            p.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT)
            p.add_argument("--max-traces", type=int, default=DEFAULT_TRACE_LIMIT)
        p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _load_scenario(config: CliConfig) -> Scenario | None:
    try:
        text = config.scenario_path.read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: cannot read {config.scenario_path}: {err}", file=sys.stderr)
        return None
    try:
        scenario = parse_scenario(text)
    except (ParseError, ValidationError) as err:
        print(f"error: {config.scenario_path}: {err}", file=sys.stderr)
        return None
    if config.strict_conflicts:
        scenario = Scenario(
            model=scenario.model.with_strict_conflicts(),
            definitions=scenario.definitions,
            entry=scenario.entry,
            initial_state=scenario.initial_state,
        )
    return scenario


def _generalized_events(term: ProcessTerm):
    if isinstance(term, Act):
        if isinstance(term.event, GeneralizedIntroduceEvent):
            yield term.event
    elif isinstance(term, (Seq, Alt, Par)):
        yield from _generalized_events(term.left)
        yield from _generalized_events(term.right)
    elif isinstance(term, Guard):
        yield from _generalized_events(term.body)


def _emit(config: CliConfig, text_lines: list[str], payload: dict) -> None:
    if config.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(text_lines))


def cmd_check(config: CliConfig) -> int:
    scenario = _load_scenario(config)
    if scenario is None:
        return EXIT_FAILURE
    model = scenario.model
    violations = algebra_law_violations(model.atoms)
    violations += incompatibility_law_violations(model.atoms, model.incompatibility)

    terms = [term for _, term in scenario.definitions] + [scenario.entry]
    warnings = sorted(
        {
            str(w)
            for term in terms
            for event in _generalized_events(term)
            for w in obligation_warnings(model, event_promise(event))
        }
    )

    status = "ok" if not violations else "failed"
    lines = [
        f"scenario: {config.scenario_path}",
        f"agents: {len(model.agents)}",
        f"atoms: {len(model.atoms)}",
        f"task bodies: {4 * len(model.atoms)}",
        f"incompatibility pairs: {len(model.incompatibility.pairs)} "
        f"({len(model.incompatibility.declared)} declared)",
        f"law violations: {len(violations)}",
    ]
    lines += [f"  {v}" for v in violations]
    lines.append(f"warnings: {len(warnings)}")
    lines += [f"  {w}" for w in warnings]
    lines.append(status)
    _emit(
        config,
        lines,
        {
            "scenario": str(config.scenario_path),
            "agents": len(model.agents),
            "atoms": len(model.atoms),
            "bodies": 4 * len(model.atoms),
            "pairs": len(model.incompatibility.pairs),
            "declared": len(model.incompatibility.declared),
            "violations": violations,
            "warnings": warnings,
            "status": status,
        },
    )
    return EXIT_OK if not violations else EXIT_FAILURE


def cmd_explore(config: CliConfig) -> int:
    scenario = _load_scenario(config)
    if scenario is None:
        return EXIT_FAILURE
    initial = Configuration(scenario.entry, scenario.initial_state)
    try:
        lts = build_lts(scenario.model, initial, node_limit=config.node_limit)
        traces = maximal_traces(lts, max_traces=config.max_traces)
    except LimitExceeded as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_LIMIT
    violations = check_invariants(scenario.model, lts)
    deadlocks = find_deadlocks(lts)

    lines = [
        f"nodes: {len(lts.nodes)}",
        f"edges: {len(lts.edges)}",
        f"traces: {len(traces)}",
    ]
    for number, trace in enumerate(traces, start=1):
        lines.append(f"trace {number} ({trace.outcome}):")
        lines += [f"  {event}" for event in trace.events]
    lines.append(f"deadlocks: {len(deadlocks)}")
    lines += [f"  {node.state} with {node.term}" for node in deadlocks]
    lines.append(f"violations: {len(violations)}")
    lines += [f"  {v}" for v in violations]
    _emit(
        config,
        lines,
        {
            "nodes": len(lts.nodes),
            "edges": len(lts.edges),
            "traces": [
                {"events": [str(e) for e in t.events], "outcome": str(t.outcome)}
                for t in traces
            ],
            "deadlocks": [
                {"state": str(node.state), "term": str(node.term)} for node in deadlocks
            ],
            "violations": [
                {"kind": v.kind, "detail": v.detail, "state": str(v.config.state)}
                for v in violations
            ],
        },
    )
    return EXIT_OK if not violations else EXIT_FAILURE


def cmd_run(config: CliConfig) -> int:
    scenario = _load_scenario(config)
    if scenario is None:
        return EXIT_FAILURE
    rng = random.Random(config.seed)
    current = Configuration(scenario.entry, scenario.initial_state)
    events = []
    while True:
        transitions = sorted(
            step(scenario.model, current),
            key=lambda tr: (str(tr[0]), str(tr[1].term), str(tr[1].state)),
        )
        if not transitions:
            break
        event, current = rng.choice(transitions)
        events.append(event)
    outcome = Outcome.SUCCESSFUL if can_terminate(current.term) else Outcome.DEADLOCKED

    lines = [str(event) for event in events]
    lines.append(f"outcome: {outcome}")
    lines.append(f"final state: {current.state}")
    _emit(
        config,
        lines,
        {
            "seed": config.seed,
            "events": [str(e) for e in events],
            "outcome": str(outcome),
            "final_state": sorted(str(p) for p in current.state),
        },
    )
    return EXIT_OK


def cmd_verify_trace(config: CliConfig) -> int:
    scenario = _load_scenario(config)
    if scenario is None:
        return EXIT_FAILURE
    try:
        trace_text = config.trace_path.read_text(encoding="utf-8")
        events = parse_trace(trace_text, scenario.model)
    except OSError as err:
        print(f"error: cannot read {config.trace_path}: {err}", file=sys.stderr)
        return EXIT_FAILURE
    except (ParseError, ValidationError) as err:
        print(f"error: {config.trace_path}: {err}", file=sys.stderr)
        return EXIT_FAILURE

    initial = Configuration(scenario.entry, scenario.initial_state)
    verdict = verify_trace(scenario.model, initial, events)
    if isinstance(verdict, Accepted):
        lines = [
            "accepted",
            f"maximal: {'yes' if verdict.maximal else 'no'}",
            f"outcome: {verdict.outcome if verdict.outcome else 'incomplete'}",
            f"final state: {verdict.final_state}",
        ]
        _emit(
            config,
            lines,
            {
                "verdict": "accepted",
                "maximal": verdict.maximal,
                "outcome": str(verdict.outcome) if verdict.outcome else None,
                "final_state": sorted(str(p) for p in verdict.final_state),
            },
        )
        return EXIT_OK
    lines = [
        f"rejected at index {verdict.index}: {events[verdict.index]}",
        "available events:",
    ]
    lines += [f"  {event}" for event in verdict.available]
    lines.append(f"state: {verdict.state}")
    _emit(
        config,
        lines,
        {
            "verdict": "rejected",
            "index": verdict.index,
            "event": str(events[verdict.index]),
            "available": [str(e) for e in verdict.available],
            "state": sorted(str(p) for p in verdict.state),
        },
    )
    return EXIT_FAILURE


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    config = CliConfig(
        command=args.command,
        scenario_path=args.scenario,
        trace_path=getattr(args, "trace", None),
        strict_conflicts=args.strict_conflicts,
        seed=getattr(args, "seed", 0),
        node_limit=getattr(args, "node_limit", DEFAULT_NODE_LIMIT),
        max_traces=getattr(args, "max_traces", DEFAULT_TRACE_LIMIT),
        format=args.format,
    )
    command = {
        "check": cmd_check,
        "explore": cmd_explore,
        "run": cmd_run,
        "verify-trace": cmd_verify_trace,
    }[config.command]
    try:
        return command(config)
    except BrokenPipeError:
        # downstream closed the pipe (e.g. | head); avoid a traceback and
        # the secondary error from the interpreter's exit-time flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
