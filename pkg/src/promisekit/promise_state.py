"""Promises, states, and the speech acts that move between states.

A state is a set of basic promises ``a:x->b`` that is conflict-free: an
agent never holds incompatible bodies toward the same counterparty.
Introduction adds a promise when it is enabled, withdrawal removes a
present one. Delegated promises (``a[c]:x->b[d]``) are never stored; when
the performer has promised compliance to the promiser they immediately
induce the basic promise ``c:x->d``.

Two conflict-checking modes exist. The default checks conflicts per
(promiser, promisee) dyad. The strict mode checks an introduction against
*all* of the promiser's outstanding promises regardless of promisee, which
is noticeably more restrictive (it rules out simultaneously promising a
body to one agent and its negation to another). The mode is carried on the
model so that every rule, the interpreter, and the explorer agree on it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Union

from .task_algebra import (
    COMPLIANCE_TYPE,
    GAMMA,
    GAMMA_ATOM,
    ExclusivenessRegistry,
    IncompatibilityRelation,
    TaskAtom,
    TaskBody,
    TypeTag,
    build_incompatibility,
    incompatible,
    is_exclusive,
    parse_body,
)

__all__ = [
    "Agent",
    "SubordinationOrder",
    "PromiseModel",
    "Promise",
    "GeneralizedPromise",
    "State",
    "EMPTY_STATE",
    "ObligationWarning",
    "pi_enabled",
    "introduce",
    "pw_enabled",
    "withdraw",
    "has_promise",
    "introduce_generalized",
    "obligation_warnings",
    "is_conflict_free",
    "exclusiveness_breaches",
    "ModelError",
    "SubordinationCycle",
    "TransitionError",
    "NotEnabled",
    "NotPresent",
    "NoCompliance",
]


@dataclass(frozen=True, slots=True)
class Agent:
    name: str

    def __str__(self) -> str:
        return self.name


class ModelError(ValueError):
    """The model declarations are inconsistent (duplicate, unknown or
    reserved names, or an invalid subordination order)."""


class SubordinationCycle(ModelError):
    """Two distinct agents are subordinated to each other."""


@dataclass(frozen=True)
class SubordinationOrder:
    """Partial order on agents; ``(low, high)`` means low answers to high.

    The reflexive part is implicit; the stored closure is the transitive
    closure of the declared pairs, validated to be antisymmetric.
    """

    declared: frozenset[tuple[Agent, Agent]]
    closure: frozenset[tuple[Agent, Agent]]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Agent, Agent]]) -> "SubordinationOrder":
        declared = frozenset((low, high) for low, high in pairs if low != high)
        closure = set(declared)
        changed = True
        while changed:
            changed = False
            for a, b in tuple(closure):
                for c, d in tuple(closure):
                    if b == c and (a, d) not in closure and a != d:
                        closure.add((a, d))
                        changed = True
        for a, b in closure:
            if (b, a) in closure:
                raise SubordinationCycle(f"agents {a} and {b} are subordinated to each other")
        return cls(declared=declared, closure=frozenset(closure))

    def subordinate(self, low: Agent, high: Agent) -> bool:
        return low == high or (low, high) in self.closure


BodySpec = Union[str, TaskBody]


@dataclass(frozen=True)
class PromiseModel:
    """The static world a negotiation runs in: agents and their
    subordination order, typed task atoms, the incompatibility closure,
    the exclusiveness registry, and the conflict-checking mode."""

    agents: tuple[Agent, ...]
    order: SubordinationOrder
    types: tuple[TypeTag, ...]
    atoms: tuple[TaskAtom, ...]
    incompatibility: IncompatibilityRelation
    exclusiveness: ExclusivenessRegistry
    strict_conflicts: bool = False

    @classmethod
    def create(
        cls,
        agents: Iterable[str],
        types: Iterable[str] = (),
        atoms: Mapping[str, str] | None = None,
        subordination: Iterable[tuple[str, str]] = (),
        incompatible_pairs: Iterable[tuple[BodySpec, BodySpec]] = (),
        exclusive: Iterable[BodySpec] = (),
        strict_conflicts: bool = False,
    ) -> "PromiseModel":
        """Build and validate a model. The compliance type and atom are
        injected automatically and may not be redeclared."""
        agent_objs: list[Agent] = []
        for name in agents:
            if not name:
                raise ModelError("agent names must be nonempty")
            if any(a.name == name for a in agent_objs):
                raise ModelError(f"duplicate agent {name!r}")
            agent_objs.append(Agent(name))

        type_objs: list[TypeTag] = []
        for name in types:
            if name == COMPLIANCE_TYPE.name:
                raise ModelError(f"type {name!r} is reserved")
            if not name:
                raise ModelError("type names must be nonempty")
            if any(t.name == name for t in type_objs):
                raise ModelError(f"duplicate type {name!r}")
            type_objs.append(TypeTag(name))
        all_types = tuple(type_objs) + (COMPLIANCE_TYPE,)

        atom_objs: list[TaskAtom] = []
        for name, type_name in (atoms or {}).items():
            if name == GAMMA_ATOM.name:
                raise ModelError(f"atom {name!r} is reserved")
            if type_name == COMPLIANCE_TYPE.name:
                raise ModelError(f"type {COMPLIANCE_TYPE.name!r} is reserved for the compliance atom")
            if any(a.name == name for a in atom_objs):
                raise ModelError(f"duplicate atom {name!r}")
            matching = [t for t in all_types if t.name == type_name]
            if not matching:
                raise ModelError(f"atom {name!r} has unknown type {type_name!r}")
            atom_objs.append(TaskAtom(name, matching[0]))
        all_atoms = tuple(atom_objs) + (GAMMA_ATOM,)
        atom_map = {a.name: a for a in all_atoms}

        by_name = {a.name: a for a in agent_objs}
        order_pairs = []
        for low, high in subordination:
            if low not in by_name or high not in by_name:
                raise ModelError(f"subordination over unknown agent: {low} <= {high}")
            order_pairs.append((by_name[low], by_name[high]))
        order = SubordinationOrder.from_pairs(order_pairs)

        def body(spec: BodySpec) -> TaskBody:
            return parse_body(spec, atom_map) if isinstance(spec, str) else spec

        relation = build_incompatibility(
            all_atoms, [(body(x), body(y)) for x, y in incompatible_pairs]
        )
        registry = ExclusivenessRegistry(frozenset(body(b) for b in exclusive))
        return cls(
            agents=tuple(agent_objs),
            order=order,
            types=all_types,
            atoms=all_atoms,
            incompatibility=relation,
            exclusiveness=registry,
            strict_conflicts=strict_conflicts,
        )

    def agent(self, name: str) -> Agent:
        for a in self.agents:
            if a.name == name:
                return a
        raise ModelError(f"unknown agent {name!r}")

    def has_agent(self, name: str) -> bool:
        return any(a.name == name for a in self.agents)

    def atom_map(self) -> dict[str, TaskAtom]:
        return {a.name: a for a in self.atoms}

    def body(self, text: str) -> TaskBody:
        return parse_body(text, self.atom_map())

    def promise(self, promiser: str, body: str, promisee: str) -> "Promise":
        return Promise(self.agent(promiser), self.body(body), self.agent(promisee))

    def with_strict_conflicts(self, flag: bool = True) -> "PromiseModel":
        return replace(self, strict_conflicts=flag)

    def user_atoms(self) -> tuple[TaskAtom, ...]:
        return tuple(a for a in self.atoms if a != GAMMA_ATOM)

    def user_types(self) -> tuple[TypeTag, ...]:
        return tuple(t for t in self.types if t != COMPLIANCE_TYPE)


@dataclass(frozen=True, slots=True)
class Promise:
    """A basic promise: promiser commits the body toward the promisee."""

    promiser: Agent
    body: TaskBody
    promisee: Agent

    def __str__(self) -> str:
        return f"{self.promiser}:{self.body}->{self.promisee}"


@dataclass(frozen=True, slots=True)
class GeneralizedPromise:
    """Promiser tells the promisee that the performer will do the body for
    the beneficiary. Basic promises are the diagonal case."""

    promiser: Agent
    performer: Agent
    body: TaskBody
    promisee: Agent
    beneficiary: Agent

    @property
    def basic(self) -> bool:
        return self.promiser == self.performer and self.promisee == self.beneficiary

    def induced(self) -> Promise:
        """The basic promise the compliance rule produces."""
        return Promise(self.performer, self.body, self.beneficiary)

    def __str__(self) -> str:
        return (
            f"{self.promiser}[{self.performer}]:{self.body}"
            f"->{self.promisee}[{self.beneficiary}]"
        )


@dataclass(frozen=True, slots=True)
class State:
    """An immutable set of non-conflicting basic promises."""

    promises: frozenset[Promise] = frozenset()

    def __contains__(self, promise: Promise) -> bool:
        return promise in self.promises

    def __iter__(self) -> Iterator[Promise]:
        return iter(self.promises)

    def __len__(self) -> int:
        return len(self.promises)

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(str(p) for p in self.promises)) + "}"


EMPTY_STATE = State()


class TransitionError(ValueError):
    """A speech act was attempted whose premise does not hold."""


class NotEnabled(TransitionError):
    """Introduction blocked; ``reason`` is 'conflict' or 'exclusiveness'."""

    def __init__(self, promise: Promise, reason: str, blocking: Promise):
        super().__init__(f"cannot introduce {promise}: {reason} with {blocking}")
        self.promise = promise
        self.reason = reason
        self.blocking = blocking


class NotPresent(TransitionError):
    """Withdrawal of a promise that is not in the state."""


class NoCompliance(TransitionError):
    """Delegated introduction without the performer's compliance promise."""


def _conflicting(model: PromiseModel, state: State, promise: Promise) -> Promise | None:
    """First established promise whose body clashes with the candidate.

    Default mode scans the (promiser, promisee) dyad; strict mode scans
    everything the promiser has outstanding.
    """
    candidates = [
        p
        for p in state
        if p.promiser == promise.promiser
        and (model.strict_conflicts or p.promisee == promise.promisee)
    ]
    for p in sorted(candidates, key=str):
        if incompatible(model.incompatibility, promise.body, p.body):
            return p
    return None


def _exclusiveness_block(model: PromiseModel, state: State, promise: Promise) -> Promise | None:
    """A same-body promise to a different counterparty, if the body is
    exclusive."""
    if not is_exclusive(model.exclusiveness, promise.body):
        return None
    for p in sorted((p for p in state), key=str):
        if (
            p.promiser == promise.promiser
            and p.body == promise.body
            and p.promisee != promise.promisee
        ):
            return p
    return None


def pi_enabled(model: PromiseModel, state: State, promise: Promise) -> bool:
    """True iff introducing the promise keeps the state conflict-free and
    respects exclusiveness."""
    return (
        _conflicting(model, state, promise) is None
        and _exclusiveness_block(model, state, promise) is None
    )


def introduce(model: PromiseModel, state: State, promise: Promise) -> State:
    """Add the promise to the state. Idempotent when already present;
    raises NotEnabled otherwise when the introduction premise fails."""
    clash = _conflicting(model, state, promise)
    if clash is not None:
        raise NotEnabled(promise, "conflict", clash)
    blocked = _exclusiveness_block(model, state, promise)
    if blocked is not None:
        raise NotEnabled(promise, "exclusiveness", blocked)
    return State(state.promises | {promise})


def pw_enabled(state: State, promise: Promise) -> bool:
    """True iff the promise can be withdrawn, i.e. is present."""
    return promise in state


def withdraw(state: State, promise: Promise) -> State:
    """Remove the promise from the state; raises NotPresent if absent."""
    if promise not in state:
        raise NotPresent(f"cannot withdraw absent promise {promise}")
    return State(state.promises - {promise})


def has_promise(state: State, promiser: Agent, body: TaskBody, promisee: Agent) -> bool:
    return Promise(promiser, body, promisee) in state


def introduce_generalized(model: PromiseModel, state: State, gp: GeneralizedPromise) -> State:
    """Apply the compliance rule: with ``performer:gamma->promiser`` in the
    state, the delegated promise induces ``performer:body->beneficiary``.

    The compliance promise stays in the state; the induced introduction is
    subject to the ordinary enabledness checks.
    """
    compliance = Promise(gp.performer, GAMMA, gp.promiser)
    if compliance not in state:
        raise NoCompliance(f"{gp.performer} has not promised compliance to {gp.promiser}")
    return introduce(model, state, gp.induced())


@dataclass(frozen=True, slots=True)
class ObligationWarning:
    """A delegated promise whose performer answers to the promiser: the
    promise imposes an obligation on an agent meant to be autonomous."""

    performer: Agent
    promiser: Agent

    def __str__(self) -> str:
        return (
            f"obligation: {self.performer} is subordinate to {self.promiser}, "
            f"so the promise binds {self.performer} involuntarily"
        )


def obligation_warnings(model: PromiseModel, gp: GeneralizedPromise) -> list[ObligationWarning]:
    """Warnings (never errors) for delegated promises over subordinates."""
    if gp.performer != gp.promiser and model.order.subordinate(gp.performer, gp.promiser):
        return [ObligationWarning(gp.performer, gp.promiser)]
    return []


def is_conflict_free(model: PromiseModel, state: State) -> bool:
    """The state invariant: no two promises within one (promiser, promisee)
    dyad have incompatible bodies."""
    promises = tuple(state)
    for i, p in enumerate(promises):
        for q in promises[i + 1 :]:
            if (
                p.promiser == q.promiser
                and p.promisee == q.promisee
                and incompatible(model.incompatibility, p.body, q.body)
            ):
                return False
    return True


def exclusiveness_breaches(model: PromiseModel, state: State) -> list[tuple[Agent, TaskBody]]:
    """(promiser, body) pairs where an exclusive body is promised to more
    than one counterparty. Unreachable via enabled introductions."""
    seen: dict[tuple[Agent, TaskBody], set[Agent]] = {}
    for p in state:
        if is_exclusive(model.exclusiveness, p.body):
            seen.setdefault((p.promiser, p.body), set()).add(p.promisee)
    return sorted(
        (key for key, promisees in seen.items() if len(promisees) > 1),
        key=lambda key: (key[0].name, str(key[1])),
    )
