"""Canonical task bodies and their algebraic laws.

A task body is an atomic task carrying two involutive modifiers:

* usage (``~``) -- the task of making use of something done by another agent;
  flips the service/usage polarity.
* negation (``!``) -- the task of *not* doing something; flips positivity.

Because both modifiers are involutive and commute, every task body has a
normal form (atom, usage parity, negation parity), giving exactly four
distinct bodies per atom. Incompatibility (``#``) relates bodies that a
single agent cannot realize at the same time; exclusiveness marks bodies
that cannot be promised by one agent to two counterparties at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

__all__ = [
    "TypeTag",
    "TaskAtom",
    "TaskBody",
    "IncompatibilityRelation",
    "ExclusivenessRegistry",
    "COMPLIANCE_TYPE",
    "GAMMA_ATOM",
    "GAMMA",
    "usage",
    "negate",
    "is_service",
    "is_positive",
    "type_of",
    "all_bodies",
    "parse_body",
    "build_incompatibility",
    "incompatible",
    "is_exclusive",
    "algebra_law_violations",
    "incompatibility_law_violations",
    "IncompatibilityError",
    "TypeMismatch",
    "ReflexiveDeclaration",
    "NegationConflict",
    "ReservedAtomDeclaration",
    "UnknownAtom",
]


@dataclass(frozen=True, slots=True)
class TypeTag:
    """Type of a task body; only same-typed bodies may be incompatible."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class TaskAtom:
    """An atomic task. Atoms are positive services by construction."""

    name: str
    type: TypeTag

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class TaskBody:
    """Normal form of a task body: atom plus usage and negation parities."""

    atom: TaskAtom
    usage: bool = False
    negated: bool = False

    def __str__(self) -> str:
        return ("!" if self.negated else "") + ("~" if self.usage else "") + self.atom.name


# The compliance task is predeclared in every model; promising it to an
# agent makes that agent's delegated promises binding on the promiser.
COMPLIANCE_TYPE = TypeTag("compliance")
GAMMA_ATOM = TaskAtom("gamma", COMPLIANCE_TYPE)
GAMMA = TaskBody(GAMMA_ATOM)


def usage(x: TaskBody) -> TaskBody:
    """Toggle the usage modifier (involutive)."""
    return TaskBody(x.atom, not x.usage, x.negated)


def negate(x: TaskBody) -> TaskBody:
    """Toggle the negation modifier (involutive)."""
    return TaskBody(x.atom, x.usage, not x.negated)


def is_service(x: TaskBody) -> bool:
    """True iff x is on the providing side (no usage modifier)."""
    return not x.usage


def is_positive(x: TaskBody) -> bool:
    """True iff x is not negated."""
    return not x.negated


def type_of(x: TaskBody) -> TypeTag:
    """Type of a body; invariant under usage and negation."""
    return x.atom.type


def all_bodies(atoms: Iterable[TaskAtom]) -> tuple[TaskBody, ...]:
    """The four forms of every atom, in a deterministic order."""
    return tuple(
        TaskBody(atom, u, n)
        for atom in atoms
        for n in (False, True)
        for u in (False, True)
    )


class UnknownAtom(ValueError):
    """A task-body expression names an atom that is not in the model."""


def parse_body(text: str, atoms: Mapping[str, TaskAtom]) -> TaskBody:
    """Parse concrete task-body syntax: optional ``!``/``~`` prefixes, then
    an atom name. Repeated prefixes self-cancel (``!!x`` is ``x``)."""
    s = text.strip()
    usage_flag = negated_flag = False
    i = 0
    while i < len(s) and s[i] in "!~":
        if s[i] == "!":
            negated_flag = not negated_flag
        else:
            usage_flag = not usage_flag
        i += 1
    name = s[i:]
    if name not in atoms:
        raise UnknownAtom(f"unknown task atom {name!r}")
    return TaskBody(atoms[name], usage_flag, negated_flag)


class IncompatibilityError(ValueError):
    """A declared incompatibility violates one of the relation's laws."""


class TypeMismatch(IncompatibilityError):
    """Declared pair relates bodies of different types."""


class ReflexiveDeclaration(IncompatibilityError):
    """Declared pair relates a body with itself."""


class NegationConflict(IncompatibilityError):
    """Closure would contain both (x, y) and (x, !y)."""


class ReservedAtomDeclaration(IncompatibilityError):
    """The compliance atom may not be declared incompatible with anything."""


@dataclass(frozen=True)
class IncompatibilityRelation:
    """Symmetric, irreflexive closure of declared pairs plus every (x, !x).

    Pairs are stored unordered (two-element frozensets), which makes
    symmetry structural.
    """

    pairs: frozenset[frozenset[TaskBody]]
    declared: frozenset[frozenset[TaskBody]]


def build_incompatibility(
    atoms: Iterable[TaskAtom],
    declared: Iterable[tuple[TaskBody, TaskBody]] = (),
) -> IncompatibilityRelation:
    """Close the declared pairs under the incompatibility laws.

    The result always contains (x, !x) for every body x over the atoms.
    Raises TypeMismatch, ReflexiveDeclaration, NegationConflict or
    ReservedAtomDeclaration when the declarations cannot be closed.
    """
    atoms = tuple(atoms)
    known = set(atoms)
    declared_pairs: set[frozenset[TaskBody]] = set()
    for x, y in declared:
        if x.atom not in known or y.atom not in known:
            raise UnknownAtom(f"incompatibility over unknown atom in ({x}, {y})")
        if GAMMA_ATOM in (x.atom, y.atom):
            raise ReservedAtomDeclaration(
                f"the compliance atom may not be declared incompatible: ({x}, {y})"
            )
        if x == y:
            raise ReflexiveDeclaration(f"a body cannot be incompatible with itself: {x}")
        if type_of(x) != type_of(y):
            raise TypeMismatch(
                f"incompatible bodies must share a type: "
                f"{x} is {type_of(x)}, {y} is {type_of(y)}"
            )
        declared_pairs.add(frozenset((x, y)))

    axioms = {frozenset((x, negate(x))) for x in all_bodies(atoms)}
    closure = axioms | declared_pairs
    for pair in closure:
        x, y = tuple(pair)
        for u, v in ((x, y), (y, x)):
            clash = frozenset((u, negate(v)))
            if len(clash) == 2 and clash in closure:
                raise NegationConflict(
                    f"({u}, {v}) and ({u}, {negate(v)}) cannot both be incompatible"
                )
    return IncompatibilityRelation(pairs=frozenset(closure), declared=frozenset(declared_pairs))


def incompatible(rel: IncompatibilityRelation, x: TaskBody, y: TaskBody) -> bool:
    """True iff x and y cannot both be realized by the same agent."""
    return frozenset((x, y)) in rel.pairs


@dataclass(frozen=True)
class ExclusivenessRegistry:
    """Bodies that cannot be promised to two different counterparties at
    the same time. Each of an atom's four forms is registered separately."""

    exclusive: frozenset[TaskBody]


def is_exclusive(reg: ExclusivenessRegistry, x: TaskBody) -> bool:
    return x in reg.exclusive


def algebra_law_violations(atoms: Iterable[TaskAtom]) -> list[str]:
    """Brute-force check of the modifier laws over every body of the atoms.

    Covers both involutions, modifier commutation, the service/positivity
    interaction laws, and type invariance. Returns human-readable
    descriptions of any failures (expected: none).
    """
    out: list[str] = []
    for x in all_bodies(atoms):
        checks = [
            (usage(usage(x)) == x, f"~~{x} != {x}"),
            (negate(negate(x)) == x, f"!!{x} != {x}"),
            (usage(negate(x)) == negate(usage(x)), f"~!{x} != !~{x}"),
            (is_service(negate(x)) == is_service(x), f"s(!{x}) != s({x})"),
            (is_service(usage(x)) == (not is_service(x)), f"s(~{x}) == s({x})"),
            (is_positive(usage(x)) == is_positive(x), f"p(~{x}) != p({x})"),
            (is_positive(negate(x)) == (not is_positive(x)), f"p(!{x}) == p({x})"),
            (type_of(usage(x)) == type_of(x), f"t(~{x}) != t({x})"),
            (type_of(negate(x)) == type_of(x), f"t(!{x}) != t({x})"),
        ]
        out.extend(msg for ok, msg in checks if not ok)
    for atom in atoms:
        base = TaskBody(atom)
        if not (is_service(base) and is_positive(base)):
            out.append(f"atom {atom} is not a positive service")
    return out


def incompatibility_law_violations(
    atoms: Iterable[TaskAtom], rel: IncompatibilityRelation
) -> list[str]:
    """Exhaustive pairwise check of the closure's laws: the (x, !x) axiom,
    symmetry, irreflexivity, type homogeneity and the negation rule."""
    out: list[str] = []
    bodies = all_bodies(atoms)
    for x in bodies:
        if not incompatible(rel, x, negate(x)):
            out.append(f"missing axiom pair ({x}, {negate(x)})")
        if incompatible(rel, x, x):
            out.append(f"reflexive pair ({x}, {x})")
    for x in bodies:
        for y in bodies:
            if incompatible(rel, x, y) != incompatible(rel, y, x):
                out.append(f"asymmetric pair ({x}, {y})")
            if incompatible(rel, x, y):
                if type_of(x) != type_of(y):
                    out.append(f"cross-type pair ({x}, {y})")
                if incompatible(rel, x, negate(y)):
                    out.append(f"negation conflict ({x}, {y}) and ({x}, {negate(y)})")
    return out
