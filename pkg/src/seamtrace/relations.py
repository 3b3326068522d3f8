"""Typed relations between project elements and link propagation.

Nine canonical relations are registered, each with endpoint-kind constraints and
an inverse name.  Only canonical-direction links are ever materialized; inverse
names are query-time aliases.

:func:`close` computes the least fixpoint of the builtin rules R1..R14 with an
indexed worklist and records, for each derived link, the first derivation found.
:func:`close_reference` computes the same set by naively re-evaluating every rule
over the whole link set until nothing changes.  It interprets the declarative
:data:`RULES` table directly and exists to check :func:`close`.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Union

from .elements import (
    ALL_KINDS,
    CSTR,
    FR,
    IM,
    NLRQ,
    OORQ,
    TEST,
    ElementKind,
    ElementRef,
    Locator,
)

K = ElementKind


@dataclass(frozen=True)
class RelationKind:
    name: str
    inverse_name: str
    symmetric: bool = False
    source_kinds: frozenset = ALL_KINDS
    target_kinds: frozenset = ALL_KINDS


_REGISTRY = [
    RelationKind("repeats", "repeats", symmetric=True),
    RelationKind("complements", "complements", symmetric=True),
    RelationKind("constrains", "is_constrained_by", source_kinds=CSTR, target_kinds=FR),
    RelationKind("refines", "generalizes"),
    RelationKind("implements", "specifies", source_kinds=IM, target_kinds=NLRQ | OORQ),
    RelationKind("contains", "part_of"),
    RelationKind("tests", "is_tested_by", source_kinds=TEST),
    RelationKind("validates", "is_validated_by", source_kinds=TEST, target_kinds=NLRQ),
    RelationKind("refers_to", "referred_to_by"),
]

RELATIONS: dict[str, RelationKind] = {r.name: r for r in _REGISTRY}
RELATION_NAMES = tuple(RELATIONS)
INVERSE_OF: dict[str, str] = {r.inverse_name: r.name for r in _REGISTRY if not r.symmetric}
FACT_RELATIONS = ("inherits", "is_a_client")

# targets that make a refinement by implementation code an implementation
REQUIREMENT_TARGETS = frozenset({
    K.ComponentRequirement, K.FunctionalRequirement, K.Constraint, K.Scenario,
    K.OOFunctionalRequirement, K.OOConstraint,
})


class UnknownRelation(ValueError):
    pass


def resolve(name: str) -> tuple[RelationKind, bool]:
    """Map a canonical or inverse relation name to ``(relation, inverted)``."""
    if name in RELATIONS:
        return RELATIONS[name], False
    if name in INVERSE_OF:
        return RELATIONS[INVERSE_OF[name]], True
    raise UnknownRelation(f"unknown relation {name!r}")


def perspective_name(relation: str, as_source: bool) -> str:
    """Name of ``relation`` as read from one endpoint."""
    rel = RELATIONS[relation]
    return rel.name if as_source else rel.inverse_name


@dataclass(frozen=True)
class LinkAtom:
    source: ElementRef
    relation: str
    target: ElementRef

    def __post_init__(self):
        if self.relation not in RELATIONS:
            if self.relation in INVERSE_OF:
                raise UnknownRelation(
                    f"{self.relation!r} is an inverse name; use {INVERSE_OF[self.relation]!r} "
                    "with source and target swapped")
            raise UnknownRelation(f"unknown relation {self.relation!r}")

    def mirrored(self) -> LinkAtom:
        return LinkAtom(self.target, self.relation, self.source)

    def sort_key(self):
        return (self.relation, str(self.source.locator), str(self.target.locator))

    def __str__(self) -> str:
        return f"{self.source} {self.relation} {self.target}"


@dataclass(frozen=True)
class FactAtom:
    """A structural base fact: ``inherits`` or ``is_a_client`` between code elements."""

    relation: str
    source: ElementRef
    target: ElementRef

    def __str__(self) -> str:
        return f"{self.source} {self.relation} {self.target}"


Premise = Union[LinkAtom, FactAtom]


@dataclass(frozen=True)
class TypingViolation:
    atom: LinkAtom
    side: str
    expected: frozenset
    actual: ElementKind

    def __str__(self) -> str:
        names = ", ".join(sorted(k.value for k in self.expected))
        end = self.atom.source if self.side == "source" else self.atom.target
        return (f"{self.atom.relation}: {self.side} {end} is {self.actual.value}, "
                f"expected one of {{{names}}}")


def check_typing(atom: LinkAtom) -> TypingViolation | None:
    rel = RELATIONS[atom.relation]
    if atom.source.kind not in rel.source_kinds:
        return TypingViolation(atom, "source", rel.source_kinds, atom.source.kind)
    if atom.target.kind not in rel.target_kinds:
        return TypingViolation(atom, "target", rel.target_kinds, atom.target.kind)
    return None


def typing_warnings(atom: LinkAtom) -> list[str]:
    """Soft checks applied to asserted links only."""
    if atom.relation == "complements" and atom.source.group is not atom.target.group:
        return [f"complements: {atom.target} ({atom.target.group.value}) is not like "
                f"{atom.source} ({atom.source.group.value})"]
    return []


class TypingError(ValueError):
    def __init__(self, violation: TypingViolation):
        super().__init__(str(violation))
        self.violation = violation


# -- rule table --------------------------------------------------------------

@dataclass(frozen=True)
class Pattern:
    relation: str  # a relation name, a fact name, or the variable "?R"
    source: str
    target: str


@dataclass(frozen=True)
class RuleSpec:
    id: str
    premises: tuple[Pattern, ...]
    conclusion: Pattern
    distinct: tuple[str, str] | None = None
    guards: tuple[tuple[str, frozenset], ...] = ()
    text: str = ""


P = Pattern

RULES: tuple[RuleSpec, ...] = (
    RuleSpec("R1", (P("repeats", "A", "B"),), P("repeats", "B", "A"),
             text="repeats(A,B) => repeats(B,A)"),
    RuleSpec("R2", (P("repeats", "A", "B"), P("?R", "B", "C")), P("?R", "A", "C"),
             text="repeats(A,B), R(B,C) => R(A,C)"),
    RuleSpec("R3", (P("repeats", "A", "B"), P("?R", "A", "D")), P("?R", "B", "D"),
             text="repeats(A,B), R(A,D) => R(B,D)"),
    RuleSpec("R4", (P("complements", "A", "B"),), P("complements", "B", "A"),
             text="complements(A,B) => complements(B,A)"),
    RuleSpec("R5", (P("constrains", "A", "B"), P("constrains", "C", "B")),
             P("complements", "A", "C"), distinct=("A", "C"),
             text="constrains(A,B), constrains(C,B), A != C => complements(A,C)"),
    RuleSpec("R6", (P("refines", "A", "B"), P("refines", "B", "C")),
             P("refines", "A", "C"), distinct=("A", "C"),
             text="refines(A,B), refines(B,C), A != C => refines(A,C)"),
    RuleSpec("R7", (P("inherits", "A", "B"),), P("refines", "A", "B"),
             text="inherits(A,B) => refines(A,B)"),
    RuleSpec("R8", (P("refines", "A", "B"),), P("implements", "A", "B"),
             guards=(("A", IM), ("B", REQUIREMENT_TARGETS)),
             text="refines(A,B), A in IM, B a requirement or constraint => implements(A,B)"),
    RuleSpec("R9", (P("contains", "A", "B"), P("contains", "B", "C")),
             P("contains", "A", "C"), distinct=("A", "C"),
             text="contains(A,B), contains(B,C), A != C => contains(A,C)"),
    # part_of(A,B) is contains(B,A)
    RuleSpec("R10", (P("contains", "B", "A"), P("contains", "B", "C")),
             P("complements", "A", "C"), distinct=("A", "C"),
             text="part_of(A,B), contains(B,C), A != C => complements(A,C)"),
    RuleSpec("R11", (P("tests", "A", "B"), P("tests", "C", "B")),
             P("complements", "A", "C"), distinct=("A", "C"),
             text="tests(A,B), tests(C,B), A != C => complements(A,C)"),
    RuleSpec("R12", (P("tests", "A", "B"), P("refines", "B", "C")),
             P("validates", "A", "C"), guards=(("C", NLRQ),),
             text="tests(A,B), refines(B,C), C in NLRQ => validates(A,C)"),
    RuleSpec("R13", (P("is_a_client", "A", "B"),), P("refers_to", "A", "B"),
             text="is_a_client(A,B) => refers_to(A,B)"),
    RuleSpec("R14", (P("refers_to", "A", "B"), P("refers_to", "B", "C")),
             P("refers_to", "A", "C"), distinct=("A", "C"),
             text="refers_to(A,B), refers_to(B,C), A != C => refers_to(A,C)"),
)
RULES_BY_ID = {r.id: r for r in RULES}


# -- closure -----------------------------------------------------------------

@dataclass(frozen=True)
class DerivationTrace:
    rule_id: str
    premises: tuple[Premise, ...]


@dataclass(frozen=True)
class Suppressed:
    rule_id: str
    atom: LinkAtom
    violation: TypingViolation

    def __str__(self) -> str:
        return f"{self.rule_id} suppressed {self.atom}: {self.violation}"


@dataclass
class Closure:
    derived: dict[LinkAtom, DerivationTrace] = field(default_factory=dict)
    suppressed: list[Suppressed] = field(default_factory=list)

    def links(self) -> set[LinkAtom]:
        return set(self.derived)

    def __iter__(self):
        return iter(self.derived.items())

    def __len__(self) -> int:
        return len(self.derived)


def _fact_atoms(facts) -> list[FactAtom]:
    if facts is None:
        return []
    out = []
    for name in FACT_RELATIONS:
        for src, tgt in getattr(facts, name, ()) or ():
            out.append(FactAtom(name, src, tgt))
    return out


def _validate(asserted: Iterable[LinkAtom], facts: list[FactAtom]) -> list[LinkAtom]:
    atoms = sorted(set(asserted), key=LinkAtom.sort_key)
    kinds: dict[Locator, ElementKind] = {}
    for a in atoms:
        v = check_typing(a)
        if v is not None:
            raise TypingError(v)
    for end in itertools.chain.from_iterable((x.source, x.target) for x in [*atoms, *facts]):
        seen = kinds.setdefault(end.locator, end.kind)
        if seen is not end.kind:
            raise ValueError(f"{end.locator} appears with kinds {seen.value} and {end.kind.value}")
    return atoms


def elements_of(asserted: Iterable[LinkAtom], facts=None) -> set[Locator]:
    out = set()
    for x in itertools.chain(asserted, _fact_atoms(facts)):
        out.add(x.source.locator)
        out.add(x.target.locator)
    return out


def size_bound(asserted: Iterable[LinkAtom], facts=None) -> int:
    return len(RELATIONS) * len(elements_of(list(asserted), facts)) ** 2


class _Index:
    """Processed links by relation, in insertion order."""

    def __init__(self):
        self.fwd: dict[str, dict[ElementRef, dict[ElementRef, None]]] = {r: {} for r in RELATIONS}
        self.bwd: dict[str, dict[ElementRef, dict[ElementRef, None]]] = {r: {} for r in RELATIONS}

    def add(self, a: LinkAtom) -> None:
        self.fwd[a.relation].setdefault(a.source, {})[a.target] = None
        self.bwd[a.relation].setdefault(a.target, {})[a.source] = None

    def succ(self, rel: str, x: ElementRef):
        return list(self.fwd[rel].get(x, ()))

    def pred(self, rel: str, x: ElementRef):
        return list(self.bwd[rel].get(x, ()))


def close(asserted: Iterable[LinkAtom], facts=None) -> Closure:
    """Least fixpoint of R1..R14 over ``asserted`` and structural ``facts``.

    ``facts`` is any object with ``inherits`` and ``is_a_client`` iterables of
    ``(ElementRef, ElementRef)`` pairs.  Asserted links are not repeated in the
    result.  Raises :class:`TypingError` on an ill-typed asserted link.
    """
    fact_atoms = _fact_atoms(facts)
    atoms = _validate(asserted, fact_atoms)
    result = Closure()
    known: set[LinkAtom] = set(atoms)
    suppressed: set[tuple[str, LinkAtom]] = set()
    queue: deque[LinkAtom] = deque(atoms)
    idx = _Index()

    def emit(rule_id: str, src: ElementRef, rel: str, tgt: ElementRef, *premises: Premise):
        if src.locator == tgt.locator:
            return
        atom = LinkAtom(src, rel, tgt)
        if atom in known:
            return
        v = check_typing(atom)
        if v is not None:
            if (rule_id, atom) not in suppressed:
                suppressed.add((rule_id, atom))
                result.suppressed.append(Suppressed(rule_id, atom, v))
            return
        known.add(atom)
        result.derived[atom] = DerivationTrace(rule_id, premises)
        queue.append(atom)

    for f in fact_atoms:
        if f.relation == "inherits":
            emit("R7", f.source, "refines", f.target, f)
        else:
            emit("R13", f.source, "refers_to", f.target, f)

    while queue:
        link = queue.popleft()
        idx.add(link)
        rel, x, y = link.relation, link.source, link.target

        if rel == "repeats":
            emit("R1", y, "repeats", x, link)
            # R2 and R3 with this link as the repeats premise
            for r in RELATION_NAMES:
                for c in idx.succ(r, y):
                    emit("R2", x, r, c, link, LinkAtom(y, r, c))
            for r in RELATION_NAMES:
                for d in idx.succ(r, x):
                    emit("R3", y, r, d, link, LinkAtom(x, r, d))
        # R2 and R3 with this link as the R premise
        for a in idx.pred("repeats", x):
            emit("R2", a, rel, y, LinkAtom(a, "repeats", x), link)
        for b in idx.succ("repeats", x):
            emit("R3", b, rel, y, LinkAtom(x, "repeats", b), link)

        if rel == "complements":
            emit("R4", y, "complements", x, link)
        elif rel in ("constrains", "tests"):
            rid = "R5" if rel == "constrains" else "R11"
            for c in idx.pred(rel, y):
                if c.locator != x.locator:
                    emit(rid, x, "complements", c, link, LinkAtom(c, rel, y))
                    emit(rid, c, "complements", x, LinkAtom(c, rel, y), link)
            if rel == "tests":
                for c in idx.succ("refines", y):
                    if c.kind in NLRQ:
                        emit("R12", x, "validates", c, link, LinkAtom(y, "refines", c))
        elif rel in ("refines", "contains", "refers_to"):
            rid = {"refines": "R6", "contains": "R9", "refers_to": "R14"}[rel]
            for c in idx.succ(rel, y):
                if c.locator != x.locator:
                    emit(rid, x, rel, c, link, LinkAtom(y, rel, c))
            for a in idx.pred(rel, x):
                if a.locator != y.locator:
                    emit(rid, a, rel, y, LinkAtom(a, rel, x), link)
            if rel == "refines":
                if x.kind in IM and y.kind in REQUIREMENT_TARGETS:
                    emit("R8", x, "implements", y, link)
                if y.kind in NLRQ:
                    for a in idx.pred("tests", x):
                        emit("R12", a, "validates", y, LinkAtom(a, "tests", x), link)
            elif rel == "contains":
                # part_of(A,x) & contains(x,C) with this link as either side
                for other in idx.succ("contains", x):
                    if other.locator != y.locator:
                        emit("R10", y, "complements", other, link, LinkAtom(x, "contains", other))
                        emit("R10", other, "complements", y, LinkAtom(x, "contains", other), link)

    result.suppressed.sort(key=lambda s: (s.rule_id, s.atom.sort_key()))
    return result


# -- reference oracle --------------------------------------------------------

def _match(premises, by_rel, binding):
    if not premises:
        yield binding
        return
    first, rest = premises[0], premises[1:]
    if first.relation == "?R":
        rels = [binding["?R"]] if "?R" in binding else list(RELATION_NAMES)
    else:
        rels = [first.relation]
    for rel in rels:
        for (src, tgt) in by_rel.get(rel, ()):
            b = dict(binding)
            if first.relation == "?R":
                b["?R"] = rel
            ok = True
            for var, val in ((first.source, src), (first.target, tgt)):
                if var in b and b[var] != val:
                    ok = False
                    break
                b[var] = val
            if ok:
                yield from _match(rest, by_rel, b)


def close_reference(asserted: Iterable[LinkAtom], facts=None) -> set[LinkAtom]:
    """Naive fixpoint: rescan every rule instantiation until nothing is added."""
    fact_atoms = _fact_atoms(facts)
    atoms = _validate(asserted, fact_atoms)
    current: set[tuple[str, ElementRef, ElementRef]] = {(a.relation, a.source, a.target) for a in atoms}
    current |= {(f.relation, f.source, f.target) for f in fact_atoms}
    base = set(current)
    changed = True
    while changed:
        by_rel: dict[str, list] = {}
        for rel, s, t in current:
            by_rel.setdefault(rel, []).append((s, t))
        new = set()
        for rule in RULES:
            for b in _match(rule.premises, by_rel, {}):
                if rule.distinct and b[rule.distinct[0]].locator == b[rule.distinct[1]].locator:
                    continue
                if any(b[var].kind not in allowed for var, allowed in rule.guards):
                    continue
                c = rule.conclusion
                rel = b["?R"] if c.relation == "?R" else c.relation
                src, tgt = b[c.source], b[c.target]
                if src.locator == tgt.locator:
                    continue
                if check_typing(LinkAtom(src, rel, tgt)) is not None:
                    continue
                if (rel, src, tgt) not in current:
                    new.add((rel, src, tgt))
        current |= new
        changed = bool(new)
    return {LinkAtom(s, rel, t) for rel, s, t in current - base if rel in RELATIONS}


# -- queries -----------------------------------------------------------------

def query(links: Iterable[LinkAtom], name: str, element: ElementRef | Locator | None = None):
    """Pairs ``(x, y)`` such that ``x <name> y`` holds in ``links``.

    Inverse names answer the mirrored pairs of their canonical relation and
    symmetric relations answer both directions.  With ``element``, only pairs
    having it at either end are returned.
    """
    rel, inverted = resolve(name)
    loc = element.locator if isinstance(element, ElementRef) else element
    out = set()
    for a in links:
        if a.relation != rel.name:
            continue
        pairs = [(a.source, a.target)]
        if rel.symmetric:
            pairs.append((a.target, a.source))
        elif inverted:
            pairs = [(a.target, a.source)]
        for p in pairs:
            if loc is None or loc in (p[0].locator, p[1].locator):
                out.add(p)
    return out
