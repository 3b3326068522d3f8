"""Syntactic conformance of redeclared features to their ancestors.

A redeclaration may drop precondition clauses (weakening) and add
postcondition clauses (strengthening), nothing else.  Clauses are compared by
normalized text, never by logical entailment.  ``require else`` and
``ensure then`` redeclarations combine with the inherited contract the Eiffel
way (or-else / and-then), so they conform by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Span
from .facts import FactBase

PRE_STRENGTHENED = "precondition strengthened"
POST_WEAKENED = "postcondition weakened"
INV_INHERITED = "invariant inherited"


@dataclass(frozen=True)
class RefinementIssue:
    kind: str
    descendant: str
    ancestor: str
    clause: str
    span: Span | None = None

    @property
    def is_violation(self) -> bool:
        return self.kind != INV_INHERITED

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.kind}: {self.descendant} vs {self.ancestor}: {self.clause}"


def check_refinement(facts: FactBase) -> list[RefinementIssue]:
    issues: list[RefinementIssue] = []
    for child, parent in facts.inherits:
        c, p = child.locator, parent.locator
        if c.feature is None:
            for anc in [p.class_name, *facts.ancestors(p.class_name)]:
                for clause in facts.classes[anc].invariant_clauses:
                    issues.append(RefinementIssue(INV_INHERITED, c.class_name, anc, clause.text))
            continue
        mine = facts.find_feature(c)
        theirs = facts.find_feature(p)
        if mine is None or theirs is None:
            continue
        d_name = f"{c.class_name}.{c.feature}"
        a_name = f"{p.class_name}.{p.feature}"
        if not mine.require_else:
            allowed = {x.normalized for x in theirs.require_clauses}
            for clause in mine.require_clauses:
                if clause.normalized not in allowed:
                    issues.append(RefinementIssue(PRE_STRENGTHENED, d_name, a_name, clause.text, clause.span))
        if not mine.ensure_then:
            kept = {x.normalized for x in mine.ensure_clauses}
            for clause in theirs.ensure_clauses:
                if clause.normalized not in kept:
                    issues.append(RefinementIssue(POST_WEAKENED, d_name, a_name, clause.text, mine.span))
    # an invariant reached through two parents is reported once
    seen = set()
    out = []
    for i in issues:
        key = (i.kind, i.descendant, i.ancestor, i.clause)
        if key not in seen:
            seen.add(key)
            out.append(i)
    return out


def violations(issues: list[RefinementIssue]) -> list[RefinementIssue]:
    return [i for i in issues if i.is_violation]
