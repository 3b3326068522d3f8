"""Use-case story enumeration for contracted routines.

Three independent case generators are summed, not crossed:

* a precondition clause whose root is ``or`` gives one story per disjunct;
* the body loop's exit condition gives one story per top-level disjunct;
* a postcondition clause whose root is ``implies`` gives two stories, one
  with the antecedent true and one with it false and the consequent true.

A routine where no generator fires has a single main-path story.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import BinOp, ContractClause, FeatureDecl, Not, disjuncts, render


@dataclass(frozen=True)
class Story:
    feature: str
    index: int
    origin: str  # "require" | "loop-exit" | "ensure" | "main"
    case: str
    condition: str
    clause: str

    @property
    def name(self) -> str:
        return f"{self.feature}_story_{self.index}"


def _label(clause: ContractClause) -> str:
    return f"{clause.tag}: {clause.text}" if clause.tag else clause.text


def enumerate_stories(feature: FeatureDecl) -> list[Story]:
    cases: list[tuple[str, str, str, str]] = []
    for clause in feature.require_clauses:
        if isinstance(clause.expr, BinOp) and clause.expr.op == "or":
            parts = disjuncts(clause.expr)
            for i, d in enumerate(parts, 1):
                cases.append(("require", f"precondition disjunct {i} of {len(parts)}", render(d), _label(clause)))
    exit_ = feature.body_loop_exit
    if exit_ is not None:
        parts = disjuncts(exit_.expr)
        for i, d in enumerate(parts, 1):
            cases.append(("loop-exit", f"loop exit {i} of {len(parts)}", render(d), _label(exit_)))
    for clause in feature.ensure_clauses:
        e = clause.expr
        if isinstance(e, BinOp) and e.op == "implies":
            cases.append(("ensure", "antecedent true", render(e.left), _label(clause)))
            cases.append(("ensure", "antecedent false, consequent true",
                          f"{render(Not(e.left))} and {_paren(e.right)}", _label(clause)))
    if not cases:
        pre = " and ".join(_paren(c.expr) for c in feature.require_clauses) or "True"
        cases.append(("main", "main path", pre, "(none)"))
    return [Story(feature.name, i, *c) for i, c in enumerate(cases, 1)]


def _paren(expr) -> str:
    text = render(expr)
    return f"({text})" if isinstance(expr, BinOp) and expr.op != "and" else text


def story_skeleton(class_name: str, stories: list[Story]) -> str:
    """Story routines in the notation, for a class inheriting ``class_name``."""
    lines = [f"class {class_name}_STORIES inherit {class_name} feature"]
    for s in stories:
        lines.append(f"    {s.name}")
        lines.append(f"            -- {s.origin}: {s.case}")
        lines.append(f"        require {s.condition}")
        lines.append(f"        do {s.feature}")
        lines.append("        end")
    lines.append("end")
    return "\n".join(lines) + "\n"
