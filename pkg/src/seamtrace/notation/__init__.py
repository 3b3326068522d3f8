"""The contracted-class notation: parsing, facts, refinement checks, stories."""

from __future__ import annotations

from pathlib import Path

from .ast import ClassDecl, ContractClause, Diagnostic, FeatureDecl
from .facts import FactBase, extract_facts
from .parser import parse_expression, parse_source
from .refinement import RefinementIssue, check_refinement
from .stories import Story, enumerate_stories

__all__ = [
    "ClassDecl", "ContractClause", "Diagnostic", "FeatureDecl", "FactBase", "RefinementIssue",
    "Story", "check_refinement", "enumerate_stories", "extract_facts", "load_sources",
    "parse_expression", "parse_source",
]


def load_sources(root: Path, relpaths: list[str]) -> FactBase:
    """Parse every source file (paths relative to ``root``) into one fact base."""
    decls: list[ClassDecl] = []
    diags: list[Diagnostic] = []
    for rel in sorted(relpaths):
        text = (Path(root) / rel).read_text(encoding="utf-8")
        classes, d = parse_source(text, rel)
        decls.extend(classes)
        diags.extend(d)
    facts = extract_facts(decls)
    facts.diagnostics = diags + facts.diagnostics
    return facts
