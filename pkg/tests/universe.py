"""Random well-typed link universes shared by the relation and acceptance tests."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from seamtrace.elements import ALL_KINDS, CodeLocator, DocLocator, ElementKind, ElementRef, Group
from seamtrace.relations import RELATION_NAMES, LinkAtom, check_typing
from seamtrace.store import LinkStore

FIXTURES = Path(__file__).parent / "fixtures"
KINDS = sorted(ALL_KINDS, key=lambda k: k.value)


@dataclass
class Facts:
    inherits: list = field(default_factory=list)
    is_a_client: list = field(default_factory=list)


def element(i: int, kind: ElementKind) -> ElementRef:
    if kind.group is Group.NLRQ:
        return ElementRef(DocLocator("reqs/r.md", f"p{i:04d}"), kind)
    return ElementRef(CodeLocator("src/m.spec", f"C{i}"), kind)


def universe(rng: random.Random, n_elements: int, n_links: int, with_facts: bool = True):
    """``(elements, asserted links, facts)``; every link passes check_typing."""
    elems = [element(i, rng.choice(KINDS)) for i in range(1, n_elements + 1)]
    links: set[LinkAtom] = set()
    attempts = 0
    while len(links) < n_links and attempts < n_links * 50:
        attempts += 1
        a, b = rng.choice(elems), rng.choice(elems)
        if a == b:
            continue
        atom = LinkAtom(a, rng.choice(RELATION_NAMES), b)
        if check_typing(atom) is None:
            links.add(atom)
    facts = Facts()
    if with_facts:
        code = [e for e in elems if isinstance(e.locator, CodeLocator)]
        for _ in range(rng.randint(0, 2) if len(code) > 1 else 0):
            a, b = rng.sample(code, 2)
            getattr(facts, rng.choice(["inherits", "is_a_client"])).append((a, b))
    return elems, sorted(links, key=LinkAtom.sort_key), facts


def fill_store(links):
    """A LinkStore asserting ``links``; a symmetric link given both ways is stored once."""
    store = LinkStore()
    for a in links:
        if store.find(a) is None:
            store.add_link(a.source, a.relation, a.target)
    return store
