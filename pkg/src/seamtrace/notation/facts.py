"""Structural facts extracted from parsed classes.

Produces the element kinds of every class and feature, ``inherits`` edges
(class level, and feature level for redeclared features), ``is_a_client``
edges, and the asserted links declared by ``note trace:`` annotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..elements import (
    COMPONENT_KIND,
    DEFAULT_DOC_KIND,
    FEATURE_KIND,
    CodeLocator,
    DocLocator,
    ElementKind,
    ElementRef,
    Group,
    LocatorError,
    parse_locator,
)
from ..relations import INVERSE_OF, RELATIONS, LinkAtom, check_typing
from .ast import ClassDecl, Diagnostic, FeatureDecl, Span

BASIC_TYPES = frozenset("""
    ANY NONE BOOLEAN CHARACTER CHARACTER_8 CHARACTER_32 INTEGER INTEGER_8 INTEGER_16
    INTEGER_32 INTEGER_64 NATURAL NATURAL_8 NATURAL_16 NATURAL_32 NATURAL_64 REAL REAL_32
    REAL_64 DOUBLE STRING STRING_8 STRING_32 POINTER ARRAY ARRAY2 LIST ARRAYED_LIST
    LINKED_LIST HASH_TABLE TUPLE SET DATE TIME DATE_TIME like
""".split())


@dataclass
class FactBase:
    classes: dict[str, ClassDecl] = field(default_factory=dict)
    elements: dict[CodeLocator, ElementRef] = field(default_factory=dict)
    inherits: list[tuple[ElementRef, ElementRef]] = field(default_factory=list)
    is_a_client: list[tuple[ElementRef, ElementRef]] = field(default_factory=list)
    annotation_links: list[LinkAtom] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def class_ref(self, name: str) -> ElementRef:
        decl = self.classes[name]
        return self.elements[CodeLocator(decl.path, name)]

    def feature_ref(self, class_name: str, feature: str) -> ElementRef:
        decl = self.classes[class_name]
        return self.elements[CodeLocator(decl.path, class_name, feature)]

    def lookup(self, locator) -> ElementRef | None:
        return self.elements.get(locator)

    def find_feature(self, locator: CodeLocator) -> FeatureDecl | None:
        decl = self.classes.get(locator.class_name)
        if decl is None or decl.path != locator.path or locator.feature is None:
            return None
        return decl.feature(locator.feature)

    def ancestors(self, name: str) -> list[str]:
        """Proper ancestors of ``name``, nearest first (breadth-first)."""
        out: list[str] = []
        queue = list(self.classes[name].parents) if name in self.classes else []
        while queue:
            p = queue.pop(0)
            if p in out or p == name or p not in self.classes:
                continue
            out.append(p)
            queue.extend(self.classes[p].parents)
        return out

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]


def resolve_kind_note(note: str, feature_level: bool) -> ElementKind:
    try:
        group = Group(note.upper())
    except ValueError:
        group = None
    if group is not None:
        table = FEATURE_KIND if feature_level else COMPONENT_KIND
        if group not in table:
            raise ValueError(f"code elements cannot be in group {group.value}")
        return table[group]
    kind = ElementKind.parse(note)
    if kind.group is Group.NLRQ:
        raise ValueError(f"code elements cannot have the NL kind {kind.value}")
    return kind


def extract_facts(decls: list[ClassDecl]) -> FactBase:
    fb = FactBase()
    diag = fb.diagnostics

    def warn(span: Span | None, msg: str, severity: str = "warning"):
        diag.append(Diagnostic(span or Span("", 0, 0), severity, msg))

    for d in decls:
        if d.name in fb.classes:
            other = fb.classes[d.name]
            warn(d.span, f"class {d.name} already declared at {other.span}", "error")
            continue
        fb.classes[d.name] = d

    # element kinds
    for d in fb.classes.values():
        ckind = COMPONENT_KIND[Group.OORQ if d.deferred else Group.IM]
        if d.kind_note:
            try:
                ckind = resolve_kind_note(d.kind_note, feature_level=False)
            except ValueError as exc:
                warn(d.span, f"{d.name}: {exc}", "error")
        fb.elements[CodeLocator(d.path, d.name)] = ElementRef(CodeLocator(d.path, d.name), ckind)
        for f in d.features:
            fkind = FEATURE_KIND[ckind.group]
            if f.kind_note:
                try:
                    fkind = resolve_kind_note(f.kind_note, feature_level=True)
                except ValueError as exc:
                    warn(f.span, f"{d.name}.{f.name}: {exc}", "error")
            loc = CodeLocator(d.path, d.name, f.name)
            fb.elements[loc] = ElementRef(loc, fkind)

    # inheritance, class and feature level
    for d in fb.classes.values():
        me = fb.class_ref(d.name)
        for p in d.parents:
            if p not in fb.classes:
                warn(d.span, f"{d.name}: unknown parent class {p}", "error")
                continue
            if p == d.name or d.name in fb.ancestors(p):
                warn(d.span, f"{d.name}: inheritance cycle through {p}", "error")
                continue
            fb.inherits.append((me, fb.class_ref(p)))
            for f in d.features:
                for anc in [p, *fb.ancestors(p)]:
                    if fb.classes[anc].feature(f.name) is not None:
                        fb.inherits.append((fb.feature_ref(d.name, f.name), fb.feature_ref(anc, f.name)))
                        break

    # client relation
    for d in fb.classes.values():
        me = fb.class_ref(d.name)
        seen: list[str] = []
        for f in d.features:
            for ty in f.type_refs():
                for name in ty.names():
                    if name == d.name or name in seen:
                        continue
                    if name in fb.classes:
                        seen.append(name)
                        fb.is_a_client.append((me, fb.class_ref(name)))
                    elif name not in BASIC_TYPES:
                        seen.append(name)
                        warn(f.span, f"{d.name}.{f.name}: unknown type {name}")

    # annotations
    for d in fb.classes.values():
        holders = [(fb.class_ref(d.name), d.annotations)]
        holders += [(fb.feature_ref(d.name, f.name), f.annotations) for f in d.features]
        for owner, notes in holders:
            for a in notes:
                atom = _annotation_link(fb, owner, a, warn)
                if atom is not None and atom not in fb.annotation_links:
                    fb.annotation_links.append(atom)

    fb.inherits.sort(key=lambda e: (str(e[0]), str(e[1])))
    fb.is_a_client.sort(key=lambda e: (str(e[0]), str(e[1])))
    fb.diagnostics.sort(key=lambda x: (x.span.path, x.span.line, x.span.col, x.message))
    return fb


def _annotation_link(fb: FactBase, owner: ElementRef, a, warn) -> LinkAtom | None:
    rel = a.relation
    if rel not in RELATIONS and rel not in INVERSE_OF:
        warn(a.span, f"unknown relation {rel!r} in trace note", "error")
        return None
    try:
        loc = parse_locator(a.target)
    except LocatorError as exc:
        warn(a.span, str(exc), "error")
        return None
    try:
        kind = ElementKind.parse(a.kind) if a.kind else None
    except ValueError as exc:
        warn(a.span, str(exc), "error")
        return None
    if isinstance(loc, DocLocator):
        other = ElementRef(loc, kind or DEFAULT_DOC_KIND) if (kind is None or kind.group is Group.NLRQ) else None
        if other is None:
            warn(a.span, f"{loc}: document elements need an NL kind, not {kind.value}", "error")
            return None
    else:
        other = fb.lookup(loc)
        if other is None:
            warn(a.span, f"trace target {loc} does not exist", "error")
            return None
        if kind is not None and kind is not other.kind:
            warn(a.span, f"{loc} is {other.kind.value}; kind override {kind.value} ignored")
    if rel in INVERSE_OF:
        atom = LinkAtom(other, INVERSE_OF[rel], owner)
    else:
        atom = LinkAtom(owner, rel, other)
    v = check_typing(atom)
    if v is not None:
        warn(a.span, f"ill-typed trace note: {v}", "error")
        return None
    return atom
