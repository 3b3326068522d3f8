"""Persistent link store (``trace.links``).

The file is line oriented and canonical::

    seamtrace-links v1
    L000001<TAB>src-kind<TAB>src-locator<TAB>relation<TAB>tgt-kind<TAB>tgt-locator<TAB>provenance<TAB>created_at

Provenance is ``asserted`` or ``derived:<rule-id>:<premise ids>``.  Records are
sorted by id.  Symmetric relations are stored once; the row answers both
directions.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from datetime import datetime

from .elements import ElementKind, ElementRef, LocatorError, parse_locator
from .fsutil import atomic_write_text, format_ts, parse_ts, utcnow
from .relations import (
    INVERSE_OF,
    RELATIONS,
    RULES_BY_ID,
    Closure,
    LinkAtom,
    check_typing,
)

HEADER = "seamtrace-links v1"
_ID_RE = re.compile(r"L[0-9]{6}")


class StoreError(Exception):
    pass


class StoreFormatError(StoreError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


@dataclass(frozen=True)
class LinkRecord:
    id: str
    source: ElementRef
    relation: str
    target: ElementRef
    rule_id: str | None = None
    premises: tuple[str, ...] = ()
    created_at: datetime = field(default_factory=utcnow)

    @property
    def asserted(self) -> bool:
        return self.rule_id is None

    @property
    def atom(self) -> LinkAtom:
        return LinkAtom(self.source, self.relation, self.target)

    @property
    def provenance(self) -> str:
        if self.rule_id is None:
            return "asserted"
        return f"derived:{self.rule_id}:{','.join(self.premises)}"

    @property
    def short_provenance(self) -> str:
        return "asserted" if self.rule_id is None else f"derived:{self.rule_id}"

    def to_line(self) -> str:
        return "\t".join([
            self.id,
            self.source.kind.value, str(self.source.locator),
            self.relation,
            self.target.kind.value, str(self.target.locator),
            self.provenance,
            format_ts(self.created_at),
        ])


def triple_key(atom: LinkAtom):
    """Identity of a stored link; symmetric links are unordered."""
    s, t = str(atom.source.locator), str(atom.target.locator)
    if RELATIONS[atom.relation].symmetric and t < s:
        s, t = t, s
    return (atom.relation, s, t)


def _parse_provenance(text: str, lineno: int):
    if text == "asserted":
        return None, ()
    parts = text.split(":")
    if len(parts) != 3 or parts[0] != "derived":
        raise StoreFormatError(f"bad provenance {text!r}", lineno)
    rule_id, ids = parts[1], parts[2]
    if rule_id not in RULES_BY_ID:
        raise StoreFormatError(f"unknown rule id {rule_id!r}", lineno)
    premises = tuple(ids.split(",")) if ids else ()
    for pid in premises:
        if not _ID_RE.fullmatch(pid):
            raise StoreFormatError(f"bad premise id {pid!r}", lineno)
    return rule_id, premises


def _parse_end(kind: str, loc: str, lineno: int) -> ElementRef:
    try:
        return ElementRef(parse_locator(loc), ElementKind.parse(kind))
    except (LocatorError, ValueError) as exc:
        raise StoreFormatError(str(exc), lineno) from None


def parse_record(line: str, lineno: int) -> LinkRecord:
    fields = line.split("\t")
    if len(fields) != 8:
        raise StoreFormatError(f"expected 8 tab-separated fields, got {len(fields)}", lineno)
    rid, skind, sloc, rel, tkind, tloc, prov, ts = fields
    if not _ID_RE.fullmatch(rid):
        raise StoreFormatError(f"bad record id {rid!r}", lineno)
    if rel not in RELATIONS:
        hint = f" (inverse of {INVERSE_OF[rel]!r})" if rel in INVERSE_OF else ""
        raise StoreFormatError(f"bad relation {rel!r}{hint}", lineno)
    source = _parse_end(skind, sloc, lineno)
    target = _parse_end(tkind, tloc, lineno)
    rule_id, premises = _parse_provenance(prov, lineno)
    try:
        created = parse_ts(ts)
    except ValueError:
        raise StoreFormatError(f"bad timestamp {ts!r}", lineno) from None
    return LinkRecord(rid, source, rel, target, rule_id, premises, created)


class LinkStore:
    def __init__(self, records=()):
        self.records: dict[str, LinkRecord] = {}
        self._by_key: dict[tuple, str] = {}
        for r in records:
            self._insert(r)

    def _insert(self, rec: LinkRecord) -> None:
        if rec.id in self.records:
            raise StoreError(f"duplicate id {rec.id}")
        key = triple_key(rec.atom)
        if key in self._by_key:
            raise StoreError(f"duplicate link {rec.atom} (already {self._by_key[key]})")
        self.records[rec.id] = rec
        self._by_key[key] = rec.id

    def _delete(self, rid: str) -> LinkRecord:
        rec = self.records.pop(rid)
        del self._by_key[triple_key(rec.atom)]
        return rec

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(sorted(self.records.values(), key=lambda r: r.id))

    def __eq__(self, other) -> bool:
        return isinstance(other, LinkStore) and self.records == other.records

    def get(self, rid: str) -> LinkRecord:
        try:
            return self.records[rid]
        except KeyError:
            raise StoreError(f"unknown link id {rid}") from None

    def find(self, atom: LinkAtom) -> LinkRecord | None:
        rid = self._by_key.get(triple_key(atom))
        return self.records[rid] if rid else None

    def asserted(self) -> list[LinkRecord]:
        return [r for r in self if r.asserted]

    def derived(self) -> list[LinkRecord]:
        return [r for r in self if not r.asserted]

    def atoms(self) -> list[LinkAtom]:
        return [r.atom for r in self]

    def incident(self, locator) -> list[LinkRecord]:
        return [r for r in self if locator in (r.source.locator, r.target.locator)]

    def kind_of(self, locator) -> ElementKind | None:
        for r in self.records.values():
            if r.source.locator == locator:
                return r.source.kind
            if r.target.locator == locator:
                return r.target.kind
        return None

    def next_id(self) -> str:
        n = max((int(rid[1:]) for rid in self.records), default=0) + 1
        return f"L{n:06d}"

    def add_link(self, source: ElementRef, relation: str, target: ElementRef,
                 now: datetime | None = None) -> LinkRecord:
        if relation in INVERSE_OF:
            raise StoreError(
                f"{relation!r} is an inverse name; assert {target} {INVERSE_OF[relation]} {source} instead")
        atom = LinkAtom(source, relation, target)
        v = check_typing(atom)
        if v is not None:
            raise StoreError(f"ill-typed link: {v}")
        for end in (source, target):
            known = self.kind_of(end.locator)
            if known is not None and known is not end.kind:
                raise StoreError(f"{end.locator} is already typed {known.value}, not {end.kind.value}")
        existing = self.find(atom)
        if existing is not None:
            raise StoreError(f"duplicate link {atom} (already {existing.id})")
        rec = LinkRecord(self.next_id(), source, relation, target, created_at=now or utcnow())
        self._insert(rec)
        return rec

    def remove_link(self, rid: str) -> tuple[LinkRecord, list[LinkRecord]]:
        """Delete ``rid`` and every derived record whose trace depends on it."""
        removed = self._delete(self.get(rid).id)
        gone = {rid}
        cascade = []
        changed = True
        while changed:
            changed = False
            for rec in list(self):
                if not rec.asserted and gone.intersection(rec.premises):
                    cascade.append(self._delete(rec.id))
                    gone.add(rec.id)
                    changed = True
        return removed, sorted(cascade, key=lambda r: r.id)

    def apply_closure(self, closure: Closure, now: datetime | None = None) -> dict:
        """Replace the derived section with ``closure``.

        Derived records whose triple survives keep their id and timestamp;
        their trace is refreshed.  Returns counts of added, kept and dropped.
        """
        now = now or utcnow()
        old = {triple_key(r.atom): r for r in self.derived()}
        asserted_keys = {triple_key(r.atom) for r in self.asserted()}
        wanted: dict[tuple, tuple] = {}
        for atom, trace in closure:
            key = triple_key(atom)
            if key in asserted_keys or key in wanted:
                continue
            wanted[key] = (atom, trace)
        for key, rec in old.items():
            if key not in wanted:
                self._delete(rec.id)
        ids: dict[tuple, str] = {triple_key(r.atom): r.id for r in self.asserted()}
        pending = []
        for key, (atom, trace) in wanted.items():
            if key in old:
                ids[key] = old[key].id
            else:
                pending.append(key)
        n = max((int(r[1:]) for r in self.records), default=0)
        for key in pending:
            n += 1
            ids[key] = f"L{n:06d}"
        for key, (atom, trace) in wanted.items():
            premises = tuple(ids[triple_key(p)] for p in trace.premises if isinstance(p, LinkAtom))
            prior = old.get(key)
            rec = LinkRecord(ids[key], atom.source, atom.relation, atom.target,
                             trace.rule_id, premises, prior.created_at if prior else now)
            if prior is not None:
                self.records[rec.id] = rec
            else:
                self._insert(rec)
        self.validate()
        return {"added": len(pending), "kept": len(wanted) - len(pending),
                "dropped": sum(1 for k in old if k not in wanted)}

    def validate(self) -> None:
        for rec in self.records.values():
            for pid in rec.premises:
                if pid not in self.records:
                    raise StoreError(f"{rec.id}: dangling premise id {pid}")

    def chain(self, rid: str) -> list[str]:
        """Rule ids along the derivation of ``rid``, premises first."""
        out: list[str] = []
        seen = set()

        def walk(x: str):
            if x in seen:
                return
            seen.add(x)
            rec = self.records[x]
            for p in rec.premises:
                walk(p)
            if rec.rule_id and rec.rule_id not in out:
                out.append(rec.rule_id)

        walk(rid)
        return out


def dumps(store: LinkStore) -> str:
    return "".join(f"{line}\n" for line in [HEADER, *(r.to_line() for r in store)])


def loads(text: str) -> LinkStore:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != HEADER:
        raise StoreFormatError(f"missing header {HEADER!r}", 1)
    store = LinkStore()
    where: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if "\r" in line:
            raise StoreFormatError("CR in line; expected LF line endings", lineno)
        rec = parse_record(line, lineno)
        try:
            store._insert(rec)
        except StoreError as exc:
            raise StoreFormatError(str(exc), lineno) from None
        where[rec.id] = lineno
    for rec in store:
        for pid in rec.premises:
            if pid not in store.records:
                raise StoreFormatError(f"dangling premise id {pid}", where[rec.id])
    return store


def load(path: str | os.PathLike) -> LinkStore:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads(fh.read())


def save(store: LinkStore, path: str | os.PathLike) -> None:
    store.validate()
    atomic_write_text(path, dumps(store))

