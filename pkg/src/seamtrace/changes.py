"""Change detection against stored snapshots and link-based impact reports."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .bookmarks import DocSnapshot, SnapshotError, split_paragraphs
from .elements import DocLocator, ElementRef, Locator
from .fsutil import file_mtime, format_ts
from .relations import perspective_name, resolve
from .store import LinkStore

CHANGE_TYPES = ("modified", "added", "removed")


@dataclass(frozen=True)
class ChangeRecord:
    doc: str
    mtime: datetime
    bookmark: str
    change_type: str
    new_digest: str | None = None
    text: str | None = None

    @property
    def locator(self) -> DocLocator:
        return DocLocator(self.doc, self.bookmark)


@dataclass(frozen=True)
class ImpactRow:
    change: ChangeRecord
    element: ElementRef
    link_id: str
    relation: str
    provenance: str

    def porcelain(self) -> str:
        c = self.change
        return "\t".join([c.doc, format_ts(c.mtime), c.bookmark, c.change_type, self.relation,
                          str(self.element.locator), self.link_id, self.provenance])


@dataclass
class ChangeReport:
    rows: list[ImpactRow]
    unlinked: list[ChangeRecord]
    warnings: list[str]
    snapshots: dict[str, DocSnapshot]

    @property
    def changes(self) -> list[ChangeRecord]:
        seen = {}
        for c in [*(r.change for r in self.rows), *self.unlinked]:
            seen[(c.doc, c.bookmark)] = c
        return [seen[k] for k in sorted(seen, key=_change_key)]

    def porcelain(self) -> str:
        return "".join(r.porcelain() + "\n" for r in self.rows)


def _change_key(key: tuple[str, str]):
    doc, bmk = key
    return doc, int(bmk[1:])


def diff_snapshots(prior: DocSnapshot, current: DocSnapshot, mtime: datetime,
                   texts: dict[str, str] | None = None) -> list[ChangeRecord]:
    """Changed bookmarks between two snapshots of the same document, in id order."""
    texts = texts or {}
    old = {e.bookmark: e.digest for e in prior.entries}
    new = {e.bookmark: e.digest for e in current.entries}
    out = []
    for bmk in sorted(old.keys() | new.keys(), key=lambda b: int(b[1:])):
        if bmk not in new:
            out.append(ChangeRecord(current.path, mtime, bmk, "removed"))
        elif bmk not in old:
            out.append(ChangeRecord(current.path, mtime, bmk, "added", new[bmk], texts.get(bmk)))
        elif old[bmk] != new[bmk]:
            out.append(ChangeRecord(current.path, mtime, bmk, "modified", new[bmk], texts.get(bmk)))
    return out


def rows_for(change: ChangeRecord, store: LinkStore) -> list[ImpactRow]:
    loc = change.locator
    rows = []
    for rec in store.incident(loc):
        other = rec.target if rec.source.locator == loc else rec.source
        rows.append(ImpactRow(change, other, rec.id, rec.relation, rec.short_provenance))
    rows.sort(key=lambda r: (r.relation, r.element.sort_key(), r.link_id))
    return rows


def track_changes(ws, store: LinkStore | None = None) -> ChangeReport:
    """Diff every tracked document in workspace ``ws`` against its sidecar.

    Nothing is written; callers commit ``report.snapshots`` when asked to.
    """
    store = store if store is not None else ws.load_store()
    rows: list[ImpactRow] = []
    unlinked: list[ChangeRecord] = []
    warnings: list[str] = []
    snapshots: dict[str, DocSnapshot] = {}
    for doc in ws.doc_paths():
        try:
            prior = ws.load_snapshot(doc)
        except SnapshotError as exc:
            warnings.append(f"{exc}; skipped")
            continue
        if prior is None:
            warnings.append(f"{doc}: no snapshot (run 'seamtrace bookmark'); skipped")
            continue
        path = ws.root / doc
        current = ws.bookmark(doc, prior)
        paras = split_paragraphs(path.read_text(encoding="utf-8"))
        texts = {e.bookmark: paras[e.ordinal - 1] for e in current.entries}
        changes = diff_snapshots(prior, current, file_mtime(path), texts)
        if changes or current.retired != prior.retired:
            snapshots[doc] = current
        for change in changes:
            found = rows_for(change, store)
            if found:
                rows.extend(found)
            else:
                unlinked.append(change)
    return ChangeReport(rows, unlinked, warnings, snapshots)


@dataclass(frozen=True)
class ImpactEntry:
    element: ElementRef
    relation: str        # as read from the queried element
    canonical: str
    link_id: str
    provenance: str
    chain: tuple[str, ...]


def impact(store: LinkStore, locator: Locator, relation: str | None = None) -> list[ImpactEntry]:
    """Links incident to ``locator``, named from its side.

    ``relation`` may be a canonical or an inverse name; a canonical name
    selects links where the element is the source, an inverse name those
    where it is the target.  Symmetric relations match either way.
    """
    if relation is not None:
        resolve(relation)
    out = []
    for rec in store.incident(locator):
        as_source = rec.source.locator == locator
        name = perspective_name(rec.relation, as_source)
        if relation is not None and relation != name:
            continue
        other = rec.target if as_source else rec.source
        out.append(ImpactEntry(other, name, rec.relation, rec.id, rec.short_provenance,
                               tuple(store.chain(rec.id))))
    out.sort(key=lambda e: (e.canonical, e.element.sort_key(), e.link_id))
    return out


def format_entry(e: ImpactEntry, porcelain: bool = False) -> str:
    chain = " -> ".join(e.chain)
    if porcelain:
        return "\t".join([e.relation, e.canonical, str(e.element.locator), e.element.kind.value,
                          e.link_id, e.provenance, chain])
    via = f"  [{chain}]" if len(e.chain) > 1 else ""
    return f"{e.relation:<16} {e.element.locator} ({e.element.kind.value})  {e.link_id} {e.provenance}{via}"
