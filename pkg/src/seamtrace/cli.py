"""The ``seamtrace`` command line.

Exit codes: 0 success, 1 violations or changes found, 2 usage, parse or
workspace error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from filelock import Timeout

from .bookmarks import SnapshotError
from .changes import format_entry, impact, track_changes
from .elements import ALL_KINDS, CodeLocator, ElementKind, ElementRef, LocatorError, parse_locator
from .fsutil import format_ts
from .notation import check_refinement, enumerate_stories
from .notation.stories import story_skeleton
from .relations import RELATION_NAMES, INVERSE_OF, TypingError, UnknownRelation, close, typing_warnings
from .store import StoreError
from .workspace import Workspace, WorkspaceError

log = logging.getLogger("seamtrace")

OK, FOUND, USAGE = 0, 1, 2


class CliError(Exception):
    """Reported on stderr, exit code 2."""


def _out(line: str = "") -> None:
    sys.stdout.write(line + "\n")


def _err(line: str) -> None:
    sys.stderr.write(line + "\n")


@contextmanager
def _locked(ws: Workspace):
    try:
        with ws.lock():
            yield
    except Timeout:
        raise CliError(f"workspace {ws.root} is locked by another seamtrace process") from None


def _open(args) -> Workspace:
    return Workspace.open(Path(args.workspace) if args.workspace else None)


def _facts(ws: Workspace):
    facts = ws.load_facts()
    for d in facts.diagnostics:
        _err(str(d))
    if facts.errors:
        raise CliError(f"{len(facts.errors)} error(s) in sources")
    return facts


def _locator(text: str):
    """Parse a locator, accepting ``path#FRAG`` without a scheme."""
    if not text.startswith(("doc:", "code:")) and "#" in text:
        frag = text.split("#", 1)[1]
        text = ("doc:" if frag[:1] == "p" and frag[1:].isdigit() else "code:") + text
    return parse_locator(text)


def _element(ws: Workspace, store, facts, text: str, kind_name: str | None) -> ElementRef:
    loc = _locator(text)
    kind = ElementKind.parse(kind_name) if kind_name else None
    if isinstance(loc, CodeLocator):
        found = facts.lookup(loc)
        if found is None:
            raise CliError(f"{loc} is not declared in any source file")
        if kind is not None and kind is not found.kind:
            raise CliError(f"{loc} is declared as {found.kind.value}; use a trace-kind note to change it")
        return found
    snap = ws.load_snapshot(loc.path)
    if snap is None:
        raise CliError(f"{loc.path} has no bookmarks yet (run 'seamtrace bookmark')")
    if loc.bookmark not in snap.ids():
        raise CliError(f"{loc}: no such bookmark")
    return ElementRef(loc, kind or store.kind_of(loc) or ElementKind.ComponentRequirement)


# -- subcommands -------------------------------------------------------------

def cmd_init(args) -> int:
    target = Path(args.directory or args.workspace or ".")
    ws = Workspace.init(target, docs=args.docs, sources=args.sources, hash=args.hash, store=args.store)
    _out(f"initialized workspace in {ws.root}")
    return OK


def cmd_scan(args) -> int:
    ws = _open(args)
    facts = _facts(ws)
    with _locked(ws):
        store = ws.load_store()
        added = 0
        for atom in sorted(facts.annotation_links, key=lambda a: a.sort_key()):
            existing = store.find(atom)
            if existing is not None and existing.asserted:
                continue
            if existing is not None:
                # promote a derived link to asserted; dependents go with it until the next propagate
                store.remove_link(existing.id)
            rec = store.add_link(atom.source, atom.relation, atom.target)
            _out(f"{rec.id}  {rec.source} {rec.relation} {rec.target}")
            added += 1
        ws.save_store(store)
    _out(f"{len(facts.classes)} classes, {len(facts.elements)} elements, "
         f"{len(facts.inherits)} inherits, {len(facts.is_a_client)} is_a_client facts; "
         f"{added} annotation link(s) added")
    return OK


def cmd_bookmark(args) -> int:
    ws = _open(args)
    docs = [ws.relpath(d) for d in args.docs] if args.docs else ws.doc_paths()
    if not docs:
        _err("no tracked documents")
    with _locked(ws):
        for doc in docs:
            prior = ws.load_snapshot(doc)
            snap = ws.bookmark(doc, prior)
            if prior is not None and snap.same_content(prior):
                _out(f"{doc}: {len(snap.entries)} paragraphs, unchanged")
                continue
            ws.save_snapshot(doc, snap)
            fresh = [b for b in snap.ids() if prior is None or b not in prior.ids()]
            retired = sorted(snap.retired - (prior.retired if prior else set()))
            _out(f"{doc}: {len(snap.entries)} paragraphs, {len(fresh)} new, {len(retired)} retired")
            if args.verbose:
                for e in snap.entries:
                    _out(f"  {e.bookmark}  {e.digest[:12]}  {e.ordinal}")
    return OK


def cmd_link_add(args) -> int:
    ws = _open(args)
    if args.relation in INVERSE_OF:
        raise CliError(f"{args.relation!r} is an inverse name; write "
                       f"'{args.target} {INVERSE_OF[args.relation]} {args.source}' instead")
    if args.relation not in RELATION_NAMES:
        raise CliError(f"unknown relation {args.relation!r}")
    facts = _facts(ws)
    with _locked(ws):
        store = ws.load_store()
        src = _element(ws, store, facts, args.source, args.source_kind)
        tgt = _element(ws, store, facts, args.target, args.target_kind)
        rec = store.add_link(src, args.relation, tgt)
        for w in typing_warnings(rec.atom):
            _err(f"warning: {w}")
        ws.save_store(store)
    _out(rec.to_line())
    return OK


def cmd_link_rm(args) -> int:
    ws = _open(args)
    with _locked(ws):
        store = ws.load_store()
        rec = store.get(args.id)
        if not rec.asserted and not args.force:
            raise CliError(f"{rec.id} is derived ({rec.short_provenance}); it returns on the next "
                           "propagate unless a premise goes (use --force to drop it anyway)")
        removed, cascade = store.remove_link(args.id)
        ws.save_store(store)
    _out(f"removed {removed.id}  {removed.source} {removed.relation} {removed.target}")
    for r in cascade:
        _out(f"removed {r.id}  {r.source} {r.relation} {r.target}  ({r.short_provenance})")
    return OK


def cmd_link_ls(args) -> int:
    ws = _open(args)
    store = ws.load_store()
    records = list(store)
    if args.element:
        loc = _locator(args.element)
        records = [r for r in records if loc in (r.source.locator, r.target.locator)]
    if args.asserted:
        records = [r for r in records if r.asserted]
    if args.derived:
        records = [r for r in records if not r.asserted]
    for r in records:
        if args.porcelain:
            _out(r.to_line())
        else:
            _out(f"{r.id}  {r.source} {r.relation} {r.target}  {r.provenance}")
    return OK


def cmd_propagate(args) -> int:
    ws = _open(args)
    facts = _facts(ws)
    with _locked(ws):
        store = ws.load_store()
        closure = close([r.atom for r in store.asserted()], facts)
        counts = store.apply_closure(closure)
        ws.save_store(store)
    for s in closure.suppressed:
        log.warning("suppressed: %s", s)
    _out(f"{len(store.asserted())} asserted, {len(store.derived())} derived "
         f"({counts['added']} added, {counts['kept']} kept, {counts['dropped']} dropped); "
         f"{len(closure.suppressed)} ill-typed conclusion(s) suppressed")
    return OK


def cmd_check(args) -> int:
    ws = _open(args)
    facts = _facts(ws)
    store = ws.load_store()
    violations = 0
    for issue in check_refinement(facts):
        if issue.is_violation:
            violations += 1
            _out(f"violation: {issue}")
        elif args.verbose:
            _out(f"note: {issue}")
    for rec in store.asserted():
        for w in typing_warnings(rec.atom):
            _out(f"warning: {rec.id}: {w}")
    known_docs: dict[str, set[str] | None] = {}
    for rec in store:
        for end in (rec.source, rec.target):
            loc = end.locator
            if isinstance(loc, CodeLocator):
                found = facts.lookup(loc)
                if found is None:
                    _out(f"warning: {rec.id}: {loc} no longer exists in the sources")
                elif found.kind is not end.kind:
                    _out(f"warning: {rec.id}: {loc} is now {found.kind.value}, stored as {end.kind.value}")
            else:
                if loc.path not in known_docs:
                    try:
                        snap = ws.load_snapshot(loc.path)
                    except SnapshotError:
                        snap = None
                    known_docs[loc.path] = set(snap.ids()) if snap else None
                ids = known_docs[loc.path]
                if ids is not None and loc.bookmark not in ids:
                    _out(f"warning: {rec.id}: bookmark {loc} was retired")
    _out(f"{violations} refinement violation(s)")
    return FOUND if violations else OK


def cmd_impact(args) -> int:
    ws = _open(args)
    store = ws.load_store()
    entries = impact(store, _locator(args.element), args.relation)
    for e in entries:
        _out(format_entry(e, porcelain=args.porcelain))
    if not entries and not args.porcelain:
        _out("no links")
    return OK


def cmd_track_changes(args) -> int:
    ws = _open(args)
    store = ws.load_store()
    report = track_changes(ws, store)
    for w in report.warnings:
        _err(f"warning: {w}")
    if args.porcelain:
        sys.stdout.write(report.porcelain())
        for c in report.unlinked:
            _out("\t".join([c.doc, format_ts(c.mtime), c.bookmark, c.change_type, "-", "-", "-", "-"]))
    else:
        _human_report(report, args.show_text)
    if args.commit and report.snapshots:
        with _locked(ws):
            for doc, snap in report.snapshots.items():
                ws.save_snapshot(doc, snap)
        if not args.porcelain:
            _out(f"committed new snapshot for {len(report.snapshots)} document(s)")
    return FOUND if report.changes else OK


def _human_report(report, show_text: bool) -> None:
    changes = report.changes
    if not changes:
        _out("no changes")
        return
    header = ("document", "modified", "bookmark", "change", "relation", "element", "link", "provenance")
    table = [header]
    texts = []
    for r in report.rows:
        c = r.change
        table.append((c.doc, format_ts(c.mtime), c.bookmark, c.change_type, r.relation,
                      str(r.element.locator), r.link_id, r.provenance))
        texts.append(c.text)
    for c in report.unlinked:
        table.append((c.doc, format_ts(c.mtime), c.bookmark, c.change_type, "-", "(no linked elements)", "-", "-"))
        texts.append(c.text)
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    shown = set()
    for n, row in enumerate(table):
        _out("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        key = row[0], row[2]
        if show_text and n > 0 and texts[n - 1] and key not in shown:
            shown.add(key)
            for line in texts[n - 1].split("\n"):
                _out(f"    | {line}")
    _out(f"{len(changes)} changed bookmark(s), {len(report.rows)} impacted link(s)")


def cmd_stories(args) -> int:
    ws = _open(args)
    loc = _locator(args.feature)
    if not isinstance(loc, CodeLocator) or loc.feature is None:
        raise CliError(f"{args.feature}: expected a feature locator path#CLASS.feature")
    facts = _facts(ws)
    decl = facts.find_feature(loc)
    if decl is None:
        raise CliError(f"{loc} is not declared in any source file")
    stories = enumerate_stories(decl)
    if args.skeleton:
        sys.stdout.write(story_skeleton(loc.class_name, stories))
        return OK
    _out(f"{len(stories)} stories for {loc.class_name}.{loc.feature}")
    for s in stories:
        _out(f"  {s.name}  [{s.origin}] {s.case}")
        _out(f"      when: {s.condition}")
        _out(f"      from: {s.clause}")
    return OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    kinds = sorted(k.value for k in ALL_KINDS)
    p = argparse.ArgumentParser(prog="seamtrace", description="Requirements traceability over code and documents.")
    p.add_argument("-C", "--workspace", metavar="DIR", help="workspace directory (default: search upward)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", required=True)

    s = sub.add_parser("init", help="create seamtrace.toml and an empty link store")
    s.add_argument("directory", nargs="?")
    s.add_argument("--docs")
    s.add_argument("--sources")
    s.add_argument("--hash")
    s.add_argument("--store")
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("scan", help="parse sources and record their trace notes as asserted links")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("bookmark", help="assign or refresh paragraph bookmarks")
    s.add_argument("docs", nargs="*")
    s.set_defaults(func=cmd_bookmark)

    s = sub.add_parser("link", help="add, remove or list links")
    lsub = s.add_subparsers(dest="link_command", metavar="ACTION", required=True)
    a = lsub.add_parser("add", help="assert a link")
    a.add_argument("source")
    a.add_argument("relation")
    a.add_argument("target")
    a.add_argument("--source-kind", choices=kinds, metavar="KIND")
    a.add_argument("--target-kind", choices=kinds, metavar="KIND")
    a.set_defaults(func=cmd_link_add)
    r = lsub.add_parser("rm", help="remove a link and the derived links resting on it")
    r.add_argument("id")
    r.add_argument("--force", action="store_true", help="allow removing a derived link")
    r.set_defaults(func=cmd_link_rm)
    ls = lsub.add_parser("ls", help="list links")
    ls.add_argument("element", nargs="?")
    g = ls.add_mutually_exclusive_group()
    g.add_argument("--asserted", action="store_true")
    g.add_argument("--derived", action="store_true")
    ls.add_argument("--porcelain", action="store_true")
    ls.set_defaults(func=cmd_link_ls)

    s = sub.add_parser("propagate", help="recompute derived links")
    s.set_defaults(func=cmd_propagate)

    s = sub.add_parser("check", help="report refinement violations and link warnings")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("impact", help="list elements linked to an element")
    s.add_argument("element")
    s.add_argument("--relation")
    s.add_argument("--porcelain", action="store_true")
    s.set_defaults(func=cmd_impact)

    s = sub.add_parser("track-changes", help="compare documents with their bookmark snapshots")
    s.add_argument("--commit", action="store_true", help="accept the current documents as the new baseline")
    s.add_argument("--porcelain", action="store_true")
    s.add_argument("--show-text", action="store_true", help="print the new text of changed paragraphs")
    s.set_defaults(func=cmd_track_changes)

    s = sub.add_parser("stories", help="enumerate use-case stories of a routine")
    s.add_argument("feature", help="path#CLASS.feature")
    s.add_argument("--skeleton", action="store_true", help="print a story class skeleton")
    s.set_defaults(func=cmd_stories)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CliError, WorkspaceError, StoreError, SnapshotError, LocatorError,
            UnknownRelation, TypingError, ValueError, OSError) as exc:
        _err(f"seamtrace: {exc}")
        return USAGE

