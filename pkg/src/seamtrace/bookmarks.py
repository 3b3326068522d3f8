"""Paragraph bookmarks for requirement documents.

A document is split into paragraphs (runs of non-blank lines).  Each paragraph
gets a stable id ``p0001``, ``p0002``, ... kept in a sidecar ``<doc>.bmk`` next
to the document together with a content digest per paragraph.  Re-bookmarking
an edited document keeps ids attached to their paragraphs:

1. paragraphs on a longest common subsequence of the old and new digest
   sequences keep their ids;
2. a remaining paragraph whose digest equals a remaining old entry (a moved
   paragraph) takes that entry's id;
3. between two consecutive LCS anchors, leftover old and new paragraphs are
   paired in order and treated as edits of each other, keeping the old id;
4. anything still unmatched gets a fresh id, and unmatched old ids are
   retired.  Retired ids are never handed out again.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path

from .fsutil import atomic_write_text, format_ts, parse_ts, utcnow

HEADER = "seamtrace-bookmarks v1"
HASH_ALGORITHMS = ("sha256", "sha3_256", "blake2s")
DEFAULT_HASH = "sha256"


class SnapshotError(Exception):
    pass


def split_paragraphs(text: str) -> list[str]:
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    paras: list[str] = []
    current: list[str] = []
    for line in text.split("\n"):
        line = line.rstrip()
        if line:
            current.append(line)
        elif current:
            paras.append("\n".join(current))
            current = []
    if current:
        paras.append("\n".join(current))
    return paras


def digest(paragraph: str, alg: str = DEFAULT_HASH) -> str:
    if alg not in HASH_ALGORITHMS:
        raise SnapshotError(f"unsupported hash algorithm {alg!r}")
    return hashlib.new(alg, paragraph.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Entry:
    bookmark: str
    digest: str
    ordinal: int


@dataclass
class DocSnapshot:
    path: str
    entries: list[Entry] = field(default_factory=list)
    retired: set[str] = field(default_factory=set)
    taken_at: datetime = field(default_factory=utcnow)
    hash_alg: str = DEFAULT_HASH

    def ids(self) -> list[str]:
        return [e.bookmark for e in self.entries]

    def by_id(self) -> dict[str, Entry]:
        return {e.bookmark: e for e in self.entries}

    def same_content(self, other: DocSnapshot) -> bool:
        """Equality ignoring ``taken_at``."""
        return replace(self, taken_at=other.taken_at) == other

    def next_number(self) -> int:
        used = [int(b[1:]) for b in [*self.ids(), *self.retired]]
        return max(used, default=0) + 1


def bookmark_id(n: int) -> str:
    return f"p{n:04d}"


def lcs_pairs(a: list[str], b: list[str]) -> list[tuple[int, int]]:
    """Index pairs of one longest common subsequence of ``a`` and ``b``."""
    lo = 0
    while lo < len(a) and lo < len(b) and a[lo] == b[lo]:
        lo += 1
    hi_a, hi_b = len(a), len(b)
    while hi_a > lo and hi_b > lo and a[hi_a - 1] == b[hi_b - 1]:
        hi_a -= 1
        hi_b -= 1
    mid_a, mid_b = a[lo:hi_a], b[lo:hi_b]
    n, m = len(mid_a), len(mid_b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            row[j] = below[j + 1] + 1 if mid_a[i] == mid_b[j] else max(below[j], row[j + 1])
    pairs = [(i, i) for i in range(lo)]
    i = j = 0
    while i < n and j < m:
        if mid_a[i] == mid_b[j]:
            pairs.append((lo + i, lo + j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    pairs.extend((hi_a + k, hi_b + k) for k in range(len(a) - hi_a))
    return pairs


def bookmark_text(text: str, path: str, prior: DocSnapshot | None = None,
                  hash_alg: str | None = None, now: datetime | None = None) -> DocSnapshot:
    hash_alg = hash_alg or (prior.hash_alg if prior else DEFAULT_HASH)
    if prior is not None and prior.hash_alg != hash_alg:
        raise SnapshotError(f"{path}: snapshot uses {prior.hash_alg}, workspace uses {hash_alg}")
    digests = [digest(p, hash_alg) for p in split_paragraphs(text)]
    now = now or utcnow()
    if prior is None:
        entries = [Entry(bookmark_id(i), d, i) for i, d in enumerate(digests, 1)]
        return DocSnapshot(path, entries, set(), now, hash_alg)

    old = prior.entries
    old_d = [e.digest for e in old]
    assigned: dict[int, str] = {}
    used_old: set[int] = set()
    anchors = lcs_pairs(old_d, digests)
    for i, j in anchors:
        assigned[j] = old[i].bookmark
        used_old.add(i)
    # moved paragraphs
    for j, d in enumerate(digests):
        if j in assigned:
            continue
        for i, e in enumerate(old):
            if i not in used_old and e.digest == d:
                assigned[j] = e.bookmark
                used_old.add(i)
                break
    # edited paragraphs: pair leftovers inside each gap between anchors
    bounds = [(-1, -1), *anchors, (len(old), len(digests))]
    for (i0, j0), (i1, j1) in zip(bounds, bounds[1:]):
        olds = [i for i in range(i0 + 1, i1) if i not in used_old]
        news = [j for j in range(j0 + 1, j1) if j not in assigned]
        for i, j in zip(olds, news):
            assigned[j] = old[i].bookmark
            used_old.add(i)
    n = prior.next_number()
    entries = []
    for j, d in enumerate(digests):
        if j not in assigned:
            assigned[j] = bookmark_id(n)
            n += 1
        entries.append(Entry(assigned[j], d, j + 1))
    retired = set(prior.retired) | {e.bookmark for i, e in enumerate(old) if i not in used_old}
    return DocSnapshot(path, entries, retired, now, hash_alg)


def bookmark_doc(doc: str | os.PathLike, prior: DocSnapshot | None = None, *, path: str | None = None,
                 hash_alg: str | None = None, now: datetime | None = None) -> DocSnapshot:
    """Bookmark the document file ``doc``; ``path`` is its workspace-relative name."""
    try:
        text = Path(doc).read_text(encoding="utf-8")
    except OSError as exc:
        raise SnapshotError(f"cannot read {doc}: {exc.strerror}") from None
    return bookmark_text(text, path or Path(doc).as_posix(), prior, hash_alg, now)


# -- sidecar files -----------------------------------------------------------

def sidecar_path(doc: str | os.PathLike) -> Path:
    doc = Path(doc)
    return doc.with_name(doc.name + ".bmk")


def dumps(snap: DocSnapshot) -> str:
    lines = [f"{HEADER} {snap.hash_alg}", f"taken_at: {format_ts(snap.taken_at)}"]
    lines += [f"{e.bookmark}\t{e.digest}\t{e.ordinal}" for e in snap.entries]
    lines.append(" ".join(["retired:", *sorted(snap.retired, key=lambda b: int(b[1:]))]))
    return "\n".join(lines) + "\n"


def loads(text: str, path: str) -> DocSnapshot:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    head = lines[0].split(" ") if lines else []
    if len(head) != 3 or " ".join(head[:2]) != HEADER:
        raise SnapshotError(f"{path}.bmk: line 1: missing header {HEADER!r}")
    alg = head[2]
    if alg not in HASH_ALGORITHMS:
        raise SnapshotError(f"{path}.bmk: line 1: unsupported hash algorithm {alg!r}")
    if len(lines) < 2 or not lines[1].startswith("taken_at: "):
        raise SnapshotError(f"{path}.bmk: line 2: expected 'taken_at: <timestamp>'")
    try:
        taken = parse_ts(lines[1][len("taken_at: "):])
    except ValueError:
        raise SnapshotError(f"{path}.bmk: line 2: bad timestamp") from None
    entries: list[Entry] = []
    retired: set[str] = set()
    seen_retired = False
    for lineno, line in enumerate(lines[2:], start=3):
        if line.startswith("retired:"):
            if seen_retired:
                raise SnapshotError(f"{path}.bmk: line {lineno}: duplicate retired section")
            seen_retired = True
            retired = set(line[len("retired:"):].split())
            continue
        if seen_retired:
            raise SnapshotError(f"{path}.bmk: line {lineno}: entry after retired section")
        parts = line.split("\t")
        if len(parts) != 3 or not parts[2].isdigit() or len(parts[1]) != 64:
            raise SnapshotError(f"{path}.bmk: line {lineno}: malformed entry")
        entries.append(Entry(parts[0], parts[1], int(parts[2])))
    if [e.ordinal for e in entries] != list(range(1, len(entries) + 1)):
        raise SnapshotError(f"{path}.bmk: ordinals are not 1..n")
    ids = [e.bookmark for e in entries]
    if len(set(ids)) != len(ids) or retired & set(ids):
        raise SnapshotError(f"{path}.bmk: bookmark ids are not unique")
    return DocSnapshot(path, entries, retired, taken, alg)


def load_snapshot(doc: str | os.PathLike, path: str) -> DocSnapshot | None:
    side = sidecar_path(doc)
    if not side.exists():
        return None
    return loads(side.read_text(encoding="utf-8"), path)


def save_snapshot(doc: str | os.PathLike, snap: DocSnapshot) -> None:
    atomic_write_text(sidecar_path(doc), dumps(snap))
