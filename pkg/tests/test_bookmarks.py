from __future__ import annotations

import random
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seamtrace.bookmarks import (
    DocSnapshot,
    SnapshotError,
    bookmark_doc,
    bookmark_text,
    digest,
    dumps,
    lcs_pairs,
    load_snapshot,
    loads,
    save_snapshot,
    sidecar_path,
    split_paragraphs,
)

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def doc(*paras: str) -> str:
    return "\n\n".join(paras) + "\n"


@pytest.mark.parametrize("text, expected", [
    ("A\n\nB\nC\n\n\nD", ["A", "B\nC", "D"]),
    ("", []),
    ("X\r\nY", ["X\nY"]),
    ("  \n\nA  \n \t\nB\n\n", ["A", "B"]),
])
def test_split_paragraphs(text, expected):
    assert split_paragraphs(text) == expected


def test_digest_is_sha256_hex():
    d = digest("A")
    assert len(d) == 64 and d == "559aead08264d5795d3909718cdd05abd49572e84fe55590eef31a88a08fdffd"
    assert digest("A ") != d


def test_first_bookmarking_numbers_in_order():
    snap = bookmark_text(doc("a", "b", "c"), "r.md", now=T0)
    assert snap.ids() == ["p0001", "p0002", "p0003"]
    assert [e.ordinal for e in snap.entries] == [1, 2, 3]


def test_insert_mints_one_fresh_id():
    s1 = bookmark_text(doc("a", "b", "c"), "r.md")
    s2 = bookmark_text(doc("a", "new", "b", "c"), "r.md", s1)
    assert s2.ids() == ["p0001", "p0004", "p0002", "p0003"]


def test_edit_keeps_ids():
    s1 = bookmark_text(doc("a", "b", "c"), "r.md")
    s2 = bookmark_text(doc("a", "b edited", "c"), "r.md", s1)
    assert s2.ids() == s1.ids()
    assert s2.entries[1].digest != s1.entries[1].digest
    assert s2.entries[0] == s1.entries[0]


def test_move_keeps_id():
    s1 = bookmark_text(doc("a", "b", "c", "d"), "r.md")
    s2 = bookmark_text(doc("d", "a", "b", "c"), "r.md", s1)
    assert s2.ids() == ["p0004", "p0001", "p0002", "p0003"]


def test_delete_retires_and_never_reuses():
    s1 = bookmark_text(doc("a", "b", "c"), "r.md")
    s2 = bookmark_text(doc("a", "c"), "r.md", s1)
    assert s2.ids() == ["p0001", "p0003"] and s2.retired == {"p0002"}
    s3 = bookmark_text(doc("a", "b", "c"), "r.md", s2)
    assert s3.ids() == ["p0001", "p0004", "p0003"]


def test_rebookmarking_unchanged_text_is_a_no_op():
    s1 = bookmark_text(doc("a", "b"), "r.md", now=T0)
    s2 = bookmark_text(doc("a", "b"), "r.md", s1)
    assert s2.same_content(s1) and s2 is not s1


def test_lcs_pairs():
    assert lcs_pairs(list("abcd"), list("axcd")) == [(0, 0), (2, 2), (3, 3)]
    assert lcs_pairs([], list("ab")) == []


def test_sidecar_round_trip(tmp_path):
    path = tmp_path / "r.md"
    path.write_text(doc("a", "b", "c"), encoding="utf-8")
    s1 = bookmark_doc(path, path="r.md", now=T0)
    path.write_text(doc("a", "c"), encoding="utf-8")
    s2 = bookmark_doc(path, s1, path="r.md", now=T0)
    save_snapshot(path, s2)
    text = sidecar_path(path).read_text(encoding="utf-8")
    assert text.splitlines()[0] == "seamtrace-bookmarks v1 sha256"
    assert text.splitlines()[1] == "taken_at: 2024-01-01T00:00:00Z"
    assert text.splitlines()[-1] == "retired: p0002"
    assert load_snapshot(path, "r.md") == s2
    assert dumps(loads(text, "r.md")) == text


def test_missing_sidecar_is_none(tmp_path):
    assert load_snapshot(tmp_path / "nope.md", "nope.md") is None


def test_unreadable_document(tmp_path):
    with pytest.raises(SnapshotError):
        bookmark_doc(tmp_path / "missing.md")


@pytest.mark.parametrize("text", [
    "",
    "seamtrace-bookmarks v1 md5\ntaken_at: 2024-01-01T00:00:00Z\nretired:\n",
    "seamtrace-bookmarks v1 sha256\nretired:\n",
    "seamtrace-bookmarks v1 sha256\ntaken_at: 2024-01-01T00:00:00Z\np0001\tabc\t1\nretired:\n",
    "seamtrace-bookmarks v1 sha256\ntaken_at: 2024-01-01T00:00:00Z\np0001\t" + "0" * 64 + "\t2\nretired:\n",
    "seamtrace-bookmarks v1 sha256\ntaken_at: 2024-01-01T00:00:00Z\np0001\t" + "0" * 64 + "\t1\nretired: p0001\n",
])
def test_malformed_sidecars(text):
    with pytest.raises(SnapshotError):
        loads(text, "r.md")


def test_hash_algorithm_must_match_prior():
    s1 = bookmark_text("a", "r.md", hash_alg="sha3_256")
    with pytest.raises(SnapshotError):
        bookmark_text("a", "r.md", s1, hash_alg="sha256")


_para = st.text(alphabet="abcxyz ", min_size=1, max_size=6).map(str.strip).filter(bool)


@settings(max_examples=200, deadline=None)
@given(st.lists(_para, max_size=8), st.lists(_para, max_size=8), st.lists(_para, max_size=8))
def test_ids_unique_and_never_reused(v1, v2, v3):
    snaps = [bookmark_text(doc(*v1) if v1 else "", "r.md")]
    for v in (v2, v3):
        snaps.append(bookmark_text(doc(*v) if v else "", "r.md", snaps[-1]))
    for prev, cur in zip(snaps, snaps[1:]):
        assert len(set(cur.ids())) == len(cur.ids())
        assert not set(cur.ids()) & cur.retired
        assert prev.retired <= cur.retired
        assert set(prev.ids()) <= set(cur.ids()) | cur.retired
    assert [e.ordinal for e in snaps[-1].entries] == list(range(1, len(snaps[-1].entries) + 1))


def test_random_edit_sequences_keep_unchanged_ids():
    rng = random.Random(3)
    paras = [f"paragraph {i}" for i in range(10)]
    snap = bookmark_text(doc(*paras), "r.md")
    for step in range(50):
        i = rng.randrange(len(paras))
        paras[i] = f"edited {step}"
        before = dict(zip(snap.ids(), [e.digest for e in snap.entries]))
        snap = bookmark_text(doc(*paras), "r.md", snap)
        changed = [b for b, e in zip(snap.ids(), snap.entries) if before.get(b) != e.digest]
        assert changed == [snap.ids()[i]]
    assert isinstance(snap, DocSnapshot)
