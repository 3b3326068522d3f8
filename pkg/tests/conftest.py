from __future__ import annotations

import shutil
from dataclasses import dataclass
from pathlib import Path

import pytest

from seamtrace.cli import main

from universe import FIXTURES

PLACE_HOLD = "src/library.spec#LIBRARY.place_book_on_hold"
PLACE_HOLD_IMPL = "src/library.spec#LIBRARY_IMPL.place_book_on_hold"
STORY = "src/library.spec#LIBRARY_BOOK_USAGE_STORIES.reserve_book_successfully"
REQ = "reqs/library.md#p0002"


@dataclass
class Result:
    code: int
    out: str
    err: str


class Runner:
    def __init__(self, root: Path, capsys):
        self.root = root
        self.capsys = capsys

    def __call__(self, *argv: str) -> Result:
        self.capsys.readouterr()
        code = main(["-C", str(self.root), *argv])
        cap = self.capsys.readouterr()
        return Result(code, cap.out, cap.err)

    def ok(self, *argv: str) -> Result:
        r = self(*argv)
        assert r.code == 0, (argv, r)
        return r


def make_workspace(tmp_path: Path, name: str) -> Path:
    root = tmp_path / name
    shutil.copytree(FIXTURES / name, root)
    return root


@pytest.fixture
def library(tmp_path, capsys) -> Runner:
    run = Runner(make_workspace(tmp_path, "library"), capsys)
    run.ok("init")
    return run


@pytest.fixture
def roborace(tmp_path, capsys) -> Runner:
    run = Runner(make_workspace(tmp_path, "roborace"), capsys)
    run.ok("init")
    return run


def link_library(run: Runner) -> None:
    """scan, bookmark, the three asserted links, propagate."""
    run.ok("scan")
    run.ok("bookmark")
    run.ok("link", "add", PLACE_HOLD, "refines", REQ, "--target-kind", "FunctionalRequirement")
    run.ok("link", "add", "src/library.spec#PATRON.place_hold", "refines", "reqs/library.md#p0003",
           "--target-kind", "Constraint")
    run.ok("link", "add", STORY, "tests", PLACE_HOLD)
    run.ok("propagate")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py::test_criterion_" not in getattr(rep, "nodeid", ""):
                continue
            if rep.when != "call" and outcome != "error":
                continue
            detail = dict(getattr(rep, "user_properties", ())).get("detail", "")
            n = int(rep.nodeid.split("test_criterion_")[1][:2])
            lines.append((n, f"criterion {n:2d}: {'PASS' if outcome == 'passed' else 'FAIL'}  {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
