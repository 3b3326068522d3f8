"""Workspace discovery, configuration and single-writer locking.

A workspace is a directory holding ``seamtrace.toml``, a plain ``key = value``
file::

    # seamtrace workspace
    root = .
    docs = reqs/**/*.md
    sources = **/*.spec
    hash = sha256
    store = trace.links

``docs`` and ``sources`` take comma-separated glob lists relative to ``root``.
The ``SEAMTRACE_WORKSPACE`` environment variable names the workspace directory
and bypasses the upward search for the config file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock, Timeout

from . import bookmarks, store as link_store
from .bookmarks import HASH_ALGORITHMS, DocSnapshot
from .elements import LocatorError, check_path
from .notation import FactBase, load_sources
from .store import LinkStore

CONFIG_NAME = "seamtrace.toml"
LOCK_NAME = ".seamtrace.lock"
ENV_VAR = "SEAMTRACE_WORKSPACE"
_KEYS = ("root", "docs", "sources", "hash", "store")


class WorkspaceError(Exception):
    pass


@dataclass
class WorkspaceConfig:
    root: Path
    docs: list[str] = field(default_factory=lambda: ["reqs/**/*.md"])
    sources: list[str] = field(default_factory=lambda: ["**/*.spec"])
    hash: str = "sha256"
    store: str = "trace.links"

    def validate(self) -> None:
        if self.hash not in HASH_ALGORITHMS:
            raise WorkspaceError(f"unsupported hash algorithm {self.hash!r}; use one of {', '.join(HASH_ALGORITHMS)}")
        for pattern in [*self.docs, *self.sources, self.store]:
            try:
                check_path(pattern)
            except LocatorError as exc:
                raise WorkspaceError(f"{CONFIG_NAME}: {exc}") from None

    def dumps(self, config_dir: Path) -> str:
        root = os.path.relpath(self.root, config_dir)
        return "".join([
            "# seamtrace workspace\n",
            f"root = {Path(root).as_posix()}\n",
            f"docs = {', '.join(self.docs)}\n",
            f"sources = {', '.join(self.sources)}\n",
            f"hash = {self.hash}\n",
            f"store = {self.store}\n",
        ])


def parse_config(text: str, config_dir: Path) -> WorkspaceConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _KEYS:
            raise WorkspaceError(f"{CONFIG_NAME}:{lineno}: expected one of {', '.join(_KEYS)} = value")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key] = value
    cfg = WorkspaceConfig(root=(config_dir / values.get("root", ".")).resolve())

    def globs(v: str) -> list[str]:
        return [g.strip() for g in v.split(",") if g.strip()]

    if "docs" in values:
        cfg.docs = globs(values["docs"])
    if "sources" in values:
        cfg.sources = globs(values["sources"])
    cfg.hash = values.get("hash", cfg.hash)
    cfg.store = values.get("store", cfg.store)
    cfg.validate()
    return cfg


def find_config(start: Path | None = None) -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        path = Path(env) / CONFIG_NAME
        if not path.is_file():
            raise WorkspaceError(f"{ENV_VAR}={env}: no {CONFIG_NAME} there")
        return path
    here = (start or Path.cwd()).resolve()
    for d in [here, *here.parents]:
        if (d / CONFIG_NAME).is_file():
            return d / CONFIG_NAME
    raise WorkspaceError(f"no {CONFIG_NAME} found in {here} or its parents (run 'seamtrace init')")


def _glob(root: Path, patterns: list[str], skip_suffix: str | None = None) -> list[str]:
    found = set()
    for pattern in patterns:
        for p in root.glob(pattern):
            if p.is_file() and not (skip_suffix and p.name.endswith(skip_suffix)):
                found.add(p.relative_to(root).as_posix())
    return sorted(found)


class Workspace:
    def __init__(self, config: WorkspaceConfig):
        self.config = config
        self.root = config.root

    @classmethod
    def open(cls, start: Path | None = None) -> Workspace:
        path = find_config(start)
        return cls(parse_config(path.read_text(encoding="utf-8"), path.parent))

    @classmethod
    def init(cls, directory: Path, **overrides) -> Workspace:
        directory = directory.resolve()
        cfg_path = directory / CONFIG_NAME
        if cfg_path.exists():
            raise WorkspaceError(f"{cfg_path} already exists")
        cfg = WorkspaceConfig(root=directory, **{k: v for k, v in overrides.items() if v})
        cfg.validate()
        directory.mkdir(parents=True, exist_ok=True)
        cfg_path.write_text(cfg.dumps(directory), encoding="utf-8")
        ws = cls(cfg)
        if not ws.store_path.exists():
            link_store.save(LinkStore(), ws.store_path)
        return ws

    # -- paths ---------------------------------------------------------------

    @property
    def store_path(self) -> Path:
        return self.root / self.config.store

    def doc_paths(self) -> list[str]:
        return _glob(self.root, self.config.docs, skip_suffix=".bmk")

    def source_paths(self) -> list[str]:
        return _glob(self.root, self.config.sources)

    def relpath(self, path: str | os.PathLike) -> str:
        p = Path(path)
        p = (p if p.is_absolute() else Path.cwd() / p).resolve()
        try:
            return p.relative_to(self.root).as_posix()
        except ValueError:
            raise WorkspaceError(f"{path} is outside the workspace {self.root}") from None

    # -- state ---------------------------------------------------------------

    def lock(self) -> FileLock:
        return FileLock(str(self.root / LOCK_NAME), timeout=0)

    def load_store(self) -> LinkStore:
        if not self.store_path.exists():
            return LinkStore()
        return link_store.load(self.store_path)

    def save_store(self, store: LinkStore) -> None:
        link_store.save(store, self.store_path)

    def load_facts(self) -> FactBase:
        return load_sources(self.root, self.source_paths())

    def load_snapshot(self, doc: str) -> DocSnapshot | None:
        snap = bookmarks.load_snapshot(self.root / doc, doc)
        if snap is not None and snap.hash_alg != self.config.hash:
            raise WorkspaceError(f"{doc}.bmk uses {snap.hash_alg}, workspace is configured for {self.config.hash}")
        return snap

    def save_snapshot(self, doc: str, snap: DocSnapshot) -> None:
        bookmarks.save_snapshot(self.root / doc, snap)

    def bookmark(self, doc: str, prior: DocSnapshot | None = None) -> DocSnapshot:
        return bookmarks.bookmark_doc(self.root / doc, prior, path=doc, hash_alg=self.config.hash)


__all__ = ["Workspace", "WorkspaceConfig", "WorkspaceError", "Timeout", "parse_config", "find_config"]
