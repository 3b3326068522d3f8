"""Project element taxonomy and on-disk locators.

Every traceable artifact is addressed by a locator string:

    doc:<path>#<bookmark-id>              a bookmarked paragraph of a document
    code:<path>#<ClassName>[.<feature>]    a class, or one feature of a class

and carries an :class:`ElementKind` saying what role it plays in the project.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Union


class Group(enum.Enum):
    NLRQ = "NLRQ"
    OORQ = "OORQ"
    TEST = "TEST"
    IM = "IM"


class ElementKind(enum.Enum):
    ComponentRequirement = "ComponentRequirement"
    FunctionalRequirement = "FunctionalRequirement"
    Constraint = "Constraint"
    Scenario = "Scenario"
    OOComponent = "OOComponent"
    OOFunctionalRequirement = "OOFunctionalRequirement"
    OOConstraint = "OOConstraint"
    OOScenario = "OOScenario"
    TestCase = "TestCase"
    TestSuite = "TestSuite"
    ImplementationComponent = "ImplementationComponent"
    ImplementationFeature = "ImplementationFeature"

    @property
    def group(self) -> Group:
        return _GROUPS[self]

    @classmethod
    def parse(cls, name: str) -> ElementKind:
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown element kind {name!r}") from None


K = ElementKind

_GROUPS = {
    K.ComponentRequirement: Group.NLRQ,
    K.FunctionalRequirement: Group.NLRQ,
    K.Constraint: Group.NLRQ,
    K.Scenario: Group.NLRQ,
    K.OOComponent: Group.OORQ,
    K.OOFunctionalRequirement: Group.OORQ,
    K.OOConstraint: Group.OORQ,
    K.OOScenario: Group.OORQ,
    K.TestCase: Group.TEST,
    K.TestSuite: Group.TEST,
    K.ImplementationComponent: Group.IM,
    K.ImplementationFeature: Group.IM,
}

ALL_KINDS = frozenset(ElementKind)
NLRQ = frozenset(k for k in ElementKind if k.group is Group.NLRQ)
OORQ = frozenset(k for k in ElementKind if k.group is Group.OORQ)
TEST = frozenset(k for k in ElementKind if k.group is Group.TEST)
IM = frozenset(k for k in ElementKind if k.group is Group.IM)
# abbreviations used in relation typing
CSTR = frozenset({K.Constraint, K.OOConstraint})
FR = frozenset({K.FunctionalRequirement, K.OOFunctionalRequirement})

# component-level (class) and feature-level kinds, per group, for code elements
COMPONENT_KIND = {
    Group.OORQ: K.OOComponent,
    Group.TEST: K.TestSuite,
    Group.IM: K.ImplementationComponent,
}
FEATURE_KIND = {
    Group.OORQ: K.OOFunctionalRequirement,
    Group.TEST: K.TestCase,
    Group.IM: K.ImplementationFeature,
}

DEFAULT_DOC_KIND = K.ComponentRequirement


def kind_group(kind: ElementKind) -> Group:
    return _GROUPS[kind]


class LocatorError(ValueError):
    """Raised for text that is not a well-formed locator."""


_BOOKMARK_RE = re.compile(r"p[0-9]{4,}")
_CLASS_RE = re.compile(r"[A-Z][A-Za-z0-9_]*")
_FEATURE_RE = re.compile(r"[a-z][A-Za-z0-9_]*")


@dataclass(frozen=True, order=True)
class DocLocator:
    path: str
    bookmark: str

    def __str__(self) -> str:
        return f"doc:{self.path}#{self.bookmark}"


@dataclass(frozen=True, order=True)
class CodeLocator:
    path: str
    class_name: str
    feature: str | None = None

    def __str__(self) -> str:
        frag = self.class_name if self.feature is None else f"{self.class_name}.{self.feature}"
        return f"code:{self.path}#{frag}"

    @property
    def is_feature(self) -> bool:
        return self.feature is not None

    def owner(self) -> CodeLocator:
        """The class locator this feature belongs to (itself for a class)."""
        return CodeLocator(self.path, self.class_name)


Locator = Union[DocLocator, CodeLocator]


def check_path(path: str, token: str | None = None) -> str:
    token = token if token is not None else path
    if not path:
        raise LocatorError(f"empty path in {token!r}")
    if any(c.isspace() for c in path):
        raise LocatorError(f"whitespace in path {path!r}")
    if "\\" in path:
        raise LocatorError(f"backslash in path {path!r}; use '/'")
    if path.startswith("/"):
        raise LocatorError(f"absolute path {path!r}; locators are workspace-relative")
    for seg in path.split("/"):
        if seg in ("", ".", ".."):
            raise LocatorError(f"non-canonical path segment {seg!r} in {path!r}")
    return path


def parse_locator(text: str) -> Locator:
    if not text:
        raise LocatorError("empty locator")
    scheme, sep, rest = text.partition(":")
    if not sep or scheme not in ("doc", "code"):
        raise LocatorError(f"malformed prefix {text.split(':', 1)[0]!r}; expected 'doc:' or 'code:'")
    path, hash_, fragment = rest.partition("#")
    if not hash_:
        raise LocatorError(f"missing '#' fragment in {text!r}")
    check_path(path, text)
    if not fragment:
        raise LocatorError(f"empty fragment in {text!r}")
    if scheme == "doc":
        if not _BOOKMARK_RE.fullmatch(fragment):
            raise LocatorError(f"bad bookmark id {fragment!r}; expected 'p' and 4+ digits")
        return DocLocator(path, fragment)
    cls, dot, feature = fragment.partition(".")
    if not _CLASS_RE.fullmatch(cls):
        raise LocatorError(f"bad class name {cls!r}")
    if dot:
        if not _FEATURE_RE.fullmatch(feature):
            raise LocatorError(f"bad feature name {feature!r}")
        return CodeLocator(path, cls, feature)
    return CodeLocator(path, cls)


def render_locator(loc: Locator) -> str:
    return str(loc)


@dataclass(frozen=True)
class ElementRef:
    locator: Locator
    kind: ElementKind

    def __post_init__(self):
        nl = self.kind.group is Group.NLRQ
        if isinstance(self.locator, DocLocator) and not nl:
            raise ValueError(f"{self.locator}: document elements must have an NL kind, got {self.kind.value}")
        if isinstance(self.locator, CodeLocator) and nl:
            raise ValueError(f"{self.locator}: code elements cannot have an NL kind ({self.kind.value})")

    @classmethod
    def parse(cls, text: str, kind: ElementKind | str | None = None) -> ElementRef:
        loc = parse_locator(text)
        if isinstance(kind, str):
            kind = ElementKind.parse(kind)
        if kind is None:
            if not isinstance(loc, DocLocator):
                raise ValueError(f"{text}: a kind is required for code elements")
            kind = DEFAULT_DOC_KIND
        return cls(loc, kind)

    @property
    def group(self) -> Group:
        return self.kind.group

    def __str__(self) -> str:
        return str(self.locator)

    def sort_key(self):
        return (str(self.locator), self.kind.value)
