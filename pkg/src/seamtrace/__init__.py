"""seamtrace: typed traceability links between code and requirement documents."""

from .elements import CodeLocator, DocLocator, ElementKind, ElementRef, Group, parse_locator
from .relations import LinkAtom, close, close_reference, query
from .store import LinkRecord, LinkStore

__version__ = "0.1.0"

__all__ = [
    "CodeLocator", "DocLocator", "ElementKind", "ElementRef", "Group", "LinkAtom", "LinkRecord",
    "LinkStore", "close", "close_reference", "parse_locator", "query",
]
