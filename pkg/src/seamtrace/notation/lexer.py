from __future__ import annotations

from dataclasses import dataclass

from .ast import Diagnostic, Span

KEYWORDS = frozenset("""
    across all and as attribute check class create debug deferred do else elseif
    end ensure expanded export external feature from frozen if implies inherit
    inspect invariant like local loop not note obsolete old once or redefine rename
    require rescue select some then undefine until when xor
""".split())

_OPERATORS = (":=", "/=", "<=", ">=", "->", "..", "//", "\\\\", "/~")
_OP_CHARS = set("+-*/<>=~^|&@!?\\")
_PUNCT = {"(": "LPAREN", ")": "RPAREN", "[": "LBRACK", "]": "RBRACK",
          "{": "LBRACE", "}": "RBRACE", ",": "COMMA", ";": "SEMI",
          ":": "COLON", ".": "DOT"}


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER STRING OP NOTE EOF or a punctuation kind
    value: str
    line: int
    col: int
    start: int
    end: int
    bol: bool = False  # first token on its line

    def is_kw(self, *words: str) -> bool:
        return self.kind == "IDENT" and self.value in words

    @property
    def is_keyword(self) -> bool:
        return self.kind == "IDENT" and self.value in KEYWORDS


def tokenize(text: str, path: str = "") -> tuple[list[Token], list[Diagnostic]]:
    toks: list[Token] = []
    diags: list[Diagnostic] = []
    i, n = 0, len(text)
    line, line_start = 1, 0
    bol = True

    def emit(kind, start, end, value=None):
        nonlocal bol
        toks.append(Token(kind, text[start:end] if value is None else value,
                          line, start - line_start + 1, start, end, bol))
        bol = False

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line, line_start, bol = line + 1, i, True
            continue
        if c in " \t\r\f\v":
            i += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if bol and text.startswith("note", i) and (i + 4 == n or not (text[i + 4].isalnum() or text[i + 4] == "_")):
            j = i + 4
            while j < n and text[j] != "\n":
                j += 1
            raw = text[i + 4:j]
            cut = raw.find(" --")
            if cut >= 0:
                raw = raw[:cut]
            emit("NOTE", i, j, raw.strip())
            i = j
            continue
        start = i
        if c.isalpha() or c == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            emit("IDENT", start, i)
        elif c.isdigit():
            while i < n and (text[i].isdigit() or text[i] == "_"):
                i += 1
            if i + 1 < n and text[i] == "." and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            emit("NUMBER", start, i)
        elif c in "\"'":
            i += 1
            while i < n and text[i] != c and text[i] != "\n":
                i += 2 if text[i] == "%" else 1
            if i >= n or text[i] != c:
                diags.append(Diagnostic(Span(path, line, start - line_start + 1), "error",
                                        "unterminated string"))
            else:
                i += 1
            emit("STRING", start, min(i, n))
        else:
            op = next((o for o in _OPERATORS if text.startswith(o, i)), None)
            if op:
                i += len(op)
                emit("OP", start, i)
            elif c in _PUNCT:
                i += 1
                emit(_PUNCT[c], start, i)
            elif c in _OP_CHARS:
                i += 1
                emit("OP", start, i)
            else:
                diags.append(Diagnostic(Span(path, line, start - line_start + 1), "error",
                                        f"unexpected character {c!r}"))
                i += 1
    toks.append(Token("EOF", "", line, i - line_start + 1, n, n, True))
    return toks, diags
