"""Recursive-descent parser for the contracted-class notation.

The notation is a small subset of Eiffel: classes (optionally deferred) with
``inherit`` lists, ``feature`` sections holding attributes and routines, and
``require`` / ``ensure`` / ``invariant`` blocks of boolean clauses, one clause per
line.  Routine bodies are opaque except for the exit condition of the first
``from .. until .. loop .. end``.  Traceability annotations are ``note`` lines::

    note trace: <relation> <locator> [<kind>]
    note trace-kind: <kind-or-group>

A syntax error abandons the current class only; parsing resumes at the next
class header.
"""

from __future__ import annotations

from .ast import (
    Annotation,
    Atom,
    BinOp,
    ClassDecl,
    ContractClause,
    Diagnostic,
    Expr,
    FeatureDecl,
    Not,
    Span,
    TypeRef,
    collapse_ws,
)
from .lexer import Token, tokenize

ROUTINE_START = ("note", "obsolete", "require", "local", "do", "once", "deferred",
                 "external", "attribute", "ensure")
_AFTER_REQUIRE = ("local", "do", "once", "deferred", "external", "attribute", "ensure", "end")
_AFTER_ENSURE = ("end", "rescue")
_BLOCK_OPENERS = ("if", "from", "across", "inspect", "check", "debug")
_CONNECTIVES = ("and", "or", "implies", "xor")
_CONTINUATION_TAIL = ("and", "or", "implies", "xor", "not", "then", "else", "old")


class ParseError(Exception):
    def __init__(self, token: Token, message: str):
        super().__init__(message)
        self.token = token


class ExprParser:
    """Boolean connectives over opaque atoms, for one clause's tokens."""

    def __init__(self, toks: list[Token], text: str):
        self.toks = toks
        self.text = text
        self.i = 0

    def peek(self) -> Token | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def parse(self) -> Expr:
        if not self.toks:
            raise ValueError("empty expression")
        e = self.implies()
        if self.i != len(self.toks):
            raise ParseError(self.toks[self.i], f"unexpected {self.toks[self.i].value!r} in expression")
        return e

    def implies(self) -> Expr:
        left = self.disj()
        t = self.peek()
        if t is not None and t.is_kw("implies"):
            self.i += 1
            return BinOp("implies", left, self.implies())
        return left

    def disj(self) -> Expr:
        left = self.conj()
        while (t := self.peek()) is not None and t.is_kw("or", "xor"):
            self.i += 1
            nxt = self.peek()
            if nxt is not None and nxt.is_kw("else"):
                self.i += 1
            left = BinOp("or", left, self.conj())
        return left

    def conj(self) -> Expr:
        left = self.unary()
        while (t := self.peek()) is not None and t.is_kw("and"):
            self.i += 1
            nxt = self.peek()
            if nxt is not None and nxt.is_kw("then"):
                self.i += 1
            left = BinOp("and", left, self.unary())
        return left

    def unary(self) -> Expr:
        t = self.peek()
        if t is None:
            last = self.toks[-1]
            raise ParseError(last, f"expression ends after {last.value!r}")
        if t.is_kw("not"):
            self.i += 1
            return Not(self.unary())
        if t.kind == "LPAREN":
            save = self.i
            self.i += 1
            try:
                inner = self.implies()
                close = self.peek()
                if close is None or close.kind != "RPAREN":
                    raise ParseError(close or t, "expected ')'")
                self.i += 1
                after = self.peek()
                if after is None or after.kind == "RPAREN" or after.is_kw(*_CONNECTIVES):
                    return inner
            except ParseError:
                pass
            self.i = save
        return self.atom()

    def atom(self) -> Atom:
        start = self.i
        depth = 0
        across = 0
        while self.i < len(self.toks):
            t = self.toks[self.i]
            if t.kind in ("LPAREN", "LBRACK"):
                depth += 1
            elif t.kind in ("RPAREN", "RBRACK"):
                if depth == 0:
                    break
                depth -= 1
            elif t.is_kw("across"):
                across += 1
            elif t.is_kw("end") and across:
                across -= 1
            elif depth == 0 and not across and t.is_kw(*_CONNECTIVES):
                break
            self.i += 1
        if self.i == start:
            t = self.toks[self.i]
            raise ParseError(t, f"expected an operand, found {t.value!r}")
        if depth:
            raise ParseError(self.toks[start], "unbalanced parentheses")
        first, last = self.toks[start], self.toks[self.i - 1]
        return Atom(collapse_ws(self.text[first.start:last.end]))


class Parser:
    def __init__(self, text: str, path: str):
        self.text = text
        self.path = path
        self.toks, self.diags = tokenize(text, path)
        self.i = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def span(self, t: Token | None = None) -> Span:
        t = t or self.tok
        return Span(self.path, t.line, t.col)

    def diag(self, t: Token, message: str, severity: str = "error") -> None:
        self.diags.append(Diagnostic(self.span(t), severity, message))

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def accept_kw(self, *words: str) -> Token | None:
        if self.tok.is_kw(*words):
            return self.advance()
        return None

    def expect_kw(self, word: str) -> Token:
        if not self.tok.is_kw(word):
            raise ParseError(self.tok, f"expected '{word}', found {self._desc(self.tok)}")
        return self.advance()

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise ParseError(self.tok, f"expected {what}, found {self._desc(self.tok)}")
        return self.advance()

    def expect_name(self, what: str) -> Token:
        t = self.tok
        if t.kind != "IDENT" or t.is_keyword:
            raise ParseError(t, f"expected {what}, found {self._desc(t)}")
        return self.advance()

    @staticmethod
    def _desc(t: Token) -> str:
        return "end of file" if t.kind == "EOF" else repr(t.value)

    # -- top level -----------------------------------------------------------

    def parse(self) -> list[ClassDecl]:
        classes: list[ClassDecl] = []
        notes: list[Token] = []
        while self.tok.kind != "EOF":
            if self.tok.kind == "NOTE":
                notes.append(self.advance())
                continue
            if self.tok.is_kw("deferred", "class", "frozen", "expanded"):
                start = self.i
                try:
                    classes.append(self.parse_class(notes))
                except ParseError as exc:
                    self.diag(exc.token, str(exc))
                    self.resync(start)
                notes = []
                continue
            self.diag(self.tok, f"expected a class declaration, found {self._desc(self.tok)}")
            self.resync(self.i)
            notes = []
        for t in notes:
            self.diag(t, "note is not attached to any class", "warning")
        return classes

    def resync(self, start: int) -> None:
        """Skip to the next class header after token ``start``."""
        j = start + 1
        while self.toks[j].kind != "EOF" and not self.toks[j].is_kw("class"):
            j += 1
        if self.toks[j].kind != "EOF":
            while j - 1 > start and (self.toks[j - 1].is_kw("deferred", "frozen", "expanded")
                                     or self.toks[j - 1].kind == "NOTE"):
                j -= 1
        self.i = j

    def parse_class(self, notes: list[Token]) -> ClassDecl:
        deferred = False
        while t := self.accept_kw("deferred", "frozen", "expanded"):
            deferred = deferred or t.value == "deferred"
        head = self.expect_kw("class")
        name_tok = self.expect_name("class name")
        if not name_tok.value[:1].isupper():
            self.diag(name_tok, f"class name {name_tok.value!r} must start with an uppercase letter")
        decl = ClassDecl(name_tok.value, deferred=deferred, span=self.span(head))
        if self.tok.kind == "LBRACK":
            self.diag(self.tok, f"generic parameters of {decl.name} ignored", "warning")
            self.skip_brackets()
        notes = list(notes)
        while self.tok.kind == "NOTE":
            notes.append(self.advance())
        if self.accept_kw("inherit"):
            self.parse_parents(decl)
        while self.tok.kind == "NOTE":
            notes.append(self.advance())
        for n in notes:
            self.apply_note(n, decl)
        if self.accept_kw("create"):
            while self.tok.kind in ("IDENT", "COMMA", "LBRACE", "RBRACE") and not self.tok.is_keyword:
                self.advance()
        while self.accept_kw("feature"):
            if self.tok.kind == "LBRACE":
                self.skip_braces()
            self.parse_feature_section(decl)
        if self.accept_kw("invariant"):
            decl.invariant_clauses = self.parse_clause_block(("end",), "invariant")
        self.expect_kw("end")
        return decl

    def skip_brackets(self) -> None:
        depth = 0
        while self.tok.kind != "EOF":
            t = self.advance()
            if t.kind == "LBRACK":
                depth += 1
            elif t.kind == "RBRACK":
                depth -= 1
                if depth == 0:
                    return
        raise ParseError(self.tok, "unterminated '['")

    def skip_braces(self) -> None:
        while self.tok.kind not in ("RBRACE", "EOF"):
            self.advance()
        self.expect("RBRACE", "'}'")

    def parse_parents(self, decl: ClassDecl) -> None:
        while True:
            t = self.tok
            if t.kind == "IDENT" and not t.is_keyword:
                decl.parents.append(self.advance().value)
                if self.tok.kind == "LBRACK":
                    self.skip_brackets()
                if self.tok.is_kw("rename", "export", "undefine", "redefine", "select"):
                    depth = 0
                    while not (self.tok.is_kw("end") and depth == 0):
                        if self.tok.kind == "EOF":
                            raise ParseError(self.tok, "unterminated inheritance adaptation")
                        self.advance()
                    self.advance()
            elif t.kind == "SEMI":
                self.advance()
            else:
                break
        if not decl.parents:
            raise ParseError(self.tok, f"expected a parent class name, found {self._desc(self.tok)}")

    # -- notes ---------------------------------------------------------------

    def apply_note(self, t: Token, target) -> None:
        key, sep, rest = t.value.partition(":")
        key = key.strip()
        if not sep or key not in ("trace", "trace-kind"):
            self.diag(t, f"unrecognized note {t.value!r}", "warning")
            return
        words = rest.split()
        if key == "trace-kind":
            if len(words) != 1:
                self.diag(t, "expected 'note trace-kind: <kind>'")
                return
            target.kind_note = words[0]
            return
        if len(words) not in (2, 3):
            self.diag(t, "expected 'note trace: <relation> <locator> [<kind>]'")
            return
        target.annotations.append(Annotation(words[0], words[1], words[2] if len(words) == 3 else None,
                                             self.span(t)))

    # -- features ------------------------------------------------------------

    def parse_feature_section(self, decl: ClassDecl) -> None:
        notes: list[Token] = []
        while True:
            t = self.tok
            if t.kind == "NOTE":
                notes.append(self.advance())
                continue
            if t.kind == "EOF" or t.is_kw("feature", "invariant", "end", "create"):
                for n in notes:
                    self.diag(n, "note is not attached to any feature", "warning")
                return
            if t.kind == "IDENT" and not t.is_keyword:
                for f in self.parse_feature(notes):
                    if decl.feature(f.name) is not None:
                        self.diag(t, f"feature {f.name!r} declared twice in {decl.name}")
                    decl.features.append(f)
                notes = []
                continue
            raise ParseError(t, f"expected a feature declaration, found {self._desc(t)}")

    def parse_feature(self, notes: list[Token]) -> list[FeatureDecl]:
        head = self.tok
        names = [self.expect_name("feature name")]
        while self.tok.kind == "COMMA":
            self.advance()
            names.append(self.expect_name("feature name"))
        for n in names:
            if not n.value[:1].islower():
                self.diag(n, f"feature name {n.value!r} must start with a lowercase letter")
        params = self.parse_params() if self.tok.kind == "LPAREN" else []
        result = None
        if self.tok.kind == "COLON":
            self.advance()
            result = self.parse_type()
        proto = FeatureDecl(names[0].value, parameters=params, result_type=result, span=self.span(head))
        for n in notes:
            self.apply_note(n, proto)
        if self.starts_routine():
            self.parse_routine(proto)
        else:
            proto.is_attribute = result is not None and not params
        out = []
        for n in names:
            f = FeatureDecl(**{**proto.__dict__, "name": n.value, "span": self.span(n)})
            out.append(f)
        return out

    def starts_routine(self) -> bool:
        # notes directly after a header belong to this routine only when a
        # routine keyword follows them; otherwise they annotate the next feature
        j = self.i
        while self.toks[j].kind == "NOTE":
            j += 1
        return self.toks[j].is_kw(*ROUTINE_START)

    def parse_params(self) -> list[tuple[str, TypeRef | None]]:
        self.expect("LPAREN", "'('")
        params: list[tuple[str, TypeRef | None]] = []
        group: list[str] = []
        while True:
            if self.tok.kind == "RPAREN":
                params.extend((g, None) for g in group)
                self.advance()
                return params
            group.append(self.expect_name("parameter name").value)
            if self.tok.kind == "COMMA":
                self.advance()
            elif self.tok.kind == "COLON":
                self.advance()
                ty = self.parse_type()
                params.extend((g, ty) for g in group)
                group = []
                if self.tok.kind == "SEMI":
                    self.advance()
                elif self.tok.kind != "RPAREN":
                    raise ParseError(self.tok, f"expected ';' or ')', found {self._desc(self.tok)}")
            elif self.tok.kind != "RPAREN":
                raise ParseError(self.tok, f"expected ',', ':' or ')', found {self._desc(self.tok)}")

    def parse_type(self) -> TypeRef:
        while self.accept_kw("detachable", "attached", "separate", "expanded"):
            pass
        if self.accept_kw("like"):
            self.expect_name("anchor")
            while self.tok.kind == "DOT":
                self.advance()
                self.expect_name("anchor")
            return TypeRef("like")
        name = self.expect_name("type name").value
        args: list[TypeRef] = []
        if self.tok.kind == "LBRACK":
            self.advance()
            while True:
                args.append(self.parse_type())
                if self.tok.kind == "COMMA":
                    self.advance()
                    continue
                self.expect("RBRACK", "']'")
                break
        return TypeRef(name, tuple(args))

    def parse_routine(self, f: FeatureDecl) -> None:
        while self.tok.kind == "NOTE":
            self.apply_note(self.advance(), f)
        if self.accept_kw("obsolete"):
            self.expect("STRING", "obsolete message")
        if self.accept_kw("require"):
            f.require_else = bool(self.accept_kw("else"))
            f.require_clauses = self.parse_clause_block(_AFTER_REQUIRE, "require")
        if self.accept_kw("local"):
            while not (self.tok.kind == "EOF" or self.tok.is_kw(*_AFTER_REQUIRE[1:])):
                self.advance()
        if self.accept_kw("deferred"):
            f.deferred = True
        elif self.accept_kw("external"):
            while self.tok.kind in ("STRING", "IDENT") and not self.tok.is_kw("ensure", "end"):
                self.advance()
        elif self.accept_kw("do", "once", "attribute"):
            self.parse_body(f)
        if self.accept_kw("ensure"):
            f.ensure_then = bool(self.accept_kw("then"))
            f.ensure_clauses = self.parse_clause_block(_AFTER_ENSURE, "ensure")
        if self.accept_kw("rescue"):
            self.parse_body(None)
        self.expect_kw("end")

    def parse_body(self, f: FeatureDecl | None) -> None:
        """Skip statements up to ``ensure``/``rescue``/``end`` at nesting depth 0."""
        stack: list[str] = []
        while True:
            t = self.tok
            if t.kind == "EOF":
                raise ParseError(t, "unexpected end of file in routine body")
            if not stack and t.is_kw("ensure", "rescue", "end"):
                return
            if t.is_kw(*_BLOCK_OPENERS):
                stack.append(t.value)
            elif t.is_kw("end"):
                stack.pop()
            elif t.is_kw("until") and stack and stack[-1] == "from":
                self.advance()
                toks = self.collect_until_loop()
                if f is not None and f.body_loop_exit is None:
                    f.body_loop_exit = self.make_clause(toks, t, "loop exit")
                continue
            self.advance()

    def collect_until_loop(self) -> list[Token]:
        toks = []
        depth = 0
        while True:
            t = self.tok
            if t.kind == "EOF":
                raise ParseError(t, "missing 'loop' after 'until'")
            if depth == 0 and t.is_kw("loop"):
                return toks
            if t.is_kw(*_BLOCK_OPENERS):
                depth += 1
            elif t.is_kw("end"):
                depth -= 1
            toks.append(self.advance())

    # -- clauses -------------------------------------------------------------

    def parse_clause_block(self, stop: tuple[str, ...], what: str) -> list[ContractClause]:
        toks: list[Token] = []
        across = 0
        paren = 0
        while True:
            t = self.tok
            if t.kind == "EOF":
                raise ParseError(t, f"unexpected end of file in {what} block")
            if t.kind == "NOTE":
                raise ParseError(t, f"note inside {what} block")
            if not across and not paren and t.is_kw(*stop):
                break
            if t.kind == "LPAREN":
                paren += 1
            elif t.kind == "RPAREN":
                paren = max(0, paren - 1)
            elif t.is_kw("across"):
                across += 1
            elif t.is_kw("end") and across:
                across -= 1
            toks.append(self.advance())
        clauses = []
        tags: set[str] = set()
        for group in self.split_clauses(toks):
            c = self.make_clause(group, group[0], what)
            if c is None:
                continue
            if c.tag is not None:
                if c.tag in tags:
                    self.diag(group[0], f"duplicate clause tag {c.tag!r} in {what} block")
                tags.add(c.tag)
            clauses.append(c)
        return clauses

    @staticmethod
    def split_clauses(toks: list[Token]) -> list[list[Token]]:
        groups: list[list[Token]] = []
        paren = 0
        across = 0
        for t in toks:
            starts_new = False
            if groups and t.bol and paren == 0 and across == 0:
                prev = groups[-1][-1]
                cont_prev = prev.is_kw(*_CONTINUATION_TAIL) or prev.kind in ("OP", "DOT", "COMMA", "LPAREN", "COLON")
                cont_next = t.is_kw("and", "or", "implies", "xor", "then", "else") or t.kind in ("OP", "DOT", "RPAREN")
                starts_new = not (cont_prev or cont_next)
            if not groups or starts_new:
                groups.append([t])
            else:
                groups[-1].append(t)
            if t.kind == "LPAREN":
                paren += 1
            elif t.kind == "RPAREN":
                paren = max(0, paren - 1)
            elif t.is_kw("across"):
                across += 1
            elif t.is_kw("end") and across:
                across -= 1
        return groups

    def make_clause(self, toks: list[Token], anchor: Token, what: str) -> ContractClause | None:
        tag = None
        if len(toks) >= 2 and toks[0].kind == "IDENT" and not toks[0].is_keyword and toks[1].kind == "COLON":
            tag = toks[0].value
            toks = toks[2:]
        if not toks:
            self.diag(anchor, f"empty clause in {what}")
            return None
        try:
            expr = ExprParser(toks, self.text).parse()
        except ParseError as exc:
            self.diag(exc.token, str(exc))
            return None
        return ContractClause(tag, expr, self.span(toks[0]))


def parse_source(text: str, path: str = "<string>") -> tuple[list[ClassDecl], list[Diagnostic]]:
    """Parse one ``.spec`` file into class declarations and diagnostics."""
    p = Parser(text.replace("\r\n", "\n"), path)
    classes = p.parse()
    diags = sorted(p.diags, key=lambda d: (d.span.line, d.span.col, d.message))
    return classes, diags


def parse_expression(text: str) -> Expr:
    toks, diags = tokenize(text)
    if diags:
        raise ValueError(diags[0].message)
    return ExprParser(toks[:-1], text).parse()
