"""Recursive-descent parser for the SELECT subset.

Supported: SELECT [DISTINCT] with explicit projection or *, basic graph
patterns, FILTER (comparisons, &&/||/!, REGEX, STR, BOUND), braced group
joins, UNION, SERVICE [SILENT], BIND of a constant, LIMIT/OFFSET, and
PREFIX declarations. Everything else fails with either a positioned
syntax error or an "unsupported feature" error naming the feature.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..terms import (
    RDF_LANGSTRING,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    Iri,
    Literal,
    is_absolute_iri,
)
from .algebra import (
    Algebra,
    And,
    Bgp,
    Bind,
    BoundFn,
    Comparison,
    Distinct,
    Expr,
    Filter,
    Join,
    Not,
    Or,
    Project,
    Regex,
    Service,
    Slice,
    StrFn,
    TriplePattern,
    Union,
    Variable,
    scope_variables,
)


class SparqlSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnsupportedFeatureError(ValueError):
    def __init__(self, feature: str, line: int = 0, column: int = 0) -> None:
        super().__init__(f"unsupported feature: {feature}")
        self.feature = feature
        self.line = line
        self.column = column


_KEYWORDS = {
    "SELECT", "DISTINCT", "WHERE", "FILTER", "UNION", "SERVICE", "SILENT",
    "LIMIT", "OFFSET", "PREFIX", "BIND", "AS", "REGEX", "STR", "BOUND",
    "TRUE", "FALSE",
}

_UNSUPPORTED_FORMS = {
    "CONSTRUCT": "CONSTRUCT queries",
    "ASK": "ASK queries",
    "DESCRIBE": "DESCRIBE queries",
    "INSERT": "updates",
    "DELETE": "updates",
    "LOAD": "updates",
    "CLEAR": "updates",
    "WITH": "updates",
}

_UNSUPPORTED_IN_GROUP = {
    "OPTIONAL": "OPTIONAL",
    "MINUS": "MINUS",
    "GRAPH": "GRAPH",
    "VALUES": "VALUES",
    "EXISTS": "EXISTS",
}

_UNSUPPORTED_MODIFIERS = {
    "ORDER": "ORDER BY",
    "GROUP": "GROUP BY",
    "HAVING": "HAVING",
    "REDUCED": "REDUCED",
    "FROM": "FROM dataset clauses",
}

_IRIREF_RE = re.compile(r'<([^<>"{}|^`\\\s]*)>')
_VAR_RE = re.compile(r"[?$]([A-Za-z_][A-Za-z0-9_]*)")
_NUMBER_RE = re.compile(r"[+-]?(\d+\.\d+|\d+)")
_WORD_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")
_PNAME_LOCAL = r"[A-Za-z0-9_](?:[A-Za-z0-9_-]|\.(?=[A-Za-z0-9_-]))*"
_PNAME_RE = re.compile(rf"([A-Za-z][A-Za-z0-9_-]*)?:({_PNAME_LOCAL})?")
_LANGTAG_RE = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")

_ESCAPES = {
    "t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f",
    '"': '"', "'": "'", "\\": "\\",
}


@dataclass
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, col = 0, 1, 1

    def advance(n: int) -> None:
        nonlocal pos, line, col
        chunk = text[pos : pos + n]
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += n
        pos += n

    def err(msg: str) -> SparqlSyntaxError:
        return SparqlSyntaxError(msg, line, col)

    while pos < len(text):
        ch = text[pos]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "#":
            end = text.find("\n", pos)
            advance((end if end != -1 else len(text)) - pos)
            continue
        tline, tcol = line, col
        if ch == "<":
            m = _IRIREF_RE.match(text, pos)
            if m:
                advance(m.end() - pos)
                toks.append(_Tok("iriref", m.group(1), tline, tcol))
                continue
            if text.startswith("<=", pos):
                advance(2)
                toks.append(_Tok("op", "<=", tline, tcol))
                continue
            advance(1)
            toks.append(_Tok("op", "<", tline, tcol))
            continue
        if ch in "?$" and _VAR_RE.match(text, pos):
            m = _VAR_RE.match(text, pos)
            advance(m.end() - pos)
            toks.append(_Tok("var", m.group(1), tline, tcol))
            continue
        if ch in "\"'":
            lexical, length = _read_string(text, pos, err)
            advance(length)
            toks.append(_Tok("string", lexical, tline, tcol))
            continue
        if ch == "@":
            m = _LANGTAG_RE.match(text, pos)
            if not m:
                raise err("malformed language tag")
            advance(m.end() - pos)
            toks.append(_Tok("langtag", m.group(1), tline, tcol))
            continue
        if text.startswith("^^", pos):
            advance(2)
            toks.append(_Tok("dtmark", "^^", tline, tcol))
            continue
        two = text[pos : pos + 2]
        if two in ("!=", ">=", "&&", "||"):
            advance(2)
            toks.append(_Tok("op", two, tline, tcol))
            continue
        if ch in "=<>!":
            advance(1)
            toks.append(_Tok("op", ch, tline, tcol))
            continue
        if ch in "{}().;,*/":
            advance(1)
            toks.append(_Tok(ch, ch, tline, tcol))
            continue
        if ch.isdigit() or (ch in "+-" and _NUMBER_RE.match(text, pos)):
            m = _NUMBER_RE.match(text, pos)
            advance(m.end() - pos)
            value = m.group(0)
            toks.append(_Tok("decimal" if "." in value else "integer", value, tline, tcol))
            continue
        if text.startswith("_:", pos):
            raise UnsupportedFeatureError("blank node in query pattern", tline, tcol)
        if ch == "[":
            raise UnsupportedFeatureError("blank node in query pattern", tline, tcol)
        m = _PNAME_RE.match(text, pos)
        if m and ":" in m.group(0):
            advance(m.end() - pos)
            toks.append(_Tok("pname", m.group(0), tline, tcol))
            continue
        m = _WORD_RE.match(text, pos)
        if m:
            word = m.group(0)
            upper = word.upper()
            advance(len(word))
            if word == "a":
                toks.append(_Tok("a", "a", tline, tcol))
            elif upper in _KEYWORDS or upper in _UNSUPPORTED_FORMS \
                    or upper in _UNSUPPORTED_IN_GROUP or upper in _UNSUPPORTED_MODIFIERS \
                    or upper in ("BASE", "BY", "NOT", "IN"):
                toks.append(_Tok("kw", upper, tline, tcol))
            else:
                raise SparqlSyntaxError(f"unexpected word {word!r}", tline, tcol)
            continue
        raise err(f"unexpected character {ch!r}")
    toks.append(_Tok("eof", "", line, col))
    return toks


def _read_string(text: str, pos: int, err) -> tuple[str, int]:
    quote = text[pos]
    i = pos + 1
    out = []
    while i < len(text):
        ch = text[i]
        if ch == quote:
            return "".join(out), i - pos + 1
        if ch == "\n":
            raise err("newline in string literal")
        if ch == "\\":
            if i + 1 >= len(text):
                raise err("dangling escape")
            esc = text[i + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                i += 2
                continue
            if esc in "uU":
                width = 4 if esc == "u" else 8
                hexpart = text[i + 2 : i + 2 + width]
                if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                    raise err("malformed unicode escape")
                out.append(chr(int(hexpart, 16)))
                i += 2 + width
                continue
            raise err(f"unknown escape \\{esc}")
        out.append(ch)
        i += 1
    raise err("unterminated string literal")


class _Parser:
    def __init__(self, toks: list[_Tok]) -> None:
        self.toks = toks
        self.i = 0
        self.prefixes: dict[str, str] = {}

    def peek(self, ahead: int = 0) -> _Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.value in words

    def expect(self, kind: str, what: str) -> _Tok:
        tok = self.next()
        if tok.kind != kind:
            raise SparqlSyntaxError(f"expected {what}, found {tok.value or 'end of input'!r}",
                                    tok.line, tok.col)
        return tok

    def fail(self, message: str) -> SparqlSyntaxError:
        tok = self.peek()
        return SparqlSyntaxError(message, tok.line, tok.col)

    def unsupported(self, feature: str) -> UnsupportedFeatureError:
        tok = self.peek()
        return UnsupportedFeatureError(feature, tok.line, tok.col)

    # --- query -------------------------------------------------------------

    def parse_query(self) -> Algebra:
        while self.at_kw("PREFIX"):
            self._prefix_decl()
        if self.at_kw("BASE"):
            raise self.unsupported("BASE declarations")
        tok = self.peek()
        if tok.kind == "kw" and tok.value in _UNSUPPORTED_FORMS:
            raise self.unsupported(_UNSUPPORTED_FORMS[tok.value])
        if not self.at_kw("SELECT"):
            raise self.fail("expected SELECT")
        self.next()
        distinct = False
        if self.at_kw("DISTINCT"):
            self.next()
            distinct = True
        if self.at_kw("REDUCED"):
            raise self.unsupported("REDUCED")
        explicit: Optional[list[str]] = None
        if self.peek().kind == "*":
            self.next()
        else:
            explicit = []
            while self.peek().kind == "var":
                name = self.next().value
                if name in explicit:
                    raise self.fail(f"duplicate projected variable ?{name}")
                explicit.append(name)
            if self.peek().kind == "(":
                raise self.unsupported("SELECT expressions")
            if not explicit:
                raise self.fail("expected projection variables or *")
        if self.at_kw("WHERE"):
            self.next()
        group = self._group()
        limit, offset = self._solution_modifiers()
        self.expect("eof", "end of query")
        variables = explicit if explicit is not None else scope_variables(group)
        tree: Algebra = Project(tuple(variables), group)
        if distinct:
            tree = Distinct(tree)
        if limit is not None or offset:
            tree = Slice(limit, offset or 0, tree)
        return tree

    def _prefix_decl(self) -> None:
        self.next()
        tok = self.expect("pname", "prefix label")
        label, _, local = tok.value.partition(":")
        if local:
            raise SparqlSyntaxError("prefix label must end with ':'", tok.line, tok.col)
        iri = self.expect("iriref", "namespace IRI")
        if not is_absolute_iri(iri.value):
            raise SparqlSyntaxError("prefix namespace must be absolute", iri.line, iri.col)
        self.prefixes[label] = iri.value

    def _solution_modifiers(self) -> tuple[Optional[int], int]:
        tok = self.peek()
        if tok.kind == "kw" and tok.value in _UNSUPPORTED_MODIFIERS:
            raise self.unsupported(_UNSUPPORTED_MODIFIERS[tok.value])
        limit: Optional[int] = None
        offset = 0
        seen = set()
        while self.at_kw("LIMIT", "OFFSET"):
            word = self.next().value
            if word in seen:
                raise self.fail(f"duplicate {word}")
            seen.add(word)
            num = self.expect("integer", "a non-negative integer")
            value = int(num.value)
            if value < 0:
                raise SparqlSyntaxError(f"{word} must be non-negative", num.line, num.col)
            if word == "LIMIT":
                limit = value
            else:
                offset = value
        return limit, offset

    # --- group graph patterns ----------------------------------------------

    def _group(self) -> Algebra:
        self.expect("{", "'{'")
        joined: Optional[Algebra] = None
        patterns: list[TriplePattern] = []
        filters: list[Expr] = []

        def flush() -> None:
            nonlocal joined, patterns
            if patterns:
                bgp = Bgp(tuple(patterns))
                joined = bgp if joined is None else Join(joined, bgp)
                patterns = []

        def join_node(node: Algebra) -> None:
            nonlocal joined
            flush()
            joined = node if joined is None else Join(joined, node)

        while True:
            tok = self.peek()
            if tok.kind == "}":
                self.next()
                break
            if tok.kind == "eof":
                raise self.fail("unterminated group, expected '}'")
            if tok.kind == "kw" and tok.value in _UNSUPPORTED_IN_GROUP:
                raise self.unsupported(_UNSUPPORTED_IN_GROUP[tok.value])
            if self.at_kw("FILTER"):
                self.next()
                filters.append(self._constraint())
                self._optional_dot()
                continue
            if self.at_kw("BIND"):
                self.next()
                flush()
                joined = self._bind(joined if joined is not None else Bgp(()))
                self._optional_dot()
                continue
            if self.at_kw("SERVICE"):
                join_node(self._service())
                self._optional_dot()
                continue
            if tok.kind == "{":
                join_node(self._group_or_union())
                self._optional_dot()
                continue
            self._triples_same_subject(patterns)
            if self.peek().kind == ".":
                self.next()
            elif self.peek().kind != "}":
                raise self.fail("expected '.' or '}' after triple pattern")
        flush()
        result: Algebra = joined if joined is not None else Bgp(())
        for expr in filters:
            result = Filter(expr, result)
        return result

    def _optional_dot(self) -> None:
        if self.peek().kind == ".":
            self.next()

    def _group_or_union(self) -> Algebra:
        node = self._group()
        while self.at_kw("UNION"):
            self.next()
            node = Union(node, self._group())
        return node

    def _service(self) -> Service:
        self.next()
        silent = False
        if self.at_kw("SILENT"):
            self.next()
            silent = True
        tok = self.peek()
        if tok.kind == "var":
            endpoint = Variable(self.next().value)
        else:
            endpoint = self._iri("SERVICE endpoint")
        body = self._group()
        try:
            return Service(endpoint, body, silent)
        except ValueError:
            raise UnsupportedFeatureError("nested SERVICE", tok.line, tok.col)

    def _bind(self, child: Algebra) -> Bind:
        self.expect("(", "'(' after BIND")
        tok = self.peek()
        if tok.kind == "var":
            raise self.unsupported("BIND of a non-constant expression")
        value = self._term("BIND value", allow_literal=True)
        if isinstance(value, Variable):
            raise self.unsupported("BIND of a non-constant expression")
        as_tok = self.peek()
        if not self.at_kw("AS"):
            raise self.unsupported("BIND of a non-constant expression")
        self.next()
        var = Variable(self.expect("var", "a variable").value)
        self.expect(")", "')'")
        del as_tok
        return Bind(var, value, child)

    # --- triple patterns ---------------------------------------------------

    def _iri(self, what: str) -> Iri:
        tok = self.next()
        if tok.kind == "iriref":
            if not is_absolute_iri(tok.value):
                raise SparqlSyntaxError(f"relative IRI <{tok.value}> in query",
                                        tok.line, tok.col)
            return Iri(tok.value)
        if tok.kind == "pname":
            label, _, local = tok.value.partition(":")
            if label not in self.prefixes:
                raise SparqlSyntaxError(f"undeclared prefix {label!r}", tok.line, tok.col)
            return Iri(self.prefixes[label] + local)
        raise SparqlSyntaxError(f"expected {what}, found {tok.value!r}", tok.line, tok.col)

    def _term(self, what: str, allow_literal: bool):
        tok = self.peek()
        if tok.kind == "var":
            self.next()
            return Variable(tok.value)
        if tok.kind in ("iriref", "pname"):
            return self._iri(what)
        if not allow_literal:
            raise SparqlSyntaxError(f"expected {what}, found {tok.value!r}",
                                    tok.line, tok.col)
        return self._literal(what)

    def _literal(self, what: str) -> Literal:
        tok = self.next()
        if tok.kind == "string":
            nxt = self.peek()
            if nxt.kind == "langtag":
                self.next()
                return Literal(tok.value, RDF_LANGSTRING, nxt.value.lower())
            if nxt.kind == "dtmark":
                self.next()
                dt = self._iri("datatype IRI")
                return Literal(tok.value, dt.value)
            return Literal(tok.value)
        if tok.kind == "integer":
            return Literal(tok.value, XSD_INTEGER)
        if tok.kind == "decimal":
            return Literal(tok.value, XSD_DECIMAL)
        if tok.kind == "kw" and tok.value in ("TRUE", "FALSE"):
            return Literal(tok.value.lower(), XSD_BOOLEAN)
        raise SparqlSyntaxError(f"expected {what}, found {tok.value or 'end of input'!r}",
                                tok.line, tok.col)

    def _verb(self):
        tok = self.peek()
        if tok.kind == "a":
            self.next()
            verb = Iri(RDF_TYPE)
        elif tok.kind == "var":
            self.next()
            verb = Variable(tok.value)
        else:
            verb = self._iri("a predicate")
        if self.peek().kind in ("/", "*"):
            raise self.unsupported("property paths")
        return verb

    def _triples_same_subject(self, patterns: list[TriplePattern]) -> None:
        subject = self._term("a subject", allow_literal=False)
        while True:
            verb = self._verb()
            while True:
                obj = self._term("an object", allow_literal=True)
                patterns.append(TriplePattern(subject, verb, obj))
                if self.peek().kind == ",":
                    self.next()
                    continue
                break
            if self.peek().kind == ";":
                self.next()
                if self.peek().kind in (".", "}"):
                    break
                continue
            break

    # --- filter expressions --------------------------------------------------

    def _constraint(self) -> Expr:
        tok = self.peek()
        if tok.kind == "(":
            return self._bracketted()
        if self.at_kw("REGEX", "STR", "BOUND"):
            return self._builtin()
        if self.at_kw("NOT"):
            raise self.unsupported("NOT EXISTS")
        raise self.fail("FILTER expects a bracketted expression or built-in call")

    def _bracketted(self) -> Expr:
        self.expect("(", "'('")
        expr = self._expr()
        self.expect(")", "')'")
        return expr

    def _expr(self) -> Expr:
        left = self._and_expr()
        while self.peek().kind == "op" and self.peek().value == "||":
            self.next()
            left = Or(left, self._and_expr())
        return left

    def _and_expr(self) -> Expr:
        left = self._rel_expr()
        while self.peek().kind == "op" and self.peek().value == "&&":
            self.next()
            left = And(left, self._rel_expr())
        return left

    def _rel_expr(self) -> Expr:
        left = self._unary()
        tok = self.peek()
        if tok.kind == "op" and tok.value in ("=", "!=", "<", "<=", ">", ">="):
            self.next()
            return Comparison(tok.value, left, self._unary())
        return left

    def _unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "!":
            self.next()
            return Not(self._unary())
        return self._primary()

    def _primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "(":
            return self._bracketted()
        if self.at_kw("REGEX", "STR", "BOUND"):
            return self._builtin()
        if tok.kind == "var":
            self.next()
            return Variable(tok.value)
        if tok.kind in ("iriref", "pname"):
            return self._iri("an IRI")
        return self._literal("an expression term")

    def _builtin(self) -> Expr:
        word = self.next().value
        self.expect("(", "'('")
        if word == "REGEX":
            text = self._expr()
            self.expect(",", "','")
            pattern = self._string_const("regex pattern")
            flags = ""
            if self.peek().kind == ",":
                self.next()
                flags = self._string_const("regex flags")
            self.expect(")", "')'")
            if flags not in ("", "i"):
                raise self.fail("regex flags restricted to 'i' or empty")
            return Regex(text, pattern, flags)
        if word == "STR":
            arg = self._expr()
            self.expect(")", "')'")
            return StrFn(arg)
        arg_tok = self.expect("var", "a variable")
        self.expect(")", "')'")
        return BoundFn(Variable(arg_tok.value))

    def _string_const(self, what: str) -> str:
        tok = self.expect("string", what)
        return tok.value


def parse_query(text: str) -> Algebra:
    """Parse a SELECT query into its algebra tree."""
    return _Parser(_tokenize(text)).parse_query()
