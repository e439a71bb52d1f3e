"""Turtle subset reader and canonical writer.

Supported syntax: @prefix directives, absolute and base-resolved IRIs,
prefixed names, blank node labels, string literals with datatype or
language tag, the `a` keyword, and predicate-object / object lists.
Collections, anonymous blank nodes and numeric shorthand are out of the
subset and rejected with a positioned error.

The writer is canonical: prefixes sorted by label, subjects sorted, one
predicate-object group per subject, so equal graphs serialize to equal
bytes and parse(serialize(g)) == g.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional
from urllib.parse import urljoin

from .terms import (
    RDF_LANGSTRING,
    RDF_TYPE,
    XSD_STRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    RdfTerm,
    Triple,
    is_absolute_iri,
    term_sort_key,
)


class TurtleParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass
class _Token:
    kind: str
    value: str
    line: int
    col: int
    # extra payload: datatype marker for pname parts etc.
    extra: Optional[str] = None


_PNAME_LOCAL = r"[A-Za-z0-9_](?:[A-Za-z0-9_-]|\.(?=[A-Za-z0-9_-]))*"
_PNAME_RE = re.compile(rf"([A-Za-z][A-Za-z0-9_-]*)?:({_PNAME_LOCAL})?")
_BLANK_RE = re.compile(r"_:([A-Za-z0-9_][A-Za-z0-9_.-]*)")
_LANGTAG_RE = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")

_ESCAPES = {
    "t": "\t",
    "n": "\n",
    "r": "\r",
    "b": "\b",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


class _Lexer:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> TurtleParseError:
        return TurtleParseError(message, self.line, self.col)

    def _advance(self, n: int) -> None:
        chunk = self.text[self.pos : self.pos + n]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(chunk) - chunk.rfind("\n")
        else:
            self.col += n
        self.pos += n

    def _skip_ws(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
            elif ch == "#":
                end = self.text.find("\n", self.pos)
                self._advance((end if end != -1 else len(self.text)) - self.pos)
            else:
                return

    def tokens(self) -> list[_Token]:
        out = []
        while True:
            self._skip_ws()
            if self.pos >= len(self.text):
                out.append(_Token("eof", "", self.line, self.col))
                return out
            out.append(self._next_token())

    def _next_token(self) -> _Token:
        text, pos = self.text, self.pos
        line, col = self.line, self.col
        ch = text[pos]
        if ch == "<":
            end = text.find(">", pos)
            if end == -1:
                raise self.error("unterminated IRI")
            raw = text[pos + 1 : end]
            if any(c in raw for c in ' "{}|^`\n'):
                raise self.error(f"illegal character in IRI <{raw}>")
            self._advance(end - pos + 1)
            return _Token("iriref", _unescape_unicode(raw, self), line, col)
        if ch == '"':
            value = self._read_string()
            return _Token("string", value, line, col)
        if ch == "@":
            word = re.match(r"@[a-zA-Z][a-zA-Z0-9-]*", text[pos:])
            if word and word.group(0) == "@prefix":
                self._advance(len("@prefix"))
                return _Token("at_prefix", "@prefix", line, col)
            m = _LANGTAG_RE.match(text, pos)
            if not m:
                raise self.error("malformed language tag or directive")
            self._advance(m.end() - pos)
            return _Token("langtag", m.group(1), line, col)
        if text.startswith("^^", pos):
            self._advance(2)
            return _Token("dtmark", "^^", line, col)
        if ch in ".;,":
            self._advance(1)
            return _Token(ch, ch, line, col)
        if text.startswith("_:", pos):
            m = _BLANK_RE.match(text, pos)
            if not m:
                raise self.error("malformed blank node label")
            self._advance(m.end() - pos)
            return _Token("blank", m.group(1), line, col)
        if ch == "a" and _ends_bare_a(text, pos):
            self._advance(1)
            return _Token("a", "a", line, col)
        m = _PNAME_RE.match(text, pos)
        if m and ":" in m.group(0):
            self._advance(m.end() - pos)
            return _Token("pname", m.group(0), line, col)
        raise self.error(f"unexpected character {ch!r}")

    def _read_string(self) -> str:
        text = self.text
        start = self.pos
        self._advance(1)  # opening quote
        out = []
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == '"':
                self._advance(1)
                return "".join(out)
            if ch == "\n":
                raise self.error("newline in single-line string")
            if ch == "\\":
                if self.pos + 1 >= len(text):
                    raise self.error("dangling escape")
                esc = text[self.pos + 1]
                if esc in _ESCAPES:
                    out.append(_ESCAPES[esc])
                    self._advance(2)
                elif esc == "u" or esc == "U":
                    width = 4 if esc == "u" else 8
                    hexpart = text[self.pos + 2 : self.pos + 2 + width]
                    if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                        raise self.error("malformed unicode escape")
                    out.append(chr(int(hexpart, 16)))
                    self._advance(2 + width)
                else:
                    raise self.error(f"unknown escape \\{esc}")
            else:
                out.append(ch)
                self._advance(1)
        self.pos = start
        raise self.error("unterminated string")


def _ends_bare_a(text: str, pos: int) -> bool:
    nxt = text[pos + 1] if pos + 1 < len(text) else " "
    return not (nxt.isalnum() or nxt in "_:-")


def _unescape_unicode(raw: str, lexer: _Lexer) -> str:
    def repl(m: re.Match) -> str:
        return chr(int(m.group(1) or m.group(2), 16))

    try:
        return re.sub(r"\\u([0-9A-Fa-f]{4})|\\U([0-9A-Fa-f]{8})", repl, raw)
    except ValueError:
        raise lexer.error("malformed unicode escape in IRI")


class _Parser:
    def __init__(self, tokens: list[_Token], base: Optional[str]) -> None:
        self.tokens = tokens
        self.i = 0
        self.base = base
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise TurtleParseError(
                f"expected {kind!r}, found {tok.value!r}", tok.line, tok.col
            )
        return tok

    def error(self, message: str, tok: _Token) -> TurtleParseError:
        return TurtleParseError(message, tok.line, tok.col)

    def parse(self) -> Graph:
        while self.peek().kind != "eof":
            if self.peek().kind == "at_prefix":
                self._prefix_directive()
            else:
                self._triples_statement()
        return Graph(self.triples, self.prefixes)

    def _prefix_directive(self) -> None:
        self.next()
        tok = self.expect("pname")
        label, _, local = tok.value.partition(":")
        if local:
            raise self.error("prefix label must end with ':'", tok)
        iri_tok = self.expect("iriref")
        self.prefixes[label] = self._resolve(iri_tok.value, iri_tok)
        self.expect(".")

    def _resolve(self, raw: str, tok: _Token) -> str:
        if is_absolute_iri(raw):
            return raw
        if self.base is None:
            raise self.error(f"relative IRI <{raw}> with no base", tok)
        resolved = urljoin(self.base, raw)
        # urljoin drops a bare trailing '#' (empty fragment); keep it, the
        # fragment namespace is distinct from the document IRI
        if raw.endswith("#") and not resolved.endswith("#"):
            resolved += "#"
        return resolved

    def _term(self, position: str) -> RdfTerm:
        tok = self.next()
        if tok.kind == "iriref":
            return Iri(self._resolve(tok.value, tok))
        if tok.kind == "pname":
            label, _, local = tok.value.partition(":")
            if label not in self.prefixes:
                raise self.error(f"undeclared prefix {label!r}", tok)
            return Iri(self.prefixes[label] + local)
        if tok.kind == "blank":
            return BlankNode(tok.value)
        if tok.kind == "string":
            if position != "object":
                raise self.error(f"literal not allowed in {position} position", tok)
            return self._literal_rest(tok.value)
        raise self.error(f"unexpected {tok.value!r} in {position} position", tok)

    def _literal_rest(self, lexical: str) -> Literal:
        nxt = self.peek()
        if nxt.kind == "langtag":
            self.next()
            return Literal(lexical, RDF_LANGSTRING, nxt.value.lower())
        if nxt.kind == "dtmark":
            self.next()
            dt = self._term("datatype")
            if not isinstance(dt, Iri):
                raise self.error("datatype must be an IRI", nxt)
            return Literal(lexical, dt.value)
        return Literal(lexical)

    def _verb(self) -> Iri:
        if self.peek().kind == "a":
            self.next()
            return Iri(RDF_TYPE)
        term = self._term("predicate")
        if not isinstance(term, Iri):
            tok = self.tokens[self.i - 1]
            raise self.error("predicate must be an IRI", tok)
        return term

    def _triples_statement(self) -> None:
        subject = self._term("subject")
        while True:
            predicate = self._verb()
            while True:
                obj = self._term("object")
                self.triples.append(Triple(subject, predicate, obj))
                if self.peek().kind == ",":
                    self.next()
                    continue
                break
            if self.peek().kind == ";":
                self.next()
                # tolerate trailing ';' before '.'
                if self.peek().kind == ".":
                    break
                continue
            break
        self.expect(".")


def parse_turtle(text: str, base: Optional[str] = None) -> Graph:
    """Parse Turtle text into a Graph; relative IRIs resolve against `base`."""
    tokens = _Lexer(text).tokens()
    return _Parser(tokens, base).parse()


def _escape_string(value: str) -> str:
    out = []
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


_LOCAL_OK = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*")


def _valid_local(local: str) -> bool:
    return bool(_LOCAL_OK.fullmatch(local))


def abbreviate(iri: str, prefixes: dict[str, str]) -> Optional[str]:
    """Prefixed-name form of an IRI, or None if no declared prefix fits."""
    best: Optional[tuple[str, str]] = None
    for label, ns in prefixes.items():
        if iri.startswith(ns) and (best is None or len(ns) > len(best[1])):
            local = iri[len(ns) :]
            if _valid_local(local) or local == "":
                best = (label, ns)
    if best is None:
        return None
    label, ns = best
    local = iri[len(ns) :]
    if local and not _valid_local(local):
        return None
    return f"{label}:{local}"


def _render_term(term: RdfTerm, prefixes: dict[str, str]) -> str:
    if isinstance(term, Iri):
        short = abbreviate(term.value, prefixes)
        return short if short is not None else f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    lex = _escape_string(term.lexical)
    if term.lang:
        return f'"{lex}"@{term.lang}'
    if term.datatype == XSD_STRING:
        return f'"{lex}"'
    dt = abbreviate(term.datatype, prefixes)
    return f'"{lex}"^^{dt}' if dt is not None else f'"{lex}"^^<{term.datatype}>'


def _predicate_order_key(predicate: Iri) -> tuple:
    # rdf:type first, shown as `a`
    return (0 if predicate.value == RDF_TYPE else 1, predicate.value)


def serialize_turtle(g: Graph) -> str:
    prefixes = g.prefixes
    lines = [f"@prefix {label}: <{ns}> ." for label, ns in sorted(prefixes.items())]
    by_subject: dict[RdfTerm, list[Triple]] = {}
    for t in g.triples:
        by_subject.setdefault(t.subject, []).append(t)
    if lines and by_subject:
        lines.append("")
    for subject in sorted(by_subject, key=term_sort_key):
        by_pred: dict[Iri, list[RdfTerm]] = {}
        for t in by_subject[subject]:
            by_pred.setdefault(t.predicate, []).append(t.object)
        parts = []
        for pred in sorted(by_pred, key=_predicate_order_key):
            pred_text = "a" if pred.value == RDF_TYPE else _render_term(pred, prefixes)
            objects = sorted(by_pred[pred], key=term_sort_key)
            obj_text = ", ".join(_render_term(o, prefixes) for o in objects)
            parts.append(f"{pred_text} {obj_text}")
        subj_text = _render_term(subject, prefixes)
        lines.append(f"{subj_text} " + " ;\n\t".join(parts) + " .")
    return "\n".join(lines) + ("\n" if lines else "")
