"""Recursive-descent parser for the ASCII formula syntax (see docs/grammar.md)."""

from __future__ import annotations

import re

from ..errors import ParseError
from .formula import (
    AF, AG, AU, AX, And, Atom, Box, Choice, FalseF, Mu, NegAtom, Next, Nu, Or, PdlBox,
    PdlDiamond, Seq, Star, Test, TrueF, Var, validate,
)

__all__ = ["parse_formula", "parse_prog"]

_TOKEN = re.compile(
    r"\s*(?:(?P<atom>[A-Za-z_][A-Za-z0-9_']*(?:\s*(?:!=|=)\s*[A-Za-z0-9_]+)?)"
    r"|(?P<sym>->|\[\s*\]|[()\[\]<>|&!.?;+*]))"
)
_KEYWORDS = {"AX", "AF", "AG", "A", "U", "mu", "nu", "next", "tt", "ff", "true", "false"}


def _tokenize(text):
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("atom"):
            toks.append(re.sub(r"\s+", "", m.group("atom")))
        else:
            sym = m.group("sym")
            toks.append("[]" if sym.startswith("[") and sym.endswith("]") and len(sym) > 1 else sym)
    return toks


def _atom(tok):
    if "!=" in tok:
        lhs, rhs = tok.split("!=")
        return NegAtom(f"{lhs}={rhs}")
    return Atom(tok)


def _negate_literal(f):
    if isinstance(f, Atom):
        return NegAtom(f.prop)
    if isinstance(f, NegAtom):
        return Atom(f.prop)
    if isinstance(f, TrueF):
        return FalseF()
    if isinstance(f, FalseF):
        return TrueF()
    raise ParseError("the left side of '->' must be a literal")


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.scope = []

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of formula")
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r}, found {tok!r}")
        self.i += 1
        return tok

    def done(self):
        if self.peek() is not None:
            raise ParseError(f"trailing input starting at {self.peek()!r}")

    # formulas
    def implication(self):
        lhs = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Or(_negate_literal(lhs), self.implication())
        return lhs

    def disjunction(self):
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        tok = self.take()
        if tok == "!":
            inner = self.take()
            if inner in ("tt", "true"):
                return FalseF()
            if inner in ("ff", "false"):
                return TrueF()
            if inner in _KEYWORDS or not re.match(r"[A-Za-z_]", inner):
                raise ParseError("'!' applies to propositions only")
            if inner in self.scope:
                raise ParseError(f"cannot negate the variable {inner!r}")
            a = _atom(inner)
            return NegAtom(a.prop) if isinstance(a, Atom) else Atom(a.prop)
        if tok in ("AX", "AF", "AG"):
            return {"AX": AX, "AF": AF, "AG": AG}[tok](self.unary())
        if tok == "A":
            self.take("[")
            lhs = self.implication()
            self.take("U")
            rhs = self.implication()
            self.take("]")
            return AU(lhs, rhs)
        if tok == "[]":
            return Box(self.unary())
        if tok == "[":
            prog = self.program()
            self.take("]")
            return PdlBox(prog, self.unary())
        if tok == "<":
            prog = self.program()
            self.take(">")
            return PdlDiamond(prog, self.unary())
        if tok in ("mu", "nu"):
            var = self.take()
            if var in _KEYWORDS or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", var):
                raise ParseError(f"bad fixpoint variable {var!r}")
            self.take(".")
            self.scope.append(var)
            body = self.implication()
            self.scope.pop()
            return (Mu if tok == "mu" else Nu)(var, body)
        if tok == "(":
            f = self.implication()
            self.take(")")
            return f
        if tok in ("tt", "true"):
            return TrueF()
        if tok in ("ff", "false"):
            return FalseF()
        if tok in _KEYWORDS or not re.match(r"[A-Za-z_]", tok):
            raise ParseError(f"unexpected token {tok!r}")
        if tok in self.scope:
            return Var(tok)
        return _atom(tok)

    # programs
    def program(self):
        p = self.prog_seq()
        while self.peek() == "+":
            self.take()
            p = Choice(p, self.prog_seq())
        return p

    def prog_seq(self):
        p = self.prog_post()
        while self.peek() == ";":
            self.take()
            p = Seq(p, self.prog_post())
        return p

    def prog_post(self):
        p = self.prog_atom()
        while self.peek() == "*":
            self.take()
            p = Star(p)
        return p

    def prog_atom(self):
        save, depth = self.i, len(self.scope)
        try:
            cond = self.disjunction()
            self.take("?")
            return Test(cond)
        except ParseError:
            self.i = save
            del self.scope[depth:]
        tok = self.take()
        if tok == "next":
            return Next()
        if tok == "(":
            p = self.program()
            self.take(")")
            return p
        raise ParseError(f"expected a program, found {tok!r}")


def parse_formula(text: str, dialect: str | None = None):
    """Parse and dialect-check a formula; the dialect is inferred if omitted."""
    p = _Parser(text)
    f = p.implication()
    p.done()
    validate(f, dialect)
    return f


def parse_prog(text: str):
    p = _Parser(text)
    prog = p.program()
    p.done()
    return prog

