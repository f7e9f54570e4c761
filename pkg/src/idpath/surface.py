"""Text format for signatures and judgments.

Grammar (comments run `--` to end of line):

    directive := `flag strong_sums`
               | `postulate` NAME params? `:` (`Type` | type)
               | `def` NAME params? `:` type `:=` term
               | `check` params? `|-` term `:` type
               | `check` params? `|-` type `type`
               | `derive` NAME (params | NAME*)
    params    := (`(` NAME `:` type `)`)+
    type      := NAME aterm* | `Id` atype aterm aterm | `Unit`
               | `Sig` `(` NAME `:` type `)` type
    term      := NAME aterm* | `*` | `refl` atype aterm | `pair` aterm aterm
               | `fst` aterm | `snd` aterm
               | `J` bspec atype branch aterm aterm aterm spine
               | `H` bspec atype branch aterm spine
    bspec     := `(` NAME NAME NAME (`|` params)? `.` `)`
    branch    := `(` NAME (`,` NAME)* `.` term `)`
    spine     := `[` (term (`,` term)*)? `]`

Names are resolved to de Bruijn indices during parsing; the domain
annotation of J/H is not written and is filled in from the scrutinee's
inferred type during elaboration (see checker.elaborate in loader).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import (
    Con,
    Fst,
    H,
    IdT,
    J,
    Pair,
    Refl,
    SigT,
    Snd,
    Star,
    TCon,
    TeleCell,
    Telescope,
    Term,
    TypeExpr,
    UnitT,
    Var,
)

KEYWORDS = {
    "flag",
    "strong_sums",
    "postulate",
    "def",
    "check",
    "derive",
    "type",
    "Type",
    "Id",
    "Unit",
    "Sig",
    "refl",
    "pair",
    "fst",
    "snd",
    "J",
    "H",
}

PUNCT = ("|-", ":=", "(", ")", "[", "]", ":", ".", ",", "|", "*")


@dataclass(frozen=True)
class InferTy:
    """Placeholder domain annotation on parsed J/H nodes."""


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "keyword", or the punctuation itself
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = None
        for p in PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched:
            toks.append(Token(matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "name"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Directives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SParam:
    name: str
    ty: TypeExpr


@dataclass(frozen=True)
class FlagDirective:
    flag: str
    line: int = 0


@dataclass(frozen=True)
class PostulateType:
    name: str
    params: tuple[SParam, ...]
    line: int = 0


@dataclass(frozen=True)
class PostulateTerm:
    name: str
    params: tuple[SParam, ...]
    result: TypeExpr
    line: int = 0


@dataclass(frozen=True)
class DefDirective:
    name: str
    params: tuple[SParam, ...]
    result: TypeExpr
    body: Term
    line: int = 0


@dataclass(frozen=True)
class CheckTerm:
    ctx: tuple[SParam, ...]
    term: Term
    ty: TypeExpr
    line: int = 0


@dataclass(frozen=True)
class CheckType:
    ctx: tuple[SParam, ...]
    ty: TypeExpr
    line: int = 0


@dataclass(frozen=True)
class DeriveDirective:
    kind: str
    params: tuple[SParam, ...] = ()
    names: tuple[str, ...] = ()
    line: int = 0


Directive = Union[
    FlagDirective, PostulateType, PostulateTerm, DefDirective, CheckTerm, CheckType, DeriveDirective
]


@dataclass(frozen=True)
class SourceFile:
    directives: tuple[Directive, ...]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, message: str):
        t = self.peek()
        raise ParseError(message, t.line, t.col)

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {kind!r}, found {t.text!r}")
        return self.next()

    def expect_kw(self, word: str) -> Token:
        t = self.peek()
        if t.kind != "keyword" or t.text != word:
            self.fail(f"expected {word!r}, found {t.text!r}")
        return self.next()

    def at_kw(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "keyword" and t.text == word

    # -- scope handling ----------------------------------------------------

    def resolve(self, name: str, scope: list[str]) -> Optional[int]:
        for depth, bound in enumerate(reversed(scope)):
            if bound == name:
                return depth
        return None

    # -- params ------------------------------------------------------------

    def parse_params(self, scope: list[str]) -> list[SParam]:
        out: list[SParam] = []
        while self.peek().kind == "(":
            save = self.pos
            self.next()
            if self.peek().kind != "name" or self.toks[self.pos + 1].kind != ":":
                self.pos = save
                break
            name = self.next().text
            self.expect(":")
            ty = self.parse_type(scope)
            self.expect(")")
            out.append(SParam(name, ty))
            scope.append(name)
        return out

    # -- types ---------------------------------------------------------------

    def parse_type(self, scope: list[str]) -> TypeExpr:
        t = self.peek()
        if t.kind == "keyword" and t.text == "Id":
            self.next()
            ty = self.parse_atom_type(scope)
            lhs = self.parse_atom_term(scope)
            rhs = self.parse_atom_term(scope)
            return IdT(ty, lhs, rhs)
        if t.kind == "keyword" and t.text == "Unit":
            self.next()
            return UnitT()
        if t.kind == "keyword" and t.text == "Sig":
            self.next()
            self.expect("(")
            name = self.expect("name").text
            self.expect(":")
            dom = self.parse_type(scope)
            self.expect(")")
            scope.append(name)
            cod = self.parse_type(scope)
            scope.pop()
            return SigT(name, dom, cod)
        if t.kind == "(":
            self.next()
            ty = self.parse_type(scope)
            self.expect(")")
            return ty
        if t.kind == "name":
            self.next()
            if self.resolve(t.text, scope) is not None:
                self.fail(f"{t.text} is a bound variable, not a type")
            args = []
            while self._at_atom_term():
                args.append(self.parse_atom_term(scope))
            return TCon(t.text, tuple(args))
        self.fail(f"expected a type, found {t.text!r}")

    def parse_atom_type(self, scope: list[str]) -> TypeExpr:
        t = self.peek()
        if t.kind == "(":
            self.next()
            ty = self.parse_type(scope)
            self.expect(")")
            return ty
        if t.kind == "keyword" and t.text == "Unit":
            self.next()
            return UnitT()
        if t.kind == "name":
            self.next()
            if self.resolve(t.text, scope) is not None:
                self.fail(f"{t.text} is a bound variable, not a type")
            return TCon(t.text, ())
        self.fail(f"expected a type, found {t.text!r}")

    # -- terms ---------------------------------------------------------------

    def _at_atom_term(self) -> bool:
        t = self.peek()
        return t.kind in ("name", "(", "*")

    def parse_atom_term(self, scope: list[str]) -> Term:
        t = self.peek()
        if t.kind == "*":
            self.next()
            return Star()
        if t.kind == "(":
            self.next()
            tm = self.parse_term(scope)
            self.expect(")")
            return tm
        if t.kind == "name":
            self.next()
            ix = self.resolve(t.text, scope)
            if ix is not None:
                return Var(ix)
            return Con(t.text, ())
        self.fail(f"expected a term, found {t.text!r}")

    def parse_term(self, scope: list[str]) -> Term:
        t = self.peek()
        if t.kind == "*":
            self.next()
            return Star()
        if t.kind == "keyword":
            if t.text == "refl":
                self.next()
                ty = self.parse_atom_type(scope)
                arg = self.parse_atom_term(scope)
                return Refl(ty, arg)
            if t.text == "pair":
                self.next()
                return Pair(self.parse_atom_term(scope), self.parse_atom_term(scope))
            if t.text == "fst":
                self.next()
                return Fst(self.parse_atom_term(scope))
            if t.text == "snd":
                self.next()
                return Snd(self.parse_atom_term(scope))
            if t.text in ("J", "H"):
                return self.parse_elim(scope, t.text)
            self.fail(f"unexpected keyword {t.text!r} in a term")
        if t.kind == "(":
            self.next()
            tm = self.parse_term(scope)
            self.expect(")")
            return tm
        if t.kind == "name":
            self.next()
            ix = self.resolve(t.text, scope)
            args = []
            while self._at_atom_term():
                args.append(self.parse_atom_term(scope))
            if ix is not None:
                if args:
                    self.fail(f"bound variable {t.text} takes no arguments")
                return Var(ix)
            return Con(t.text, tuple(args))
        self.fail(f"expected a term, found {t.text!r}")

    def parse_elim(self, scope: list[str], which: str) -> Term:
        self.next()  # J or H
        self.expect("(")
        x = self.expect("name").text
        y = self.expect("name").text
        u = self.expect("name").text
        inner = scope + [x, y, u]
        dcells: list[TeleCell] = []
        dnames: list[str] = []
        if self.peek().kind == "|":
            self.next()
            params = self.parse_params(inner)
            for p in params:
                dcells.append(TeleCell(p.name, p.ty))
                dnames.append(p.name)
        self.expect(".")
        self.expect(")")
        delta = Telescope(tuple(dcells))
        motive = self.parse_atom_type(inner)
        # inner scope already extended by parse_params
        self.expect("(")
        bnames = [self.expect("name").text]
        while self.peek().kind == ",":
            self.next()
            bnames.append(self.expect("name").text)
        self.expect(".")
        if len(bnames) == 1:
            branch_scope = scope + [bnames[0]] + dnames
        elif len(bnames) == 1 + len(delta):
            branch_scope = scope + bnames
        else:
            self.fail(
                f"branch binds 1 or {1 + len(delta)} names, got {len(bnames)}"
            )
        branch = self.parse_term(branch_scope)
        self.expect(")")
        a = self.parse_atom_term(scope)
        if which == "J":
            b = self.parse_atom_term(scope)
            p = self.parse_atom_term(scope)
        args = self.parse_spine(scope)
        if which == "J":
            return J(InferTy(), (x, y, u), delta, motive, branch, a, b, p, tuple(args))
        return H(InferTy(), (x, y, u), delta, motive, branch, a, tuple(args))

    def parse_spine(self, scope: list[str]) -> list[Term]:
        self.expect("[")
        out: list[Term] = []
        if self.peek().kind != "]":
            out.append(self.parse_term(scope))
            while self.peek().kind == ",":
                self.next()
                out.append(self.parse_term(scope))
        self.expect("]")
        return out

    # -- directives ----------------------------------------------------------

    def parse_directive(self) -> Directive:
        t = self.peek()
        line = t.line
        if self.at_kw("flag"):
            self.next()
            self.expect_kw("strong_sums")
            return FlagDirective("strong_sums", line)
        if self.at_kw("postulate"):
            self.next()
            name = self.expect("name").text
            scope: list[str] = []
            params = tuple(self.parse_params(scope))
            self.expect(":")
            if self.at_kw("Type"):
                self.next()
                return PostulateType(name, params, line)
            result = self.parse_type(scope)
            return PostulateTerm(name, params, result, line)
        if self.at_kw("def"):
            self.next()
            name = self.expect("name").text
            scope = []
            params = tuple(self.parse_params(scope))
            self.expect(":")
            result = self.parse_type(scope)
            self.expect(":=")
            body = self.parse_term(scope)
            return DefDirective(name, params, result, body, line)
        if self.at_kw("check"):
            self.next()
            scope = []
            ctx = tuple(self.parse_params(scope))
            self.expect("|-")
            save = self.pos
            try:
                tm = self.parse_term(scope)
                self.expect(":")
                ty = self.parse_type(scope)
                return CheckTerm(ctx, tm, ty, line)
            except ParseError:
                self.pos = save
            ty = self.parse_type(scope)
            self.expect_kw("type")
            return CheckType(ctx, ty, line)
        if self.at_kw("derive"):
            self.next()
            kind = self.expect("name").text
            scope = []
            if self.peek().kind == "(":
                params = tuple(self.parse_params(scope))
                return DeriveDirective(kind, params=params, line=line)
            names = []
            while self.peek().kind == "name":
                names.append(self.next().text)
            return DeriveDirective(kind, names=tuple(names), line=line)
        self.fail(f"expected a directive, found {t.text!r}")

    def parse_file(self) -> SourceFile:
        out = []
        while self.peek().kind != "eof":
            out.append(self.parse_directive())
        return SourceFile(tuple(out))


def parse(text: str) -> SourceFile:
    return _Parser(tokenize(text)).parse_file()


def parse_term_text(text: str, scope: list[str]) -> Term:
    p = _Parser(tokenize(text))
    t = p.parse_term(list(scope))
    p.expect("eof")
    return t


def parse_type_text(text: str, scope: list[str]) -> TypeExpr:
    p = _Parser(tokenize(text))
    t = p.parse_type(list(scope))
    p.expect("eof")
    return t


def parse_params_text(text: str) -> tuple[SParam, ...]:
    p = _Parser(tokenize(text))
    out = tuple(p.parse_params([]))
    p.expect("eof")
    return out


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------


def _fresh(hint: str, scope: list[str]) -> str:
    base = hint if hint and hint not in KEYWORDS else "x"
    if base not in scope:
        return base
    i = 1
    while f"{base}{i}" in scope:
        i += 1
    return f"{base}{i}"


def print_term(t: Term, scope: list[str], atom: bool = False) -> str:
    match t:
        case Var(ix):
            if ix >= len(scope):
                return f"?v{ix - len(scope)}"
            return scope[len(scope) - 1 - ix]
        case Con(name, args):
            if not args:
                return name
            s = name + " " + " ".join(print_term(a, scope, atom=True) for a in args)
            return f"({s})" if atom else s
        case Star():
            return "*"
        case Refl(ty, arg):
            s = f"refl {print_type(ty, scope, atom=True)} {print_term(arg, scope, atom=True)}"
            return f"({s})" if atom else s
        case Pair(x, y):
            s = f"pair {print_term(x, scope, atom=True)} {print_term(y, scope, atom=True)}"
            return f"({s})" if atom else s
        case Fst(x):
            s = f"fst {print_term(x, scope, atom=True)}"
            return f"({s})" if atom else s
        case Snd(x):
            s = f"snd {print_term(x, scope, atom=True)}"
            return f"({s})" if atom else s
        case J(_, names, delta, motive, branch, a, b, p, args):
            s = _print_elim("J", t, scope)
            return f"({s})" if atom else s
        case H(_, names, delta, motive, branch, a, args):
            s = _print_elim("H", t, scope)
            return f"({s})" if atom else s
    raise TypeError(f"cannot print {t!r}")


def _print_elim(which: str, t, scope: list[str]) -> str:
    xn = _fresh(t.names[0], scope)
    yn = _fresh(t.names[1], scope + [xn])
    un = _fresh(t.names[2], scope + [xn, yn])
    inner = scope + [xn, yn, un]
    dnames: list[str] = []
    dparts: list[str] = []
    for cell in t.delta:
        nm = _fresh(cell.name, inner)
        dparts.append(f"({nm} : {print_type(cell.ty, inner)})")
        inner.append(nm)
        dnames.append(nm)
    spec = f"({xn} {yn} {un}" + (" | " + "".join(dparts) if dparts else "") + ". )"
    motive_s = print_type(t.motive, inner, atom=True)
    bx = _fresh(t.names[0], scope)
    branch_scope = scope + [bx] + dnames
    bnames = ", ".join([bx] + dnames)
    branch_s = f"({bnames}. {print_term(t.branch, branch_scope)})"
    parts = [which, spec, motive_s, branch_s, print_term(t.a, scope, atom=True)]
    if which == "J":
        parts.append(print_term(t.b, scope, atom=True))
        parts.append(print_term(t.p, scope, atom=True))
    spine = "[" + ", ".join(print_term(x, scope) for x in t.args) + "]"
    parts.append(spine)
    return " ".join(parts)


def print_type(ty: TypeExpr, scope: list[str], atom: bool = False) -> str:
    match ty:
        case TCon(name, args):
            if not args:
                return name
            s = name + " " + " ".join(print_term(a, scope, atom=True) for a in args)
            return f"({s})" if atom else s
        case IdT(t, lhs, rhs):
            s = (
                f"Id {print_type(t, scope, atom=True)} "
                f"{print_term(lhs, scope, atom=True)} {print_term(rhs, scope, atom=True)}"
            )
            return f"({s})" if atom else s
        case UnitT():
            return "Unit"
        case SigT(name, dom, cod):
            nm = _fresh(name, scope)
            s = f"Sig ({nm} : {print_type(dom, scope)}) {print_type(cod, scope + [nm], atom=True)}"
            return f"({s})" if atom else s
    raise TypeError(f"cannot print {ty!r}")


def print_telescope(tele: Telescope, scope: list[str]) -> str:
    parts = []
    cur = list(scope)
    for cell in tele:
        nm = _fresh(cell.name, cur)
        parts.append(f"({nm} : {print_type(cell.ty, cur)})")
        cur.append(nm)
    return " ".join(parts)


def scope_names(tele: Telescope, outer: list[str] | None = None) -> list[str]:
    """Deterministic printing names for the cells of a context."""
    cur = list(outer) if outer else []
    for cell in tele:
        cur.append(_fresh(cell.name, cur))
    return cur


def print_directive(d: Directive) -> str:
    match d:
        case FlagDirective(flag):
            return f"flag {flag}"
        case PostulateType(name, params):
            ps = _params_str(params)
            return f"postulate {name}{ps} : Type"
        case PostulateTerm(name, params, result):
            ps = _params_str(params)
            scope = [p.name for p in params]
            return f"postulate {name}{ps} : {print_type(result, scope)}"
        case DefDirective(name, params, result, body):
            ps = _params_str(params)
            scope = [p.name for p in params]
            return (
                f"def {name}{ps} : {print_type(result, scope)} := {print_term(body, scope)}"
            )
        case CheckTerm(ctx, term, ty):
            ps = _params_str(ctx)
            scope = [p.name for p in ctx]
            lead = f"check{ps} |- " if ps else "check |- "
            return f"{lead}{print_term(term, scope)} : {print_type(ty, scope)}"
        case CheckType(ctx, ty):
            ps = _params_str(ctx)
            scope = [p.name for p in ctx]
            lead = f"check{ps} |- " if ps else "check |- "
            return f"{lead}{print_type(ty, scope)} type"
        case DeriveDirective(kind, params, names):
            if params:
                scope: list[str] = []
                ps = []
                for p in params:
                    ps.append(f"({p.name} : {print_type(p.ty, scope)})")
                    scope.append(p.name)
                return f"derive {kind} " + " ".join(ps)
            if names:
                return f"derive {kind} " + " ".join(names)
            return f"derive {kind}"
    raise TypeError(f"cannot print {d!r}")


def _params_str(params: tuple[SParam, ...]) -> str:
    if not params:
        return ""
    scope: list[str] = []
    out = []
    for p in params:
        out.append(f"({p.name} : {print_type(p.ty, scope)})")
        scope.append(p.name)
    return " " + " ".join(out)


def print_file(f: SourceFile) -> str:
    return "\n".join(print_directive(d) for d in f.directives) + "\n"
