"""Core syntax: terms, type expressions, telescopes and signatures.

Two syntactic sorts (types and terms) over de Bruijn indices; binder names
are carried only as printing hints and never participate in equality.
Index 0 always refers to the innermost binder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


class ScopeError(Exception):
    """A de Bruijn index points outside the context it is judged in."""


# ---------------------------------------------------------------------------
# Type expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TCon:
    """Applied type constant: the spine has one term per declared parameter."""

    name: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class IdT:
    """Identity type between two terms of the component type."""

    ty: "TypeExpr"
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class UnitT:
    """Unit type; only legal when strong sums are enabled."""


@dataclass(frozen=True)
class SigT:
    """Dependent sum; `cod` is scoped under one extra binder."""

    name: str = field(compare=False)
    dom: "TypeExpr" = None  # type: ignore[assignment]
    cod: "TypeExpr" = None  # type: ignore[assignment]


TypeExpr = Union[TCon, IdT, UnitT, SigT]


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    ix: int


@dataclass(frozen=True)
class Con:
    """Applied term constant or definition."""

    name: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class Refl:
    ty: "TypeExpr"
    arg: "Term"


@dataclass(frozen=True)
class Star:
    """The canonical element of Unit."""


@dataclass(frozen=True)
class Pair:
    fst: "Term"
    snd: "Term"


@dataclass(frozen=True)
class Fst:
    arg: "Term"


@dataclass(frozen=True)
class Snd:
    arg: "Term"


@dataclass(frozen=True)
class J:
    """Fully annotated identity eliminator.

    Binding discipline, relative to the ambient context G of the whole node:

    * ``ty``      over G
    * ``names``   printing hints for the three eliminated binders x, y, u
    * ``delta``   telescope over G, x:ty, y:ty, u:Id(ty,x,y)
    * ``motive``  over G, x, y, u, delta
    * ``branch``  over G, x, delta[x, x, refl x]
    * ``a b p``   over G, with a,b : ty and p : Id(ty,a,b)
    * ``args``    |delta| terms over G instantiating delta[a, b, p]
    """

    ty: "TypeExpr"
    names: tuple[str, str, str] = field(compare=False)
    delta: "Telescope" = None  # type: ignore[assignment]
    motive: "TypeExpr" = None  # type: ignore[assignment]
    branch: "Term" = None  # type: ignore[assignment]
    a: "Term" = None  # type: ignore[assignment]
    b: "Term" = None  # type: ignore[assignment]
    p: "Term" = None  # type: ignore[assignment]
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class H:
    """Propositional computation witness for J.

    Same annotations as J minus the endpoint b and the path p; ``args``
    instantiates delta[a, a, refl a].
    """

    ty: "TypeExpr"
    names: tuple[str, str, str] = field(compare=False)
    delta: "Telescope" = None  # type: ignore[assignment]
    motive: "TypeExpr" = None  # type: ignore[assignment]
    branch: "Term" = None  # type: ignore[assignment]
    a: "Term" = None  # type: ignore[assignment]
    args: tuple["Term", ...] = ()


Term = Union[Var, Con, Refl, Star, Pair, Fst, Snd, J, H]


# ---------------------------------------------------------------------------
# Telescopes and contexts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TeleCell:
    name: str = field(compare=False)
    ty: "TypeExpr" = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Telescope:
    """Dependency-ordered binders; cell i may mention cells 0..i-1."""

    cells: tuple[TeleCell, ...] = ()

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[TeleCell]:
        return iter(self.cells)

    def __getitem__(self, i: int) -> TeleCell:
        return self.cells[i]

    def __add__(self, other: "Telescope") -> "Telescope":
        return Telescope(self.cells + other.cells)

    def extend(self, name: str, ty: TypeExpr) -> "Telescope":
        return Telescope(self.cells + (TeleCell(name, ty),))

    @staticmethod
    def of(*pairs: tuple[str, TypeExpr]) -> "Telescope":
        return Telescope(tuple(TeleCell(n, t) for n, t in pairs))


Context = Telescope  # a context is a telescope over the empty context

Expr = Union[Term, TypeExpr]


# ---------------------------------------------------------------------------
# Traversal: weakening and substitution
# ---------------------------------------------------------------------------


def _map_vars(e: Expr, depth: int, on_var) -> Expr:
    # Rebuild nodes only when a subterm actually changed, so traversals
    # share structure and closed subtrees cost nothing but the walk.
    match e:
        case Var(ix):
            return on_var(ix, depth)
        case Con(name, args):
            new = tuple(_map_vars(a, depth, on_var) for a in args)
            return e if _same(new, args) else Con(name, new)
        case Refl(ty, arg):
            t2, a2 = _map_vars(ty, depth, on_var), _map_vars(arg, depth, on_var)
            return e if t2 is ty and a2 is arg else Refl(t2, a2)
        case Star():
            return e
        case Pair(x, y):
            x2, y2 = _map_vars(x, depth, on_var), _map_vars(y, depth, on_var)
            return e if x2 is x and y2 is y else Pair(x2, y2)
        case Fst(x):
            x2 = _map_vars(x, depth, on_var)
            return e if x2 is x else Fst(x2)
        case Snd(x):
            x2 = _map_vars(x, depth, on_var)
            return e if x2 is x else Snd(x2)
        case J(ty, names, delta, motive, branch, a, b, p, args):
            k = len(delta)
            t2 = _map_vars(ty, depth, on_var)
            d2 = _map_tele(delta, depth + 3, on_var)
            m2 = _map_vars(motive, depth + 3 + k, on_var)
            br2 = _map_vars(branch, depth + 1 + k, on_var)
            a2 = _map_vars(a, depth, on_var)
            b2 = _map_vars(b, depth, on_var)
            p2 = _map_vars(p, depth, on_var)
            e2 = tuple(_map_vars(t, depth, on_var) for t in args)
            if (
                t2 is ty and d2 is delta and m2 is motive and br2 is branch
                and a2 is a and b2 is b and p2 is p and _same(e2, args)
            ):
                return e
            return J(t2, names, d2, m2, br2, a2, b2, p2, e2)
        case H(ty, names, delta, motive, branch, a, args):
            k = len(delta)
            t2 = _map_vars(ty, depth, on_var)
            d2 = _map_tele(delta, depth + 3, on_var)
            m2 = _map_vars(motive, depth + 3 + k, on_var)
            br2 = _map_vars(branch, depth + 1 + k, on_var)
            a2 = _map_vars(a, depth, on_var)
            e2 = tuple(_map_vars(t, depth, on_var) for t in args)
            if (
                t2 is ty and d2 is delta and m2 is motive and br2 is branch
                and a2 is a and _same(e2, args)
            ):
                return e
            return H(t2, names, d2, m2, br2, a2, e2)
        case TCon(name, args):
            new = tuple(_map_vars(a, depth, on_var) for a in args)
            return e if _same(new, args) else TCon(name, new)
        case IdT(ty, lhs, rhs):
            t2 = _map_vars(ty, depth, on_var)
            l2 = _map_vars(lhs, depth, on_var)
            r2 = _map_vars(rhs, depth, on_var)
            return e if t2 is ty and l2 is lhs and r2 is rhs else IdT(t2, l2, r2)
        case UnitT():
            return e
        case SigT(name, dom, cod):
            d2 = _map_vars(dom, depth, on_var)
            c2 = _map_vars(cod, depth + 1, on_var)
            return e if d2 is dom and c2 is cod else SigT(name, d2, c2)
    raise TypeError(f"not a term or type expression: {e!r}")


def _same(new: tuple, old: tuple) -> bool:
    return all(a is b for a, b in zip(new, old))


def _map_tele(tele: Telescope, depth: int, on_var) -> Telescope:
    cells = tuple(
        TeleCell(c.name, _map_vars(c.ty, depth + i, on_var))
        for i, c in enumerate(tele.cells)
    )
    if all(c.ty is c0.ty for c, c0 in zip(cells, tele.cells)):
        return tele
    return Telescope(cells)


def weaken(e: Expr, by: int, at: int = 0) -> Expr:
    """Shift indices >= `at` up by `by` (new binders inserted at depth `at`)."""
    if by == 0:
        return e

    def on_var(ix: int, depth: int):
        return Var(ix + by) if ix - depth >= at else Var(ix)

    return _map_vars(e, 0, on_var)


def weaken_tele(tele: Telescope, by: int, at: int = 0) -> Telescope:
    if by == 0:
        return tele

    def on_var(ix: int, depth: int):
        return Var(ix + by) if ix - depth >= at else Var(ix)

    return _map_tele(tele, 0, on_var)


def subst(e: Expr, spine: tuple[Term, ...], at: int = 0) -> Expr:
    """Replace the binders at positions at..at+k-1 by `spine`.

    `spine` is in context order: its first term replaces the outermost of
    the substituted binders.  Spine terms live in the result context below
    position `at`; remaining indices shift down by k.
    """
    k = len(spine)
    if k == 0:
        return e

    def on_var(ix: int, depth: int):
        pos = ix - depth
        if pos < at:
            return Var(ix)
        if pos < at + k:
            return weaken(spine[k - 1 - (pos - at)], depth + at)
        return Var(ix - k)

    return _map_vars(e, 0, on_var)


def subst_tele(tele: Telescope, spine: tuple[Term, ...], at: int = 0) -> Telescope:
    if len(spine) == 0:
        return tele
    return Telescope(
        tuple(
            TeleCell(c.name, subst(c.ty, spine, at + i))
            for i, c in enumerate(tele.cells)
        )
    )


def subst1(e: Expr, t: Term, at: int = 0) -> Expr:
    return subst(e, (t,), at)


def max_free_index(e: Expr) -> int:
    """Largest free index in `e`, or -1 if closed."""
    best = -1

    def on_var(ix: int, depth: int):
        nonlocal best
        if ix - depth > best:
            best = ix - depth
        return Var(ix)

    _map_vars(e, 0, on_var)
    return best


def well_scoped(e: Expr, size: int) -> bool:
    return max_free_index(e) < size


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeDecl:
    name: str
    params: Telescope


@dataclass(frozen=True)
class TermDecl:
    name: str
    params: Telescope
    result: TypeExpr


@dataclass(frozen=True)
class DefDecl:
    name: str
    params: Telescope
    result: TypeExpr
    body: Term


Decl = Union[TypeDecl, TermDecl, DefDecl]


class SignatureError(Exception):
    pass


@dataclass(frozen=True)
class Signature:
    """Ordered, acyclic sequence of declarations plus the strong-sums flag."""

    decls: tuple[Decl, ...] = ()
    strong_sums: bool = False

    def __post_init__(self):
        index = {}
        for d in self.decls:
            if d.name in index:
                raise SignatureError(f"duplicate declaration: {d.name}")
            index[d.name] = d
        object.__setattr__(self, "_index", index)

    def lookup(self, name: str) -> Decl | None:
        return self._index.get(name)

    def declare(self, decl: Decl) -> "Signature":
        return Signature(self.decls + (decl,), self.strong_sums)

    def with_strong_sums(self, on: bool = True) -> "Signature":
        return Signature(self.decls, on)


# ---------------------------------------------------------------------------
# Context helpers
# ---------------------------------------------------------------------------


def ctx_lookup(ctx: Context, ix: int) -> TypeExpr:
    """Type of Var(ix) in `ctx`, weakened into the full context."""
    n = len(ctx)
    if not 0 <= ix < n:
        raise ScopeError(f"index {ix} out of range in context of size {n}")
    return weaken(ctx[n - 1 - ix].ty, ix + 1)


def id_spine(n: int) -> tuple[Term, ...]:
    """Identity spine for a context of length n, in context order."""
    return tuple(Var(n - 1 - i) for i in range(n))


def var_spine(ctx_len: int, lo: int, hi: int) -> tuple[Term, ...]:
    """Variables for cells lo..hi-1 of a context of length ctx_len."""
    return tuple(Var(ctx_len - 1 - i) for i in range(lo, hi))
