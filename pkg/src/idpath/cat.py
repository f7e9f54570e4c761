"""Contexts as objects, term tuples as morphisms.

Fibrations are kept in canonical form as dependent projections (a base
context plus an extension telescope); pullback is substitution, so all
path structure later built on top of it is preserved strictly.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import checker as ck
from . import defeq as dq
from .syntax import (
    Context,
    Fst,
    Pair,
    SigT,
    Signature,
    Snd,
    Star,
    TeleCell,
    Telescope,
    Term,
    TypeExpr,
    UnitT,
    Var,
    _map_vars,
    id_spine,
    subst,
    subst_tele,
    var_spine,
    weaken,
    weaken_tele,
)


class CatError(Exception):
    pass


@dataclass(frozen=True)
class Morphism:
    """Tuple of terms over `src`, one per cell of `dst`."""

    src: Context
    dst: Context
    spine: tuple[Term, ...]

    def __post_init__(self):
        if len(self.spine) != len(self.dst):
            raise CatError(
                f"spine length {len(self.spine)} does not match target of length {len(self.dst)}"
            )


def identity(ctx: Context) -> Morphism:
    return Morphism(ctx, ctx, id_spine(len(ctx)))


def compose(g: Morphism, f: Morphism) -> Morphism:
    """g after f; defined by substituting f's spine into g's components."""
    if len(f.dst) != len(g.src):
        raise CatError("composition source/target mismatch")
    return Morphism(f.src, g.dst, tuple(subst(c, f.spine) for c in g.spine))


def check_morphism(sig: Signature, m: Morphism) -> None:
    """Componentwise well-typedness of the spine at substituted target types."""
    ck.check_spine(sig, m.src, m.dst, m.spine, head="morphism")


def morphism_eq(sig: Signature, f: Morphism, g: Morphism) -> bool:
    """Componentwise definitional equality (same source and target assumed)."""
    if len(f.spine) != len(g.spine):
        return False
    for i, cell in enumerate(f.dst):
        ty = subst(cell.ty, f.spine[:i])
        if not dq.defeq_terms(sig, f.src, ty, f.spine[i], g.spine[i]):
            return False
    return True


def context_eq(sig: Signature, a: Context, b: Context) -> bool:
    return dq.defeq_teles(sig, Telescope(), a, b)


# ---------------------------------------------------------------------------
# Fibrations (canonical dependent projections) and pullbacks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fibration:
    """The dependent projection [base, ext] -> base; rank is len(ext)."""

    base: Context
    ext: Telescope

    @property
    def rank(self) -> int:
        return len(self.ext)

    @property
    def total(self) -> Context:
        return self.base + self.ext

    def projection(self) -> Morphism:
        n = len(self.base) + len(self.ext)
        return Morphism(self.total, self.base, var_spine(n, 0, len(self.base)))


def compose_fibrations(upper: Fibration, lower: Fibration) -> Fibration:
    """[lower.base, lower.ext, upper.ext] -> lower.base; ranks add."""
    if upper.base != lower.total:
        raise CatError("fibration composition mismatch")
    return Fibration(lower.base, lower.ext + upper.ext)


def split_fibration(fib: Fibration, lower_rank: int) -> tuple[Fibration, Fibration]:
    """Unique factorisation into a lower_rank projection after the rest."""
    if not 0 <= lower_rank <= fib.rank:
        raise CatError("bad split rank")
    low = Fibration(fib.base, Telescope(fib.ext.cells[:lower_rank]))
    high = Fibration(low.total, Telescope(fib.ext.cells[lower_rank:]))
    return high, low


@dataclass(frozen=True)
class Square:
    """Commuting square east.top = bottom.west with a pullback flag."""

    top: Morphism
    bottom: Morphism
    west: Morphism
    east: Morphism
    is_pullback: bool = False

    def commutes(self, sig: Signature) -> bool:
        return morphism_eq(sig, compose(self.east, self.top), compose(self.bottom, self.west))


def pullback_display(p: Fibration, f: Morphism) -> tuple[Fibration, Square]:
    """Pullback of the dependent projection along f, computed by substitution."""
    if len(f.dst) != len(p.base):
        raise CatError("pullback: morphism does not land in the fibration base")
    ext2 = subst_tele(p.ext, f.spine)
    pb = Fibration(f.src, ext2)
    n = len(pb.total)
    top = Morphism(
        pb.total,
        p.total,
        tuple(weaken(c, p.rank) for c in f.spine) + var_spine(n, len(f.src), n),
    )
    return pb, Square(top=top, bottom=f, west=pb.projection(), east=p.projection(), is_pullback=True)


def pullback_pair(sq: Square, u: Morphism, v: Morphism) -> Morphism:
    """Mediating morphism into a pullback square from a cone (u, v).

    u lands in the square's lower-left object, v in the upper-right one;
    requires bottom.u = east.v, which the caller is expected to have
    verified definitionally.
    """
    rank = len(sq.top.dst) - len(sq.bottom.dst)
    return Morphism(u.src, sq.west.src, u.spine + v.spine[len(v.spine) - rank :])


def product_over(base: Context, e1: Telescope, e2: Telescope) -> Fibration:
    """Fibre product of two canonical fibrations over the same base."""
    return Fibration(base, e1 + weaken_tele(e2, len(e1)))


# ---------------------------------------------------------------------------
# Context permutations (strict isomorphisms)
# ---------------------------------------------------------------------------


def permute_context(ctx: Context, order: list[int]) -> tuple[Context, Morphism, Morphism]:
    """Reorder context cells by `order` (new position j holds old cell order[j]).

    Valid only when every cell's dependencies precede it in the new order;
    returns (new context, fwd: old -> new, bwd: new -> old), with both
    composites the identity spine on the nose.
    """
    n = len(ctx)
    if sorted(order) != list(range(n)):
        raise CatError("order is not a permutation")
    inv = [0] * n
    for j, i in enumerate(order):
        inv[i] = j

    cells = []
    for j, i in enumerate(order):
        old_ty = ctx[i].ty

        def on_var(ix, depth, i=i, j=j):
            pos = ix - depth
            if pos < 0:
                return Var(ix)
            k = i - 1 - pos  # referenced old cell
            if k < 0:
                raise CatError("cell references outside the context")
            jj = inv[k]
            if jj >= j:
                raise CatError("permutation breaks dependency order")
            return Var(j - 1 - jj + depth)

        cells.append(TeleCell(ctx[i].name, _map_vars(old_ty, 0, on_var)))
    new_ctx = Telescope(tuple(cells))
    fwd = Morphism(ctx, new_ctx, tuple(Var(n - 1 - order[j]) for j in range(n)))
    bwd = Morphism(new_ctx, ctx, tuple(Var(n - 1 - inv[i]) for i in range(n)))
    return new_ctx, fwd, bwd


def move_block_back(ctx: Context, start: int, length: int) -> tuple[Context, Morphism, Morphism]:
    """Move cells [start, start+length) to the end of the context."""
    n = len(ctx)
    order = list(range(start)) + list(range(start + length, n)) + list(range(start, start + length))
    return permute_context(ctx, order)


# ---------------------------------------------------------------------------
# Strong-sums collapse
# ---------------------------------------------------------------------------


def collapse_type(tele: Telescope) -> TypeExpr:
    """Fold a telescope into one iterated Sig type (Unit when empty)."""
    n = len(tele)
    if n == 0:
        return UnitT()
    head = Telescope(tele.cells[:-1])
    last = tele.cells[-1]
    prev = collapse_type(head)
    # reexpress the last cell over a single binder of the collapsed head
    lifted = weaken(last.ty, 1, at=n - 1)  # insert the new binder below the head cells
    spine = tuple(_proj_chain(n - 1, i) for i in range(n - 1))
    cod = subst(lifted, spine)
    return SigT("y", prev, cod)


def _proj_chain(n: int, i: int) -> Term:
    """Projection of component i out of an n-component collapsed tuple."""
    t: Term = Var(0)
    for _ in range(n - 1 - i):
        t = Fst(t)
    return Snd(t)


def _pair_tower(n: int) -> Term:
    t: Term = Star()
    for k in range(n):
        t = Pair(t, Var(n - 1 - k))
    return t


def sigma_collapse(
    sig: Signature, base: Context, tele: Telescope
) -> tuple[TypeExpr, Morphism, Morphism]:
    """Collapse [base, tele] -> base into a display map of one Sig type.

    Returns (collapsed type over base, fwd, bwd) where
    fwd : [base, tele] -> [base, z : Sig...] and bwd is its strict inverse
    (both composites definitionally the identity by Unit/Sig eta).
    """
    if not sig.strong_sums:
        raise CatError("sigma_collapse requires the strong_sums flag")
    n = len(tele)
    sty = collapse_type(tele)
    total = base + tele
    target = base.extend("z", sty)
    fwd = Morphism(
        total,
        target,
        var_spine(len(total), 0, len(base)) + (_pair_tower(n),),
    )
    bwd = Morphism(
        target,
        total,
        var_spine(len(target), 0, len(base)) + tuple(_proj_chain(n, i) for i in range(n)),
    )
    return sty, fwd, bwd


# ---------------------------------------------------------------------------
# Slice views
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SliceView:
    """Context-rebasing helpers for the tribe of fibrations over `base`."""

    base: Context

    def object(self, ext: Telescope) -> Fibration:
        return Fibration(self.base, ext)

    def change_of_base(self, p: Fibration, f: Morphism) -> tuple[Fibration, Square]:
        return pullback_display(p, f)

    def sigma_along(self, display: Fibration, upper: Fibration) -> Fibration:
        """Postcomposition with a display map: concatenate extensions."""
        if upper.base != display.total:
            raise CatError("sigma_along: fibration does not live over the display total")
        return Fibration(display.base, display.ext + upper.ext)

    def slice_of_slice(self, ext: Telescope) -> "SliceView":
        return SliceView(self.base + ext)
