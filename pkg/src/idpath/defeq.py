"""Definitional equality: weak head normalisation plus type-directed comparison.

Only the strong-sums equations compute (projections of pairs, eta at Unit
and Sigma) and definitions unfold at head position; J, H and refl are inert,
so the propositional computation rule is never identified definitionally.
"""

from __future__ import annotations

from .syntax import (
    Con,
    Context,
    DefDecl,
    Fst,
    H,
    IdT,
    J,
    Pair,
    Refl,
    SigT,
    Signature,
    Snd,
    Star,
    TCon,
    TeleCell,
    Telescope,
    Term,
    TypeExpr,
    UnitT,
    Var,
    ctx_lookup,
    subst,
    subst1,
    weaken,
)


def whnf(sig: Signature, t: Term) -> Term:
    """Reduce until the head is not a redex.

    Projections of pairs reduce, definitions unfold at the head; variables,
    postulated constants, refl, J and H are inert heads.
    """
    while True:
        match t:
            case Fst(arg):
                inner = whnf(sig, arg)
                if isinstance(inner, Pair):
                    t = inner.fst
                    continue
                return Fst(inner)
            case Snd(arg):
                inner = whnf(sig, arg)
                if isinstance(inner, Pair):
                    t = inner.snd
                    continue
                return Snd(inner)
            case Con(name, args):
                decl = sig.lookup(name)
                if isinstance(decl, DefDecl):
                    t = subst(decl.body, args)
                    continue
                return t
            case _:
                return t


def whnf_type(sig: Signature, ty: TypeExpr) -> TypeExpr:
    # No type-level definitions exist, so types are already head-normal.
    return ty


def _decl_params(sig: Signature, name: str) -> Telescope:
    decl = sig.lookup(name)
    if decl is None:
        raise KeyError(f"undeclared constant {name}")
    return decl.params


def defeq_spine(
    sig: Signature,
    ctx: Context,
    params: Telescope,
    xs: tuple[Term, ...],
    ys: tuple[Term, ...],
) -> bool:
    """Compare two spines componentwise at the declared telescope types."""
    if len(xs) != len(ys) or len(xs) != len(params):
        return False
    for i, cell in enumerate(params):
        ty = subst(cell.ty, xs[:i])
        if not defeq_terms(sig, ctx, ty, xs[i], ys[i]):
            return False
    return True


def defeq_terms(sig: Signature, ctx: Context, ty: TypeExpr, t1: Term, t2: Term) -> bool:
    """Type-directed equality; both terms are assumed to check at `ty`."""
    if t1 == t2:
        return True
    match whnf_type(sig, ty):
        case UnitT():
            return True
        case SigT(_, dom, cod):
            f1, f2 = Fst(t1), Fst(t2)
            if not defeq_terms(sig, ctx, dom, f1, f2):
                return False
            return defeq_terms(sig, ctx, subst1(cod, f1), Snd(t1), Snd(t2))
        case _:
            return _defeq_neutral(sig, ctx, t1, t2)


def _defeq_neutral(sig: Signature, ctx: Context, t1: Term, t2: Term) -> bool:
    """Structural comparison after head normalisation.

    Sound for terms of identity or constant type, where no eta rule applies.
    """
    # Congruence shortcut: equal heads with equal spines need no unfolding.
    if (
        isinstance(t1, Con)
        and isinstance(t2, Con)
        and t1.name == t2.name
        and defeq_spine(sig, ctx, _decl_params(sig, t1.name), t1.args, t2.args)
    ):
        return True
    t1 = whnf(sig, t1)
    t2 = whnf(sig, t2)
    if t1 == t2:
        return True
    match t1, t2:
        case Var(i), Var(j):
            return i == j
        case Con(n1, a1), Con(n2, a2):
            # Definitions were unfolded by whnf, so both heads are postulates.
            return n1 == n2 and defeq_spine(sig, ctx, _decl_params(sig, n1), a1, a2)
        case Refl(ty1, a1), Refl(ty2, a2):
            return defeq_types(sig, ctx, ty1, ty2) and defeq_terms(sig, ctx, ty1, a1, a2)
        case Fst(a), Fst(b):
            return _defeq_neutral(sig, ctx, a, b)
        case Snd(a), Snd(b):
            return _defeq_neutral(sig, ctx, a, b)
        case Star(), Star():
            return True
        case Pair(a1, b1), Pair(a2, b2):
            # Reached only in untyped positions; componentwise is sound there.
            return _defeq_neutral(sig, ctx, a1, a2) and _defeq_neutral(sig, ctx, b1, b2)
        case (
            J(ty1, _, d1, m1, br1, a1, b1, p1, e1),
            J(ty2, _, d2, m2, br2, a2, b2, p2, e2),
        ):
            return (
                _defeq_elim_frame(sig, ctx, ty1, d1, m1, br1, ty2, d2, m2, br2)
                and defeq_terms(sig, ctx, ty1, a1, a2)
                and defeq_terms(sig, ctx, ty1, b1, b2)
                and defeq_terms(sig, ctx, IdT(ty1, a1, b1), p1, p2)
                and defeq_spine(sig, ctx, subst_delta(d1, a1, b1, p1), e1, e2)
            )
        case H(ty1, _, d1, m1, br1, a1, e1), H(ty2, _, d2, m2, br2, a2, e2):
            return (
                _defeq_elim_frame(sig, ctx, ty1, d1, m1, br1, ty2, d2, m2, br2)
                and defeq_terms(sig, ctx, ty1, a1, a2)
                and defeq_spine(
                    sig,
                    ctx,
                    subst_delta(d1, a1, a1, Refl(ty1, a1)),
                    e1,
                    e2,
                )
            )
        case _:
            return False


def id_triple(ty: TypeExpr, names=("x", "y", "u")) -> Telescope:
    """The telescope x:ty, y:ty, u:Id(ty,x,y) over the ambient context."""
    return Telescope(
        (
            TeleCell(names[0], ty),
            TeleCell(names[1], weaken(ty, 1)),
            TeleCell(names[2], IdT(weaken(ty, 2), Var(1), Var(0))),
        )
    )


def subst_delta(delta: Telescope, a: Term, b: Term, p: Term) -> Telescope:
    """Instantiate a J-style delta telescope at the triple (a, b, p)."""
    from .syntax import subst_tele

    return subst_tele(delta, (a, b, p))


def _defeq_elim_frame(
    sig: Signature,
    ctx: Context,
    ty1: TypeExpr,
    d1: Telescope,
    m1: TypeExpr,
    br1: Term,
    ty2: TypeExpr,
    d2: Telescope,
    m2: TypeExpr,
    br2: Term,
) -> bool:
    """Compare the shared annotations of J/H nodes componentwise."""
    if not defeq_types(sig, ctx, ty1, ty2):
        return False
    ctx3 = ctx + id_triple(ty1)
    if not defeq_teles(sig, ctx3, d1, d2):
        return False
    if not defeq_types(sig, ctx3 + d1, m1, m2):
        return False
    ctx_b = branch_context(ctx, ty1, d1)
    return defeq_terms(sig, ctx_b, branch_type(ty1, d1, m1), br1, br2)


def refl_spine(ty: TypeExpr) -> tuple[Term, Term]:
    """The pair (x, refl x) over ctx,x, used to collapse y,u binders."""
    return (Var(0), Refl(weaken(ty, 1), Var(0)))


def branch_context(ctx: Context, ty: TypeExpr, delta: Telescope) -> Context:
    """ctx, x:ty, delta[x, x, refl x]."""
    from .syntax import subst_tele

    return ctx.extend("x", ty) + subst_tele(delta, refl_spine(ty))


def branch_type(ty: TypeExpr, delta: Telescope, motive: TypeExpr) -> TypeExpr:
    """Expected type of the branch over branch_context.

    The motive lives over ctx,x,y,u,delta; substitute y := x, u := refl x
    while keeping x and the delta binders.
    """
    return subst(motive, refl_spine(ty), at=len(delta))


def defeq_teles(sig: Signature, ctx: Context, t1: Telescope, t2: Telescope) -> bool:
    if len(t1) != len(t2):
        return False
    cur = ctx
    for c1, c2 in zip(t1, t2):
        if not defeq_types(sig, cur, c1.ty, c2.ty):
            return False
        cur = cur.extend(c1.name, c1.ty)
    return True


def defeq_types(sig: Signature, ctx: Context, ty1: TypeExpr, ty2: TypeExpr) -> bool:
    """Congruence closure over the type formers."""
    if ty1 == ty2:
        return True
    match ty1, ty2:
        case TCon(n1, a1), TCon(n2, a2):
            return n1 == n2 and defeq_spine(sig, ctx, _decl_params(sig, n1), a1, a2)
        case IdT(t1, l1, r1), IdT(t2, l2, r2):
            return (
                defeq_types(sig, ctx, t1, t2)
                and defeq_terms(sig, ctx, t1, l1, l2)
                and defeq_terms(sig, ctx, t1, r1, r2)
            )
        case UnitT(), UnitT():
            return True
        case SigT(_, d1, c1), SigT(_, d2, c2):
            if not defeq_types(sig, ctx, d1, d2):
                return False
            return defeq_types(sig, ctx.extend("x", d1), c1, c2)
        case _:
            return False
