"""Bidirectional verification of the four judgment forms.

Terms are fully annotated, so inference needs no unification: every
well-formed term has a principal type computed structurally, and `check`
is inference followed by definitional comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import defeq as dq
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
    Telescope,
    Term,
    TermDecl,
    TypeDecl,
    TypeExpr,
    UnitT,
    Var,
    ctx_lookup,
    subst,
    subst1,
)


class CheckError(Exception):
    """A judgment failed to verify; carries the failing rule and subterm."""

    def __init__(self, rule: str, message: str, subterm=None, expected=None, found=None):
        super().__init__(message)
        self.rule = rule
        self.message = message
        self.subterm = subterm
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class Report:
    ok: bool
    judgment: str
    rule: str = ""
    detail: str = ""

    @staticmethod
    def accept(judgment: str) -> "Report":
        return Report(True, judgment)

    @staticmethod
    def reject(judgment: str, err: CheckError) -> "Report":
        return Report(False, judgment, err.rule, err.message)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


def check_type(sig: Signature, ctx: Context, ty: TypeExpr) -> None:
    match ty:
        case TCon(name, args):
            decl = sig.lookup(name)
            if not isinstance(decl, TypeDecl):
                raise CheckError("type-const", f"{name} is not a declared type constant", ty)
            check_spine(sig, ctx, decl.params, args, head=name)
        case IdT(t, lhs, rhs):
            check_type(sig, ctx, t)
            check_term(sig, ctx, lhs, t)
            check_term(sig, ctx, rhs, t)
        case UnitT():
            if not sig.strong_sums:
                raise CheckError("strong-sums", "Unit requires the strong_sums flag", ty)
        case SigT(_, dom, cod):
            if not sig.strong_sums:
                raise CheckError("strong-sums", "Sig requires the strong_sums flag", ty)
            check_type(sig, ctx, dom)
            check_type(sig, ctx.extend("x", dom), cod)
        case _:
            raise CheckError("type", f"not a type expression: {ty!r}", ty)


def check_telescope(sig: Signature, ctx: Context, tele: Telescope) -> None:
    cur = ctx
    for i, cell in enumerate(tele):
        try:
            check_type(sig, cur, cell.ty)
        except CheckError as e:
            raise CheckError(e.rule, f"telescope entry {i} ({cell.name}): {e.message}", e.subterm)
        cur = cur.extend(cell.name, cell.ty)


def check_spine(
    sig: Signature,
    ctx: Context,
    params: Telescope,
    args: tuple[Term, ...],
    head: str = "",
) -> None:
    if len(args) != len(params):
        raise CheckError(
            "arity",
            f"{head or 'spine'} expects {len(params)} arguments, got {len(args)}",
        )
    for i, cell in enumerate(params):
        check_term(sig, ctx, args[i], subst(cell.ty, args[:i]))


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


def infer(sig: Signature, ctx: Context, t: Term) -> TypeExpr:
    match t:
        case Var(ix):
            if not 0 <= ix < len(ctx):
                raise CheckError("axiom", f"variable index {ix} out of scope", t)
            return ctx_lookup(ctx, ix)
        case Con(name, args):
            decl = sig.lookup(name)
            if not isinstance(decl, (TermDecl, DefDecl)):
                raise CheckError("term-const", f"{name} is not a declared term constant", t)
            check_spine(sig, ctx, decl.params, args, head=name)
            return subst(decl.result, args)
        case Refl(ty, arg):
            check_type(sig, ctx, ty)
            check_term(sig, ctx, arg, ty)
            return IdT(ty, arg, arg)
        case Star():
            if not sig.strong_sums:
                raise CheckError("strong-sums", "* requires the strong_sums flag", t)
            return UnitT()
        case Pair(_, _):
            raise CheckError("pair", "pair only checks against an annotated Sig type", t)
        case Fst(arg):
            # substitution can expose projection redexes; type the reduct
            red = dq.whnf(sig, t)
            if red != t:
                return infer(sig, ctx, red)
            aty = infer(sig, ctx, arg)
            if not isinstance(aty, SigT):
                raise CheckError("fst", "fst applied to a term of non-Sig type", t, found=aty)
            return aty.dom
        case Snd(arg):
            red = dq.whnf(sig, t)
            if red != t:
                return infer(sig, ctx, red)
            aty = infer(sig, ctx, arg)
            if not isinstance(aty, SigT):
                raise CheckError("snd", "snd applied to a term of non-Sig type", t, found=aty)
            return subst1(aty.cod, Fst(arg))
        case J(ty, names, delta, motive, branch, a, b, p, args):
            _check_elim_frame(sig, ctx, ty, names, delta, motive, branch)
            check_term(sig, ctx, a, ty)
            check_term(sig, ctx, b, ty)
            check_term(sig, ctx, p, IdT(ty, a, b))
            check_spine(sig, ctx, dq.subst_delta(delta, a, b, p), args, head="J instance")
            return subst(motive, (a, b, p) + args)
        case H(ty, names, delta, motive, branch, a, args):
            _check_elim_frame(sig, ctx, ty, names, delta, motive, branch)
            check_term(sig, ctx, a, ty)
            refl_a = Refl(ty, a)
            check_spine(
                sig, ctx, dq.subst_delta(delta, a, a, refl_a), args, head="H instance"
            )
            jterm = J(ty, names, delta, motive, branch, a, a, refl_a, args)
            dterm = subst(branch, (a,) + args)
            cty = subst(motive, (a, a, refl_a) + args)
            return IdT(cty, jterm, dterm)
        case _:
            raise CheckError("term", f"not a term: {t!r}", t)


def _check_elim_frame(
    sig: Signature,
    ctx: Context,
    ty: TypeExpr,
    names: tuple[str, str, str],
    delta: Telescope,
    motive: TypeExpr,
    branch: Term,
) -> None:
    check_type(sig, ctx, ty)
    ctx3 = ctx + dq.id_triple(ty, names)
    check_telescope(sig, ctx3, delta)
    check_type(sig, ctx3 + delta, motive)
    bctx = dq.branch_context(ctx, ty, delta)
    check_term(sig, bctx, branch, dq.branch_type(ty, delta, motive))


def check_term(sig: Signature, ctx: Context, t: Term, ty: TypeExpr) -> None:
    match t, ty:
        case Pair(x, y), SigT(_, dom, cod):
            if not sig.strong_sums:
                raise CheckError("strong-sums", "pair requires the strong_sums flag", t)
            check_term(sig, ctx, x, dom)
            check_term(sig, ctx, y, subst1(cod, x))
            return
        case Pair(_, _), _:
            raise CheckError("pair", "pair checked against a non-Sig type", t, expected=ty)
        case _:
            found = infer(sig, ctx, t)
            if not dq.defeq_types(sig, ctx, found, ty):
                raise CheckError(
                    "conversion",
                    "type mismatch: inferred type is not definitionally equal to the ascription",
                    t,
                    expected=ty,
                    found=found,
                )


# ---------------------------------------------------------------------------
# Report-producing wrappers
# ---------------------------------------------------------------------------


def check(sig: Signature, ctx: Context, t: Term, ty: TypeExpr) -> Report:
    judgment = "term-check"
    try:
        check_type(sig, ctx, ty)
        check_term(sig, ctx, t, ty)
        return Report.accept(judgment)
    except CheckError as e:
        return Report.reject(judgment, e)


def check_type_report(sig: Signature, ctx: Context, ty: TypeExpr) -> Report:
    judgment = "type-check"
    try:
        check_type(sig, ctx, ty)
        return Report.accept(judgment)
    except CheckError as e:
        return Report.reject(judgment, e)


def telescope_wf(sig: Signature, tele: Telescope, over: Context = Telescope()) -> Report:
    judgment = "telescope"
    try:
        check_telescope(sig, over, tele)
        return Report.accept(judgment)
    except CheckError as e:
        return Report.reject(judgment, e)


def check_context(sig: Signature, ctx: Context) -> None:
    check_telescope(sig, Telescope(), ctx)


# ---------------------------------------------------------------------------
# Signature construction
# ---------------------------------------------------------------------------


def declare_type(sig: Signature, name: str, params: Telescope) -> Signature:
    _require_fresh(sig, name)
    check_telescope(sig, Telescope(), params)
    return sig.declare(TypeDecl(name, params))


def declare_term(sig: Signature, name: str, params: Telescope, result: TypeExpr) -> Signature:
    _require_fresh(sig, name)
    check_telescope(sig, Telescope(), params)
    check_type(sig, params, result)
    return sig.declare(TermDecl(name, params, result))


def define(
    sig: Signature, name: str, params: Telescope, result: TypeExpr, body: Term
) -> Signature:
    _require_fresh(sig, name)
    check_telescope(sig, Telescope(), params)
    check_type(sig, params, result)
    check_term(sig, params, body, result)
    return sig.declare(DefDecl(name, params, result, body))


def _require_fresh(sig: Signature, name: str) -> None:
    if sig.lookup(name) is not None:
        raise CheckError("signature", f"name {name} already declared")
