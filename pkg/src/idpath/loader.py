"""Elaborate parsed files into checked signatures and judgment reports.

The parser leaves the domain annotation of J/H nodes unresolved; here it is
filled in from the scrutinee's inferred type, which is principal because
every other node is fully annotated.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import checker as ck
from . import defeq as dq
from . import surface as sf
from .checker import CheckError, Report
from .syntax import (
    Con,
    Context,
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
)


def params_to_tele(params: tuple[sf.SParam, ...]) -> Telescope:
    return Telescope(tuple(TeleCell(p.name, p.ty) for p in params))


def elaborate_type(sig: Signature, ctx: Context, ty: TypeExpr) -> TypeExpr:
    match ty:
        case TCon(name, args):
            return TCon(name, tuple(elaborate_term(sig, ctx, a) for a in args))
        case IdT(t, lhs, rhs):
            te = elaborate_type(sig, ctx, t)
            return IdT(te, elaborate_term(sig, ctx, lhs), elaborate_term(sig, ctx, rhs))
        case UnitT():
            return ty
        case SigT(name, dom, cod):
            dome = elaborate_type(sig, ctx, dom)
            return SigT(name, dome, elaborate_type(sig, ctx.extend(name, dome), cod))
    raise CheckError("type", f"not a type expression: {ty!r}", ty)


def elaborate_tele(sig: Signature, ctx: Context, tele: Telescope) -> Telescope:
    cells = []
    cur = ctx
    for cell in tele:
        tye = elaborate_type(sig, cur, cell.ty)
        cells.append(TeleCell(cell.name, tye))
        cur = cur.extend(cell.name, tye)
    return Telescope(tuple(cells))


def elaborate_term(sig: Signature, ctx: Context, t: Term) -> Term:
    match t:
        case Var(_) | Star():
            return t
        case Con(name, args):
            return Con(name, tuple(elaborate_term(sig, ctx, a) for a in args))
        case Refl(ty, arg):
            return Refl(elaborate_type(sig, ctx, ty), elaborate_term(sig, ctx, arg))
        case Pair(x, y):
            return Pair(elaborate_term(sig, ctx, x), elaborate_term(sig, ctx, y))
        case Fst(x):
            return Fst(elaborate_term(sig, ctx, x))
        case Snd(x):
            return Snd(elaborate_term(sig, ctx, x))
        case J(ty, names, delta, motive, branch, a, b, p, args):
            frame = _elaborate_frame(sig, ctx, ty, names, delta, motive, branch, a)
            tye, deltae, motivee, branche, ae = frame
            return J(
                tye,
                names,
                deltae,
                motivee,
                branche,
                ae,
                elaborate_term(sig, ctx, b),
                elaborate_term(sig, ctx, p),
                tuple(elaborate_term(sig, ctx, x) for x in args),
            )
        case H(ty, names, delta, motive, branch, a, args):
            frame = _elaborate_frame(sig, ctx, ty, names, delta, motive, branch, a)
            tye, deltae, motivee, branche, ae = frame
            return H(
                tye,
                names,
                deltae,
                motivee,
                branche,
                ae,
                tuple(elaborate_term(sig, ctx, x) for x in args),
            )
    raise CheckError("term", f"not a term: {t!r}", t)


def _elaborate_frame(sig, ctx, ty, names, delta, motive, branch, a):
    ae = elaborate_term(sig, ctx, a)
    if isinstance(ty, sf.InferTy):
        tye = ck.infer(sig, ctx, ae)
    else:
        tye = elaborate_type(sig, ctx, ty)
    ctx3 = ctx + dq.id_triple(tye, names)
    deltae = elaborate_tele(sig, ctx3, delta)
    motivee = elaborate_type(sig, ctx3 + deltae, motive)
    bctx = dq.branch_context(ctx, tye, deltae)
    branche = elaborate_term(sig, bctx, branch)
    return tye, deltae, motivee, branche, ae


# ---------------------------------------------------------------------------
# Directive processing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirectiveResult:
    directive: sf.Directive
    report: Report
    line: int


def load_signature(
    file: sf.SourceFile,
    base: Signature | None = None,
    strong_sums: bool = False,
) -> Signature:
    """Build the signature from postulate/def/flag directives, atomically.

    Raises CheckError on the first failing declaration.
    """
    sig = (base or Signature()).with_strong_sums(strong_sums or (base.strong_sums if base else False))
    for d in file.directives:
        sig = _apply_decl(sig, d)
    return sig


def _apply_decl(sig: Signature, d: sf.Directive) -> Signature:
    match d:
        case sf.FlagDirective("strong_sums"):
            return sig.with_strong_sums(True)
        case sf.PostulateType(name, params):
            tele = elaborate_tele(sig, Telescope(), params_to_tele(params))
            return ck.declare_type(sig, name, tele)
        case sf.PostulateTerm(name, params, result):
            tele = elaborate_tele(sig, Telescope(), params_to_tele(params))
            res = elaborate_type(sig, tele, result)
            return ck.declare_term(sig, name, tele, res)
        case sf.DefDirective(name, params, result, body):
            tele = elaborate_tele(sig, Telescope(), params_to_tele(params))
            res = elaborate_type(sig, tele, result)
            bod = elaborate_term(sig, tele, body)
            return ck.define(sig, name, tele, res, bod)
        case _:
            return sig


def run_directives(
    file: sf.SourceFile,
    strong_sums: bool = False,
    derive_handler=None,
) -> tuple[Signature, list[DirectiveResult]]:
    """Process directives in order; never raises on judgment failures.

    Declaration directives extend the signature only when they check; check
    directives produce accept/reject reports; derive directives are passed
    to `derive_handler(sig, directive) -> (Report, Signature)` when given.
    """
    sig = Signature().with_strong_sums(strong_sums)
    results: list[DirectiveResult] = []
    for d in file.directives:
        line = getattr(d, "line", 0)
        try:
            match d:
                case sf.FlagDirective() | sf.PostulateType() | sf.PostulateTerm() | sf.DefDirective():
                    sig = _apply_decl(sig, d)
                    results.append(DirectiveResult(d, Report.accept("declaration"), line))
                case sf.CheckTerm(ctx, term, ty):
                    tele = elaborate_tele(sig, Telescope(), params_to_tele(ctx))
                    tye = elaborate_type(sig, tele, ty)
                    tme = elaborate_term(sig, tele, term)
                    results.append(DirectiveResult(d, ck.check(sig, tele, tme, tye), line))
                case sf.CheckType(ctx, ty):
                    tele = elaborate_tele(sig, Telescope(), params_to_tele(ctx))
                    tye = elaborate_type(sig, tele, ty)
                    results.append(
                        DirectiveResult(d, ck.check_type_report(sig, tele, tye), line)
                    )
                case sf.DeriveDirective():
                    if derive_handler is None:
                        results.append(
                            DirectiveResult(
                                d,
                                Report(False, "derive", "derive", "no derive handler"),
                                line,
                            )
                        )
                    else:
                        report, sig = derive_handler(sig, d)
                        results.append(DirectiveResult(d, report, line))
        except CheckError as e:
            results.append(DirectiveResult(d, Report.reject("declaration", e), line))
    return sig, results
