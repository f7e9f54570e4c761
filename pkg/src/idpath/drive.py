"""Shared driver for derive requests, used by the CLI and the service.

A derive request names signature entities, runs the corresponding
constructive operation, and reports one confirmation line per re-checked
equation; the definitions added along the way can be emitted as a source
file that checks standalone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import cat, checker as ck, surface as sf
from . import pathtools as pt
from .cat import Fibration, Morphism, Square, compose, identity
from .checker import CheckError, Report
from .loader import elaborate_tele, params_to_tele
from .pathtools import hoequiv as he
from .pathtools.core import DeriveError
from .pathtools.sums import collapsed_relation
from .syntax import Con, DefDecl, Signature, TCon, Telescope, Var

DERIVE_KINDS = (
    "pathobj",
    "sym",
    "trans",
    "transport",
    "groupoid",
    "py",
    "contract",
    "similar",
    "fill",
    "twosix",
)

EXPLANATIONS = {
    "pathobj": (
        "Factor the fibrewise diagonal of a one-cell fibration through the\n"
        "context extended by a second copy and an identity type; reflexivity\n"
        "is the map sending a point to itself twice with a refl proof, and\n"
        "the two projections recover the endpoints."
    ),
    "sym": (
        "Path reversal compiled as a single path induction with an empty\n"
        "context-extension parameter: the motive swaps the endpoints and the\n"
        "branch is reflexivity; the computation witness relates the reversal\n"
        "of a reflexivity path back to reflexivity."
    ),
    "trans": (
        "Path composition compiled by eliminating the second path; because\n"
        "there are no function types, the first endpoint and the first path\n"
        "travel in the context-extension parameter of the eliminator, which\n"
        "is what makes the construction possible at all."
    ),
    "transport": (
        "Transport of a dependent fibre along a path in the base, compiled as\n"
        "path induction whose context-extension parameter carries the fibre\n"
        "element; the computation witness shows transporting along refl is\n"
        "homotopic to doing nothing."
    ),
    "groupoid": (
        "The five laws of the up-to-homotopy groupoid structure: associativity,\n"
        "both unit laws, and both inverse laws.  Each is produced by cancelling\n"
        "a recognised weak equivalence out of a chain of computation witnesses."
    ),
    "py": (
        "Path object for a telescope of any length by rank induction: split off\n"
        "the first cell, build the path object of the remaining fibration, use a\n"
        "lifting problem to obtain a transport for the tail along paths in the\n"
        "head, then take the pullback of the inner source map along transport.\n"
        "Reflexivity, symmetry and transitivity come from generalised-element\n"
        "recipes chained through transport-compatibility lemmas."
    ),
    "contract": (
        "Contractibility witnesses: a section of the fibration plus a section\n"
        "of its fibrewise path-object projection.  The source projection of a\n"
        "one-cell path object is contracted by filling the double-reflexivity\n"
        "square; composites and pullbacks are re-witnessed from parts."
    ),
    "similar": (
        "Two equivalence relations on the same fibration are similar when maps\n"
        "in both directions commute with the endpoint projections; produced\n"
        "from transport uniqueness for two transport choices, or by comparing\n"
        "the built path object against the collapsed sum type."
    ),
    "fill": (
        "A lifting problem with a recognised weak equivalence on the left and a\n"
        "projection on the right is compiled into a single eliminator: the lower\n"
        "triangle commutes on the nose, the upper one up to a fibrewise homotopy\n"
        "given by the propositional computation witness."
    ),
    "twosix": (
        "Two-out-of-six: from witnessed equivalences for the composites g.f and\n"
        "h.g, all of f, g, h and h.g.f acquire two-sided homotopy inverses,\n"
        "assembled by whiskering the given witnesses along the outer maps."
    ),
}


@dataclass
class DeriveOutcome:
    ok: bool
    lines: list[str] = field(default_factory=list)
    sig: Signature | None = None
    new_decls: tuple = ()
    detail: str = ""

    def report(self) -> Report:
        if self.ok:
            return Report(True, "derive")
        return Report(False, "derive", "derive", self.detail)


def _fib_from_params(sig: Signature, params) -> Fibration:
    tele = elaborate_tele(sig, Telescope(), params_to_tele(params))
    if len(tele) == 0:
        raise DeriveError("an empty telescope names no fibration")
    return Fibration(Telescope(tele.cells[:-1]), Telescope(tele.cells[-1:]))


def _tele_from_params(sig: Signature, params) -> Telescope:
    return elaborate_tele(sig, Telescope(), params_to_tele(params))


def _confirm(lines: list[str], label: str, failures: list[str]) -> bool:
    if failures:
        lines.append(f"recheck {label}: FAILED ({'; '.join(failures)})")
        return False
    lines.append(f"recheck {label}: ok")
    return True


def run_derive(sig: Signature, kind: str, params=(), names=()) -> DeriveOutcome:
    if kind not in DERIVE_KINDS:
        return DeriveOutcome(False, [], detail=f"unknown derive kind {kind!r}")
    try:
        return _dispatch(sig, kind, params, names)
    except (DeriveError, CheckError, pt.WitnessError, cat.CatError) as e:
        return DeriveOutcome(False, [], detail=str(e))


def _dispatch(sig: Signature, kind: str, params, names) -> DeriveOutcome:
    dc = pt.DerivationContext(sig)
    out = DeriveOutcome(True, [])
    ok = True

    if kind == "pathobj":
        fib = _fib_from_params(sig, params)
        po = pt.path_object(dc, fib)
        scope = sf.scope_names(po.rel.total)
        out.lines.append("path object context: " + sf.print_telescope(po.rel.total, []))
        ok &= _confirm(out.lines, "path object", po.recheck(dc.sig))

    elif kind == "sym":
        fib = _fib_from_params(sig, params)
        emitted, hw = pt.sym_witness(dc, fib)
        dc.sig = ck.define(dc.sig, _fresh_name(dc.sig, "sym"), emitted.params, emitted.result, emitted.body)
        out.lines.append(_show_def(dc.sig.decls[-1]))
        ok &= _confirm(out.lines, "reversal of refl is refl up to a path", hw.recheck(dc.sig))

    elif kind == "trans":
        fib = _fib_from_params(sig, params)
        emitted, hw = pt.trans_witness(dc, fib)
        dc.sig = ck.define(dc.sig, _fresh_name(dc.sig, "trans"), emitted.params, emitted.result, emitted.body)
        out.lines.append(_show_def(dc.sig.decls[-1]))
        ok &= _confirm(out.lines, "composing with refl is the identity up to a path", hw.recheck(dc.sig))

    elif kind == "transport":
        tele = _tele_from_params(sig, params)
        if len(tele) < 2:
            raise DeriveError("transport needs a base cell and a fibre cell")
        p = Fibration(Telescope(tele.cells[:-1]), Telescope(tele.cells[-1:]))
        tw = pt.transport(dc, p)
        out.lines.append("transport built for the last cell along paths in the one before it")
        ok &= _confirm(out.lines, "transport equations", tw.recheck(dc.sig))

    elif kind == "groupoid":
        fib = _fib_from_params(sig, params)
        laws = pt.groupoid_laws(dc, fib)
        for name, hw in laws.items():
            ok &= _confirm(out.lines, f"groupoid law {name}", hw.recheck(dc.sig))

    elif kind == "py":
        tele = _tele_from_params(sig, params)
        bundle = pt.build_py(dc, Fibration(Telescope(), tele))
        out.lines.append(
            "path object context: " + sf.print_telescope(bundle.pobj.rel.total, [])
        )
        ok &= _confirm(out.lines, "reflexivity over the diagonal", bundle.pobj.recheck(dc.sig))
        ok &= _confirm(out.lines, "equivalence relation equations", bundle.eqrel.recheck(dc.sig))
        ok &= _confirm(out.lines, "transport bundle", bundle.transport.recheck(dc.sig))

    elif kind == "contract":
        tele = _tele_from_params(sig, params)
        w = pt.contract_source(dc, Fibration(Telescope(), tele))
        out.lines.append("sections built for the source projection and its path object")
        ok &= _confirm(out.lines, "contractibility sections", w.recheck(dc.sig))

    elif kind == "similar":
        tele = _tele_from_params(sig, params)
        fib = Fibration(Telescope(), tele)
        bundle = pt.build_py(dc, fib)
        if dc.sig.strong_sums:
            other = collapsed_relation(dc, fib)
            label = "built relation vs collapsed sum relation"
        elif fib.rank >= 2:
            ps2 = dc.alt_structure(fib)
            from .pathtools.witnesses import EquivRelWitness, require_clean

            other = require_clean(
                EquivRelWitness(fib, ps2.relfib, ps2.r, ps2.sym_mor, ps2.trans_mor, ps2.trans_dom),
                dc.sig,
            )
            dc.register_relation(ps2.relfib, ("alt", fib, ps2))
            label = "two transport derivations"
        else:
            other = bundle.eqrel
            label = "identity comparison"
        w = pt.similar_maps(dc, bundle.eqrel, other)
        out.lines.append(f"comparison maps built: {label}")
        ok &= _confirm(out.lines, "comparison maps preserve endpoints", w.recheck(dc.sig))

    elif kind == "fill":
        fib = _fib_from_params(sig, params)
        ps = dc.path_structure(fib)
        bottom = Morphism(ps.total, ps.xx, ps.tau().spine + ps.sigma().spine[len(fib.base) :])
        sq = Square(top=ps.r, bottom=bottom, west=ps.r, east=ps.relfib.projection())
        d, hw = pt.jfill(dc, sq)
        out.lines.append("filler found for the endpoint-swap square")
        ok &= _confirm(out.lines, "upper homotopy", hw.recheck(dc.sig))
        lhs = compose(ps.relfib.projection(), d)
        if cat.morphism_eq(dc.sig, lhs, bottom):
            out.lines.append("recheck lower triangle: ok")
        else:
            out.lines.append("recheck lower triangle: FAILED")
            ok = False

    elif kind == "twosix":
        if len(names) != 9:
            raise DeriveError(
                "twosix needs nine names: f g h, inverse of g.f with two paths, "
                "inverse of h.g with two paths"
            )
        out2 = _twosix(dc, names)
        for nm, e in out2.items():
            ok &= _confirm(out.lines, f"homotopy equivalence {nm}", e.recheck(dc.sig))

    out.ok = ok
    out.sig = dc.sig
    out.new_decls = tuple(d for d in dc.sig.decls if sig.lookup(d.name) is None)
    return out


def _twosix(dc, names):
    sig = dc.sig
    f_n, g_n, h_n, i1, e1, e2, i2, e3, e4 = names

    def unary(name):
        decl = sig.lookup(name)
        if decl is None or len(decl.params) != 1:
            raise DeriveError(f"{name} is not a declared one-argument term constant")
        src = Telescope.of(("o", decl.params[0].ty))
        dst = Telescope.of(("o", decl.result))
        return Morphism(src, dst, (Con(name, (Var(0),)),))

    f, g, h = unary(f_n), unary(g_n), unary(h_n)
    u1, u2 = unary(i1), unary(i2)

    def post_hom(fib_ctx, endpoint, wit_name):
        fib = Fibration(Telescope(), fib_ctx)
        ps = dc.path_structure(fib)
        hmor = Morphism(
            fib_ctx, ps.total, (endpoint.spine[0], Var(0), Con(wit_name, (Var(0),)))
        )
        return pt.homotopy_between(dc, fib, hmor)

    w_gf = he.HoEquiv(
        compose(g, f),
        u1,
        post_hom(g.dst, compose(compose(g, f), u1), e1),
        post_hom(f.src, compose(u1, compose(g, f)), e2),
    )
    w_hg = he.HoEquiv(
        compose(h, g),
        u2,
        post_hom(h.dst, compose(compose(h, g), u2), e3),
        post_hom(g.src, compose(u2, compose(h, g)), e4),
    )
    return he.two_out_of_six(dc, f, g, h, w_gf, w_hg)


def _fresh_name(sig: Signature, base: str) -> str:
    if sig.lookup(base) is None:
        return base
    i = 1
    while sig.lookup(f"{base}{i}") is not None:
        i += 1
    return f"{base}{i}"


def _show_def(decl: DefDecl) -> str:
    return sf.print_directive(
        sf.DefDirective(
            decl.name,
            tuple(
                sf.SParam(n, c.ty)
                for n, c in zip(sf.scope_names(decl.params), decl.params)
            ),
            decl.result,
            decl.body,
        )
    )


def emitted_source(original: str, outcome: DeriveOutcome) -> str:
    """Source file with the derivation's definitions appended."""
    parts = [original.rstrip(), ""]
    parts.append("-- definitions emitted by derive; the file re-checks standalone")
    for decl in outcome.new_decls:
        if isinstance(decl, DefDecl):
            parts.append(_show_def(decl))
    return "\n".join(parts) + "\n"
