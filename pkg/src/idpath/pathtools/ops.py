"""Public witness-compiler operations.

Each operation runs one of the constructive arguments the engine supports
and returns witness bundles that have been re-checked by the kernel; a
re-check failure raises rather than returning a defective bundle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import cat
from ..cat import Fibration, Morphism, compose, identity, pullback_display, pullback_pair
from ..syntax import (
    Context,
    IdT,
    Refl,
    Telescope,
    Term,
    TypeExpr,
    Var,
    id_spine,
    subst,
    var_spine,
    weaken,
    weaken_tele,
)
from .builders import ap_j, sym_h, sym_j, trans_h, trans_j
from .core import (
    DerivationContext,
    DeriveError,
    TransportData,
    WeqCert,
    cert_conjugate,
    transport_apply,
    vat,
    vseg,
)
from .witnesses import (
    ContractWitness,
    EquivRelWitness,
    Homotopy,
    PathObject,
    TransportWitness,
    WitnessError,
    make_homotopy,
    require_clean,
)


@dataclass(frozen=True)
class EmittedDef:
    """A definition ready to be declared in a signature."""

    name: str
    params: Telescope
    result: TypeExpr
    body: Term


def homotopy_between(dc: DerivationContext, fib: Fibration, hmor: Morphism) -> Homotopy:
    """Package a raw morphism into a path structure as a checked homotopy."""
    ps = dc.path_structure(fib)
    g, n = ps.g, ps.n
    proj = compose(ps.relfib.projection(), hmor)
    f = Morphism(hmor.src, fib.total, proj.spine[: g + n])
    g_mor = Morphism(hmor.src, fib.total, proj.spine[:g] + proj.spine[g + n :])
    return make_homotopy(dc.sig, fib, ps.relfib, f, g_mor, hmor)


# ---------------------------------------------------------------------------
# Path objects and the single-cell witnesses
# ---------------------------------------------------------------------------


def path_object(dc: DerivationContext, fib: Fibration) -> PathObject:
    if fib.rank != 1:
        raise DeriveError("path_object expects a one-cell fibration")
    ps = dc.path_structure(fib)
    return require_clean(PathObject(fib, ps.relfib, ps.r), dc.sig)


def sym_witness(dc: DerivationContext, fib: Fibration) -> tuple[EmittedDef, Homotopy]:
    """Path reversal for a one-cell fibration, with its computation witness."""
    ps = dc.path_structure(fib)
    if ps.n != 1:
        raise DeriveError("sym_witness expects a one-cell fibration")
    a = fib.ext[0].ty
    emitted = EmittedDef(
        name="sym",
        params=ps.total,
        result=IdT(weaken(a, 3), Var(1), Var(2)),
        body=ps.sym_mor.spine[-1],
    )
    # homotopy: sym . refl is homotopic to refl
    la = len(fib.total)
    a1 = weaken(a, 1)
    refl0 = Refl(a1, Var(0))
    h = Morphism(
        fib.total,
        dc.p2_structure(ps).total,
        var_spine(la, 0, ps.g)
        + (Var(0), Var(0), sym_j(a1, Var(0), Var(0), refl0), refl0, sym_h(a1, Var(0))),
    )
    return emitted, homotopy_between(dc, ps.relfib, h)


def trans_witness(dc: DerivationContext, fib: Fibration) -> tuple[EmittedDef, Homotopy]:
    """Path composition with its right-unit computation witness."""
    ps = dc.path_structure(fib)
    if ps.n != 1:
        raise DeriveError("trans_witness expects a one-cell fibration")
    a = fib.ext[0].ty
    emitted = EmittedDef(
        name="trans",
        params=ps.trans_dom.total,
        result=IdT(weaken(a, 5), Var(4), Var(1)),
        body=ps.trans_mor.spine[-1],
    )
    return emitted, homotopy_between(dc, ps.relfib, dc.groupoid_unit(ps))


def transport(dc: DerivationContext, p: Fibration) -> TransportWitness:
    """Transport of a one-cell fibration along paths in its one-cell base."""
    if p.rank != 1 or len(p.base) == 0:
        raise DeriveError("transport expects a one-cell fibration over a nonempty base")
    big = Fibration(
        Telescope(p.base.cells[:-1]), Telescope(p.base.cells[-1:]) + p.ext
    )
    ps = dc.path_structure(big)
    td = ps.transport
    return require_clean(
        TransportWitness(
            fib=p,
            dom=td.dom,
            gamma=td.gamma,
            coherence=homotopy_between(dc, ps.split_q, td.coherence),
        ),
        dc.sig,
    )


# ---------------------------------------------------------------------------
# Groupoid laws
# ---------------------------------------------------------------------------


def groupoid_laws(dc: DerivationContext, fib: Fibration) -> dict[str, Homotopy]:
    """All five homotopies of the up-to-homotopy groupoid structure."""
    ps = dc.path_structure(fib)
    if ps.n != 1:
        raise DeriveError("groupoid_laws expects a one-cell fibration")
    relfib = ps.relfib
    laws = {
        "assoc": _law_assoc(dc, ps),
        "unit-right": dc.groupoid_unit(ps),
        "unit-left": _law_unit_left(dc, ps),
        "inverse-right": dc.groupoid_inverse(ps),
        "inverse-left": _law_inverse_left(dc, ps),
    }
    return {k: homotopy_between(dc, relfib, h) for k, h in laws.items()}


def _law_unit_left(dc: DerivationContext, ps) -> Morphism:
    """Composing a reflexivity path on the left is homotopic to the identity."""
    g = ps.g
    a = ps.fib.ext[0].ty
    p2a = dc.p2_structure(ps)
    chain = compose(dc.groupoid_unit(ps), ps.r)
    lt = g + 3
    ty3 = weaken(a, 3)
    f3 = trans_j(ty3, Var(2), Var(1), Var(0), Var(2), Refl(ty3, Var(2)))
    bottom = Morphism(
        ps.total,
        p2a.xx,
        vseg(lt, 0, g) + (Var(2), Var(1), f3, Var(0)),
    )
    cert = dc.cert_r(ps.fib)
    filler, _ = dc.fill(cert, p2a.relfib, chain, bottom)
    return filler


def _law_inverse_left(dc: DerivationContext, ps) -> Morphism:
    """Composing a reversal with the path lands on reflexivity at the target."""
    g = ps.g
    a = ps.fib.ext[0].ty
    p2a = dc.p2_structure(ps)
    actx = ps.fib.total
    la = g + 1
    a1 = weaken(a, 1)
    a2 = weaken(a, 2)
    refl0 = Refl(a1, Var(0))
    sr = sym_j(a1, Var(0), Var(0), refl0)
    h_sigma = sym_h(a1, Var(0))
    idty = IdT(a1, Var(0), Var(0))
    # body over [actx, v]: compose v with a reflexivity path on the right
    body = trans_j(a2, Var(1), Var(1), Refl(a2, Var(1)), Var(1), Var(0))
    pp1 = ap_j(idty, sr, refl0, h_sigma, body, idty)
    mu_sr_r = trans_j(a1, Var(0), Var(0), refl0, Var(0), sr)
    mu_r_r = trans_j(a1, Var(0), Var(0), refl0, Var(0), refl0)
    pp2 = trans_h(a1, Var(0), Var(0), refl0)
    el1 = Morphism(
        actx, p2a.total, var_spine(la, 0, g) + (Var(0), Var(0), mu_sr_r, mu_r_r, pp1)
    )
    el2 = Morphism(
        actx, p2a.total, var_spine(la, 0, g) + (Var(0), Var(0), mu_r_r, refl0, pp2)
    )
    chain = p2a.comp_w(el1, el2)
    lt = g + 3
    ty3 = weaken(a, 3)
    sigma_u = sym_j(ty3, Var(2), Var(1), Var(0))
    f5 = trans_j(ty3, Var(2), Var(1), Var(0), Var(1), sigma_u)
    bottom = Morphism(
        ps.total,
        p2a.xx,
        vseg(lt, 0, g) + (Var(1), Var(1), f5, Refl(ty3, Var(1))),
    )
    cert = dc.cert_r(ps.fib)
    filler, _ = dc.fill(cert, p2a.relfib, chain, bottom)
    return filler


def _law_assoc(dc: DerivationContext, ps) -> Morphism:
    g = ps.g
    a = ps.fib.ext[0].ty
    p2a = dc.p2_structure(ps)
    p2 = ps.trans_dom.total  # [base, x0, x1, u, x2, v]
    l2 = len(p2)
    ty5 = weaken(a, 5)
    mu_uv = trans_j(ty5, Var(3), Var(1), Var(0), Var(4), Var(2))
    mu_point = Morphism(p2, ps.total, vseg(l2, 0, g) + (Var(4), Var(1), mu_uv))
    link_a = compose(dc.groupoid_unit(ps), mu_point)
    v_point = Morphism(p2, ps.total, vseg(l2, 0, g) + (Var(3), Var(1), Var(0)))
    g2v = compose(dc.groupoid_unit(ps), v_point)
    w_b = g2v.spine[-1]
    mu_v_refl = g2v.spine[-3]
    # body over [p2, z]: compose u with z
    ty6 = weaken(a, 6)
    body = trans_j(ty6, Var(4), Var(2), Var(0), Var(5), Var(3))
    ap_e = ap_j(IdT(ty5, Var(3), Var(1)), mu_v_refl, Var(0), w_b, body, IdT(ty5, Var(4), Var(1)))
    mu_u_muvrefl = trans_j(ty5, Var(3), Var(1), mu_v_refl, Var(4), Var(2))
    el_a = Morphism(
        p2, p2a.total, vseg(l2, 0, g) + (Var(4), Var(1), mu_u_muvrefl, mu_uv, ap_e)
    )
    chain = p2a.comp_w(el_a, p2a.flip_w(link_a))
    # stage with three composable paths
    p3 = p2.extend("x3", weaken(a, l2 - g))
    p3 = p3.extend("w3", IdT(weaken(a, l2 - g + 1), Var(2), Var(0)))
    l3 = len(p3)
    ty7 = weaken(a, 7)
    mu_vw = trans_j(ty7, Var(3), Var(1), Var(0), Var(5), Var(2))
    mu_uv3 = trans_j(ty7, Var(5), Var(3), Var(2), Var(6), Var(4))
    f1 = trans_j(ty7, Var(5), Var(1), mu_vw, Var(6), Var(4))
    g1 = trans_j(ty7, Var(3), Var(1), Var(0), Var(6), mu_uv3)
    bottom = Morphism(
        p3, p2a.xx, vseg(l3, 0, g) + (Var(6), Var(1), f1, g1)
    )
    # certificate: append a reflexivity path at the far endpoint
    order_w = list(range(g)) + [g + 3] + [g, g + 1, g + 2] + [g + 4]
    p2re, p2_to_re, re_to_p2 = cat.permute_context(p2, order_w)
    cert_rec = dc.cert_recurring(
        Fibration(Telescope(p2re.cells[: g + 1]), Telescope(p2re.cells[g + 1 :]))
    )
    u3_ctx = cert_rec.g.dst
    order_u = (
        list(range(g))
        + list(range(g + 1, g + 4))
        + [g]
        + [g + 4, g + 5, g + 6]
    )
    p3c, u3_to_p3, p3_to_u3 = cat.permute_context(u3_ctx, order_u)
    if p3c != p3:
        raise DeriveError("associativity stage mismatch")
    g_m = compose(u3_to_p3, compose(cert_rec.g, p2_to_re))
    cert = cert_conjugate(cert_rec, g_m, p3_to_u3, u3_to_p3, p2_to_re, re_to_p2)
    filler, _ = dc.fill(cert, p2a.relfib, chain, bottom)
    return filler


# ---------------------------------------------------------------------------
# Structural weak equivalences and lifting problems
# ---------------------------------------------------------------------------


def as_fibration(m: Morphism) -> Fibration | None:
    """Recognise a morphism that is literally a canonical projection."""
    k = len(m.src) - len(m.dst)
    if k < 0:
        return None
    if Telescope(m.src.cells[: len(m.dst)]) != m.dst:
        return None
    if m.spine != var_spine(len(m.src), 0, len(m.dst)):
        return None
    return Fibration(m.dst, Telescope(m.src.cells[len(m.dst) :]))


def is_structural_weq(dc: DerivationContext, m: Morphism) -> WeqCert | None:
    """Sound, deliberately incomplete recogniser for certified maps."""
    reg = dc.registered_cert(m)
    if reg is not None:
        return reg
    lv = len(m.src)
    if len(m.dst) != lv + 2 or lv == 0:
        return None
    spine = m.spine
    if spine[:lv] != id_spine(lv):
        return None
    last, prev = spine[-1], spine[-2]
    if not isinstance(prev, Var) or not isinstance(last, Refl):
        return None
    if last.arg != prev:
        return None
    pos = lv - 1 - prev.ix
    if pos < 0:
        return None
    try:
        cert = dc.cert_recurring(
            Fibration(Telescope(m.src.cells[: pos + 1]), Telescope(m.src.cells[pos + 1 :]))
        )
    except DeriveError:
        return None
    if cert.g == m:
        return cert
    return None


def jfill(dc: DerivationContext, square: cat.Square) -> tuple[Morphism, Homotopy]:
    """Solve a lifting problem against a certified map on the left."""
    cert = is_structural_weq(dc, square.west)
    if cert is None:
        raise DeriveError("left leg is not a recognised structural weak equivalence")
    rfib = as_fibration(square.east)
    if rfib is None:
        raise DeriveError("right leg is not a canonical projection")
    if not square.commutes(dc.sig):
        raise DeriveError("lifting square does not commute")
    d, h = dc.fill(cert, rfib, square.top, square.bottom)
    hw = homotopy_between(dc, rfib, h)
    if not cat.morphism_eq(dc.sig, compose(rfib.projection(), d), square.bottom):
        raise WitnessError("filler does not restrict to the lower edge")
    return d, hw


def cancel_weq(
    dc: DerivationContext,
    fib: Fibration,
    hw: Homotopy,
    weq: Morphism,
    f: Morphism,
    g: Morphism,
) -> Homotopy:
    """From f.h ~ g.h with h certified, produce f ~ g."""
    cert = is_structural_weq(dc, weq)
    if cert is None:
        raise DeriveError("map to cancel is not a recognised structural weak equivalence")
    ps = dc.path_structure(fib)
    bottom = ps.xx_pair(f, g)
    d, _ = dc.fill(cert, ps.relfib, hw.h, bottom)
    return homotopy_between(dc, fib, d)


def whisker_post(dc: DerivationContext, h: Morphism, hw: Homotopy) -> Homotopy:
    """Postcompose a homotopy between maps into a one-cell object."""
    fib_a = hw.fib
    if fib_a.rank != 1:
        raise DeriveError("whisker_post works over one-cell path objects")
    if len(h.src) != len(fib_a.total) or Telescope(h.src.cells) != fib_a.total:
        raise DeriveError("whisker map does not start at the homotopy's object")
    base = fib_a.base
    fib_b = Fibration(Telescope(h.dst.cells[: len(base)]), Telescope(h.dst.cells[len(base) :]))
    if fib_b.rank != 1:
        raise DeriveError("whisker target must be a one-cell object over the same base")
    psa = dc.path_structure(fib_a)
    psb = dc.path_structure(fib_b)
    cert = dc.cert_r(fib_a)
    top = compose(psb.r, h)
    bottom = psb.xx_pair(compose(h, psa.sigma()), compose(h, psa.tau()))
    ph, _ = dc.fill(cert, psb.relfib, top, bottom)
    return homotopy_between(dc, fib_b, compose(ph, hw.h))


def pair_homotopy(
    dc: DerivationContext, hw: Homotopy, zfib: Fibration, hmap: Morphism
) -> Homotopy:
    """Extend a fibrewise homotopy with an unchanged extra component."""
    xfib = hw.fib
    if xfib.rank != 1:
        raise DeriveError("pair_homotopy expects a one-cell first factor")
    if zfib.base != xfib.base:
        raise DeriveError("factors live over different bases")
    gl = len(xfib.base)
    prod = cat.product_over(xfib.base, xfib.ext, zfib.ext)
    psx = dc.path_structure(xfib)
    psp = dc.path_structure(prod)
    ext = weaken_tele(zfib.ext, 2)  # over the path-object total of the first factor
    cert = dc.cert_pullback(dc.cert_r(xfib), ext)
    u = cert.g.dst
    lu = len(u)
    nz = zfib.rank
    bottom = Morphism(
        u,
        psp.xx,
        vseg(lu, 0, gl)
        + (vat(lu, gl),)
        + vseg(lu, gl + 3, nz)
        + (vat(lu, gl + 1),)
        + vseg(lu, gl + 3, nz),
    )
    k, _ = dc.fill(cert, psp.relfib, psp.r, bottom)
    med = Morphism(hw.h.src, u, hw.h.spine + hmap.spine[gl:])
    pair_f = Morphism(hw.h.src, prod.total, hw.f.spine + hmap.spine[gl:])
    pair_g = Morphism(hw.h.src, prod.total, hw.g.spine + hmap.spine[gl:])
    hmor = compose(k, med)
    return make_homotopy(dc.sig, prod, psp.relfib, pair_f, pair_g, hmor)


# ---------------------------------------------------------------------------
# Rank induction: full path objects and their equivalence relations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathBundle:
    pobj: PathObject
    eqrel: EquivRelWitness
    transport: TransportWitness


def build_py(dc: DerivationContext, fib: Fibration) -> PathBundle:
    ps = dc.path_structure(fib)
    pobj = require_clean(PathObject(fib, ps.relfib, ps.r), dc.sig)
    eqrel = require_clean(
        EquivRelWitness(fib, ps.relfib, ps.r, ps.sym_mor, ps.trans_mor, ps.trans_dom),
        dc.sig,
    )
    dc.register_relation(ps.relfib, ("canonical", fib))
    tw = _transport_witness(dc, ps)
    return PathBundle(pobj, eqrel, tw)


def _transport_witness(dc: DerivationContext, ps) -> TransportWitness:
    if ps.n >= 2 and ps.transport is not None:
        return require_clean(
            TransportWitness(
                fib=ps.split_q,
                dom=ps.transport.dom,
                gamma=ps.transport.gamma,
                coherence=homotopy_between(dc, ps.split_q, ps.transport.coherence),
            ),
            dc.sig,
        )
    # degenerate transport over an empty path object of the base
    y = ps.fib.total
    trivial = Fibration(y, Telescope())
    inner0 = dc.path_structure(Fibration(y, Telescope()))
    coh = make_homotopy(
        dc.sig, trivial, inner0.relfib, identity(y), identity(y), identity(y)
    )
    return TransportWitness(
        fib=Fibration(y, Telescope()), dom=trivial, gamma=identity(y), coherence=coh
    )


# ---------------------------------------------------------------------------
# Contractibility
# ---------------------------------------------------------------------------


def contract_from_characterisation(
    dc: DerivationContext, fib: Fibration, section: Morphism, hw: Homotopy
) -> ContractWitness:
    """Build both sections from a section plus a homotopy 1 ~ section.proj."""
    ps = dc.path_structure(fib)
    g, n = ps.g, ps.n
    xx = ps.xx
    lxx = len(xx)
    p1 = Morphism(xx, fib.total, vseg(lxx, 0, g + n))
    p2 = Morphism(xx, fib.total, vseg(lxx, 0, g) + vseg(lxx, g + n, n))
    w1 = compose(hw.h, p1)
    w2 = compose(ps.flip_w(hw.h), p2)
    rel_section = ps.comp_w(w1, w2)
    return require_clean(
        ContractWitness(fib, ps.relfib, section, rel_section), dc.sig
    )


def contract_source(dc: DerivationContext, fib: Fibration) -> ContractWitness:
    """Sections witnessing that the source projection of a path object is contractible."""
    ps = dc.path_structure(fib)
    y = fib.total
    sfib = Fibration(y, Telescope(ps.total.cells[len(y) :]))
    section = Morphism(y, sfib.total, ps.r.spine)
    ccr = contract_to_refl(dc, fib)
    hw = homotopy_between(dc, sfib, ccr)
    return contract_from_characterisation(dc, sfib, section, hw)


def contract_to_refl(dc: DerivationContext, fib: Fibration) -> Morphism:
    """Homotopy contracting a path object onto reflexivity, over the source.

    Returns K with endpoints (identity, r . s) at the path structure of the
    source projection.  Above one cell this recurses: the based paths of the
    inner relation form a pullback of the inner source map along the
    transport basepoint, their contraction gives the reflexivity map a
    homotopy section, and a lower filler against that section solves the
    remaining lifting problem at the reflexivity stage.
    """
    ps = dc.path_structure(fib)
    if ps.n == 0:
        return identity(fib.total)
    y = fib.total
    ly = len(y)
    g, n = ps.g, ps.n
    sfib = Fibration(y, Telescope(ps.total.cells[ly:]))
    ps_s = dc.path_structure(sfib)
    lt = len(ps.total)
    a = fib.ext[0].ty
    if ps.n == 1:
        cert = dc.cert_r(fib)
        top = compose(ps_s.r, ps.r)
        bottom = Morphism(
            ps.total,
            ps_s.xx,
            id_spine(lt) + (vat(lt, ps.g), Refl(weaken(a, 3), vat(lt, ps.g))),
        )
        k, _ = dc.fill(cert, ps_s.relfib, top, bottom)
        return k

    inner = ps.inner
    td = ps.transport
    m = n - 1

    # certificate for the inclusion of the reflexivity stage into the path
    # object: reorder so the first cell's path data comes right after it
    order = (
        list(range(g + 1))
        + [g + n, g + 2 * n]
        + list(range(g + 1, g + n))
        + list(range(g + n + 1, g + 2 * n))
        + list(range(g + 2 * n + 1, g + 3 * n))
    )
    py2, py_to_2, py2_to = cat.permute_context(ps.total, order)
    delta = Telescope(py2.cells[g + 3 :])
    cert_v = dc.cert_pullback(dc.cert_r(ps.x1), delta)
    if cert_v.g.dst != py2:
        raise DeriveError("reflexivity-stage certificate context mismatch")
    g_tilde = compose(py2_to, cert_v.g)
    cert_v = dc.register_cert(
        _conjugate_target(cert_v, g_tilde, py_to_2, py2_to)
    )
    v_ctx = cert_v.g.src

    # the reflexivity stage is the pullback of the inner source map along
    # the transport basepoint; contract it by recursion
    inner_w = contract_source(dc, ps.split_q)
    beta = transport_apply(
        td, identity(y), vat(ly, g), Refl(weaken(a, n), vat(ly, g))
    )
    v_w = contract_pullback(dc, inner_w, beta)
    if v_w.fib.total != v_ctx:
        raise DeriveError("reflexivity-stage context does not match the pullback")

    # section of the projection back to the source, with v . e = r on the nose
    coh_tail = td.coherence.spine[len(td.coherence.spine) - len(inner.pi) :]
    e = Morphism(y, v_ctx, id_spine(ly) + id_spine(ly)[g + 1 :] + coh_tail)
    pi_v = Morphism(v_ctx, y, vseg(len(v_ctx), 0, ly))
    ps_v = dc.path_structure(v_w.fib)
    epi = compose(e, pi_v)
    lv = len(v_ctx)
    pair_v = Morphism(
        v_ctx, ps_v.xx, epi.spine + id_spine(lv)[ly:]
    )
    h_v = compose(v_w.rel_section, pair_v)

    # lower filler for the main square along the section e
    v_tilde = cert_v.g
    bottom = Morphism(
        v_ctx,
        ps_s.xx,
        v_tilde.spine + compose(ps.r, pi_v).spine[ly:],
    )
    top = compose(ps_s.r, ps.r)
    pb, sq = pullback_display(ps_s.relfib, bottom)
    n_lift = pullback_pair(sq, e, top)
    gt = general_transport(dc, pb, prefix=ly)
    med = Morphism(
        v_ctx,
        gt.dom.total,
        compose(n_lift, pi_v).spine
        + h_v.spine[len(h_v.spine) - len(gt.dom.ext) :],
    )
    d_prime = compose(gt.gamma, med)
    d = compose(sq.top, d_prime)

    # main fill at the reflexivity stage
    rs_tail = compose(ps.r, ps.sigma()).spine[ly:]
    bottom_main = Morphism(ps.total, ps_s.xx, id_spine(lt) + rs_tail)
    k, _ = dc.fill(cert_v, ps_s.relfib, d, bottom_main)
    return k


def _conjugate_target(cert: WeqCert, g: Morphism, to_old: Morphism, from_old: Morphism) -> WeqCert:
    """Conjugate only the target side of a certificate."""
    return cert_conjugate(
        cert,
        g,
        to_old,
        from_old,
        identity(cert.g.src),
        identity(cert.g.src),
    )


def contract_pullback(dc: DerivationContext, w: ContractWitness, f: Morphism) -> ContractWitness:
    """Contractible fibrations are stable under pullback."""
    pb, _ = pullback_display(w.fib, f)
    psb = dc.path_structure(pb)
    gl = len(w.fib.base)
    sect = Morphism(
        f.src,
        pb.total,
        id_spine(len(f.src)) + tuple(subst(c, f.spine) for c in w.section.spine[gl:]),
    )
    lxx = len(psb.xx)
    fxx = tuple(weaken(c, 2 * pb.rank) for c in f.spine)
    rel_sect = Morphism(
        psb.xx,
        psb.total,
        id_spine(lxx)
        + tuple(
            subst(c, fxx + vseg(lxx, len(f.src), 2 * pb.rank))
            for c in w.rel_section.spine[len(w.rel.base) :]
        ),
    )
    return require_clean(ContractWitness(pb, psb.relfib, sect, rel_sect), dc.sig)


def contract_compose(
    dc: DerivationContext, upper: ContractWitness, lower: ContractWitness
) -> ContractWitness:
    """Composite of contractible fibrations, for a one-cell lower leg."""
    if lower.fib.rank != 1:
        raise DeriveError("composite contraction needs a one-cell lower fibration")
    if upper.fib.base != lower.fib.total:
        raise DeriveError("fibrations do not compose")
    fib = Fibration(lower.fib.base, lower.fib.ext + upper.fib.ext)
    ps = dc.path_structure(fib)
    if upper.rel != ps.inner.relfib:
        raise DeriveError("upper witness does not target the canonical inner relation")
    g, n = ps.g, ps.n
    m = n - 1
    xx = ps.xx
    lxx = len(xx)
    section = compose(upper.section, lower.section)
    alpha = compose(
        lower.rel_section,
        Morphism(xx, lower.rel.base, vseg(lxx, 0, g) + (vat(lxx, g), vat(lxx, g + n))),
    )
    y0 = Morphism(xx, fib.total, vseg(lxx, 0, g + n))
    transported = transport_apply(ps.transport, y0, vat(lxx, g + n), alpha.spine[-1])
    pairing = Morphism(
        xx,
        ps.inner.relfib.base,
        vseg(lxx, 0, g)
        + (vat(lxx, g + n),)
        + transported.spine[g + 1 :]
        + vseg(lxx, g + n + 1, m),
    )
    t_part = compose(upper.rel_section, pairing)
    rel_section = Morphism(
        xx,
        ps.total,
        id_spine(lxx) + (alpha.spine[-1],) + t_part.spine[len(t_part.spine) - len(ps.inner.pi) :],
    )
    return require_clean(ContractWitness(fib, ps.relfib, section, rel_section), dc.sig)


# ---------------------------------------------------------------------------
# Similarity of relations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimilarityWitness:
    first: EquivRelWitness
    second: EquivRelWitness
    fwd: Morphism  # first.rel total -> second.rel total, over the endpoints
    bwd: Morphism

    def recheck(self, sig) -> list[str]:
        failures: list[str] = []
        try:
            cat.check_morphism(sig, self.fwd)
            cat.check_morphism(sig, self.bwd)
        except Exception as e:  # noqa: BLE001
            failures.append(f"typing: {e}")
            return failures
        p1 = compose(self.second.rel.projection(), self.fwd)
        if not cat.morphism_eq(sig, p1, self.first.rel.projection()):
            failures.append("forward map does not preserve endpoints")
        p2 = compose(self.first.rel.projection(), self.bwd)
        if not cat.morphism_eq(sig, p2, self.second.rel.projection()):
            failures.append("backward map does not preserve endpoints")
        return failures


def similar_maps(
    dc: DerivationContext, r1: EquivRelWitness, r2: EquivRelWitness
) -> SimilarityWitness:
    if r1.rel == r2.rel:
        w = SimilarityWitness(r1, r2, identity(r1.rel.total), identity(r2.rel.total))
        return require_clean(w, dc.sig)
    tag1 = dc.relation_tag(r1.rel)
    tag2 = dc.relation_tag(r2.rel)
    if tag1 is None or tag2 is None:
        raise DeriveError("similarity requires relations built by this module")
    if tag1[0] == "canonical" and tag2[0] == "alt" and tag1[1] == tag2[1]:
        return _similar_transports(dc, r1, r2, tag2[2])
    if tag1[0] == "alt" and tag2[0] == "canonical" and tag1[1] == tag2[1]:
        w = _similar_transports(dc, r2, r1, tag1[2])
        return require_clean(SimilarityWitness(r1, r2, w.bwd, w.fwd), dc.sig)
    if tag1[0] == "canonical" and tag2[0] == "collapsed" and tag1[1] == tag2[1]:
        return _similar_collapsed(dc, r1, r2, tag1[1])
    if tag1[0] == "collapsed" and tag2[0] == "canonical" and tag1[1] == tag2[1]:
        w = _similar_collapsed(dc, r2, r1, tag1[1])
        return require_clean(SimilarityWitness(r1, r2, w.bwd, w.fwd), dc.sig)
    raise DeriveError("unsupported relation provenance for similarity")


def _similar_transports(dc, r_canon, r_alt, alt_ps) -> SimilarityWitness:
    """Comparison maps between relations built from two transport choices."""
    fib = r_canon.fib
    ps = dc.path_structure(fib)
    inner = ps.inner
    td, td2 = ps.transport, alt_ps.transport
    g, n = ps.g, ps.n
    m = n - 1
    # the two transports are related over the inner relation (uniqueness)
    k_chain = inner.comp_w(td.coherence, inner.flip_w(td2.coherence))
    cert = dc.cert_recurring(ps.split_q)
    bottom = inner.xx_pair(td.gamma, td2.gamma)
    l_mor, _ = dc.fill(cert, inner.relfib, k_chain, bottom)

    def comparison(src_ps, dst_ps, l_use):
        # l_use relates the destination transport to the source one; the
        # source witness then chains onto it
        total = src_ps.total
        lt = len(total)
        pair_dom = Morphism(
            total,
            td.dom.total,
            vseg(lt, 0, g + n) + (vat(lt, g + n), vat(lt, g + 2 * n)),
        )
        t_two = compose(l_use, pair_dom)
        t_orig = dc._t_of_stage(
            src_ps, total, g, g + 1, g + n, g + 2 * n, g + n + 1, g + 2 * n + 1
        )
        t_new = inner.comp_w(t_two, t_orig)
        return Morphism(
            total,
            dst_ps.total,
            id_spine(lt)[: g + 2 * n + 1] + t_new.spine[len(t_new.spine) - m :],
        )

    fwd = comparison(ps, alt_ps, inner.flip_w(l_mor))
    bwd = comparison(alt_ps, ps, l_mor)
    w = SimilarityWitness(r_canon, r_alt, fwd, bwd)
    return require_clean(w, dc.sig)


def _similar_collapsed(dc, r_canon, r_coll, fib) -> SimilarityWitness:
    from .sums import collapsed_similarity

    return collapsed_similarity(dc, r_canon, r_coll, fib)


# ---------------------------------------------------------------------------
# Left maps
# ---------------------------------------------------------------------------


def lower_fill_leftmap(
    dc: DerivationContext,
    f: Morphism,
    section: Morphism,
    hw: Homotopy,
    square: cat.Square,
) -> Morphism:
    """Lower filler for a map with a homotopy section, against a projection."""
    p = as_fibration(square.east)
    if p is None:
        raise DeriveError("right leg is not a canonical projection")
    if not square.commutes(dc.sig):
        raise DeriveError("square does not commute")
    xctx = f.dst
    pb, sq = pullback_display(p, square.bottom)
    nprime = pullback_pair(sq, f, square.top)
    gt = general_transport(dc, pb)
    lx = len(xctx)
    ng = compose(nprime, section)
    tail = hw.h.spine[len(hw.h.spine) - 2 * lx :]
    med = Morphism(xctx, gt.dom.total, ng.spine + tail)
    dprime = compose(gt.gamma, med)
    d = compose(sq.top, dprime)
    if not cat.morphism_eq(dc.sig, compose(p.projection(), d), square.bottom):
        raise WitnessError("lower filler does not restrict to the lower edge")
    return d


def general_transport(dc: DerivationContext, fib: Fibration, prefix: int = 0) -> TransportData:
    """Transport along the full path object of the base, by rank recursion.

    The returned data has no coherence component; consumers only need the
    equation over the target endpoint.
    """
    x = fib.base
    rank = len(x) - prefix
    if rank == 0:
        return TransportData(
            dom=Fibration(fib.total, Telescope()),
            gamma=identity(fib.total),
            coherence=None,  # type: ignore[arg-type]
        )
    if rank == 1:
        return dc.split_transport_for(fib)
    ps_x = dc.path_structure(
        Fibration(Telescope(x.cells[:prefix]), Telescope(x.cells[prefix:]))
    )
    m_td = ps_x.transport
    n_td = general_transport(dc, fib, prefix + 1)
    y = fib.total
    ly = len(y)
    proj = fib.projection()
    h_w = compose(ps_x.inner.flip_w(m_td.coherence), proj)
    med_n = Morphism(
        y, n_td.dom.total, id_spine(ly) + h_w.spine[len(h_w.spine) - len(n_td.dom.ext) :]
    )
    h_map = compose(n_td.gamma, med_n)
    cert = dc.cert_recurring(
        Fibration(Telescope(y.cells[: prefix + 1]), Telescope(y.cells[prefix + 1 :]))
    )
    u_ctx = cert.g.dst
    fx1 = tuple(weaken(c, 2) for c in proj.spine)
    m_pair = Morphism(u_ctx, m_td.dom.total, fx1 + (Var(1), Var(0)))
    bottom = compose(m_td.gamma, m_pair)
    l_mor, _ = dc.fill(cert, fib, h_map, bottom)
    # assemble the transport on the pulled-back full path fibre
    px_fibre = Telescope(ps_x.total.cells[len(x) :])
    pb = cat.pullback_display(Fibration(x, px_fibre), proj)[0]
    dom = Fibration(y, pb.ext)
    ld = len(dom.total)
    r_x = rank
    x1_pos = ly
    al_pos = ly + r_x
    u_part = compose(
        l_mor,
        Morphism(
            dom.total,
            l_mor.src,
            vseg(ld, 0, ly) + (vat(ld, x1_pos), vat(ld, al_pos)),
        ),
    )
    v_tail = vseg(ld, x1_pos + 1, r_x - 1) + vseg(ld, al_pos + 1, r_x - 1)
    med2 = Morphism(dom.total, n_td.dom.total, u_part.spine + v_tail)
    gamma = compose(n_td.gamma, med2)
    return TransportData(dom=dom, gamma=dc.intern_mor("gt", gamma), coherence=None)  # type: ignore[arg-type]
