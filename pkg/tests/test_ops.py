"""Public witness-compiler operations, kernel re-checked."""

import pytest

from idpath import cat, checker as ck
from idpath.cat import Fibration, Morphism, Square, compose, identity
from idpath import pathtools as pt
from idpath.syntax import (
    Con,
    IdT,
    Refl,
    Signature,
    TCon,
    Telescope,
    Var,
)

A = TCon("A")


@pytest.fixture
def sig():
    s = Signature()
    s = ck.declare_type(s, "A", Telescope())
    s = ck.declare_type(s, "B", Telescope.of(("x", A)))
    s = ck.declare_type(s, "C", Telescope.of(("x", A), ("b", TCon("B", (Var(0),)))))
    s = ck.declare_term(s, "a", Telescope(), A)
    s = ck.declare_term(s, "k", Telescope.of(("x", A)), A)
    return s


def dcx(sig):
    return pt.DerivationContext(sig)


def afib():
    return Fibration(Telescope(), Telescope.of(("x", A)))


def test_path_object_shape(sig):
    dc = dcx(sig)
    po = pt.path_object(dc, afib())
    assert len(po.rel.total) == 3
    assert po.recheck(dc.sig) == []


def test_path_object_pullback_strictness(sig):
    # constructing then pulling back agrees with pulling back then constructing
    dc = dcx(sig)
    ga = Telescope.of(("x", A))
    bfib = Fibration(ga, Telescope.of(("b", TCon("B", (Var(0),)))))
    po = pt.path_object(dc, bfib)
    point = Morphism(Telescope(), ga, (Con("a"),))
    pulled_rel, _ = cat.pullback_display(
        Fibration(po.rel.base, po.rel.ext),
        Morphism(
            Telescope.of(("b0", TCon("B", (Con("a"),))), ("b1", TCon("B", (Con("a"),)))),
            po.rel.base,
            (Con("a"), Var(1), Var(0)),
        ),
    )
    bfib_pulled, _ = cat.pullback_display(bfib, point)
    po2 = pt.path_object(dc, bfib_pulled)
    assert cat.context_eq(dc.sig, pulled_rel.total, po2.rel.total)


def test_sym_witness_matches_table(sig):
    dc = dcx(sig)
    emitted, hw = pt.sym_witness(dc, afib())
    # sigma at (a, a, refl a) has type Id A a a
    sigma_inst = cat.Morphism(
        Telescope(),
        Telescope(),
        (),
    )
    term = emitted.body
    ctx = emitted.params
    got = ck.infer(dc.sig, ctx, term)
    assert got == IdT(A, Var(1), Var(2))
    assert hw.recheck(dc.sig) == []


def test_sym_endpoint_equation(sig):
    dc = dcx(sig)
    fib = afib()
    ps = dc.path_structure(fib)
    proj = ps.relfib.projection()
    swapped = Morphism(ps.total, ps.xx, ps.tau().spine + ps.sigma().spine[ps.g :])
    assert cat.morphism_eq(dc.sig, compose(proj, ps.sym_mor), swapped)


def test_sym_over_parameters(sig):
    dc = dcx(sig)
    ga = Telescope.of(("p", A))
    fib = Fibration(ga, Telescope.of(("x", A)))
    emitted, hw = pt.sym_witness(dc, fib)
    assert hw.recheck(dc.sig) == []


def test_trans_witness_unit_law(sig):
    dc = dcx(sig)
    emitted, hw = pt.trans_witness(dc, afib())
    got = ck.infer(dc.sig, emitted.params, emitted.body)
    assert got == IdT(A, Var(4), Var(1))
    # unit law endpoints: compose-with-refl vs identity
    assert hw.recheck(dc.sig) == []
    ps = dc.path_structure(afib())
    assert cat.morphism_eq(dc.sig, hw.g, identity(ps.total))


def test_transport_spec_term(sig):
    dc = dcx(sig)
    p = Fibration(Telescope.of(("x", A)), Telescope.of(("b", TCon("B", (Var(0),)))))
    tw = pt.transport(dc, p)
    assert tw.recheck(dc.sig) == []
    # gamma lands in the fibre over the path target
    lhs = compose(p.projection(), tw.gamma)
    rhs = Morphism(tw.dom.total, p.base, (Var(1),))
    assert cat.morphism_eq(dc.sig, lhs, rhs)


def test_groupoid_laws_all_five(sig):
    dc = dcx(sig)
    laws = pt.groupoid_laws(dc, afib())
    assert set(laws) == {"assoc", "unit-right", "unit-left", "inverse-right", "inverse-left"}
    for name, hw in laws.items():
        assert hw.recheck(dc.sig) == [], name


def test_is_structural_weq_accepts_r(sig):
    dc = dcx(sig)
    ps = dc.path_structure(afib())
    cert = pt.is_structural_weq(dc, ps.r)
    assert cert is not None


def test_is_structural_weq_accepts_one_rf(sig):
    dc = dcx(sig)
    bfib = Fibration(Telescope.of(("x", A)), Telescope.of(("b", TCon("B", (Var(0),)))))
    cert = dc.cert_recurring(bfib)
    found = pt.is_structural_weq(dc, cert.g)
    assert found is not None


def test_is_structural_weq_rejects_constant(sig):
    dc = dcx(sig)
    m = Morphism(Telescope.of(("x", A)), Telescope.of(("x", A)), (Con("k", (Var(0),)),))
    assert pt.is_structural_weq(dc, m) is None


def test_jfill_symmetry_square(sig):
    dc = dcx(sig)
    fib = afib()
    ps = dc.path_structure(fib)
    bottom = Morphism(ps.total, ps.xx, (Var(1), Var(2)))
    sq = Square(
        top=ps.r,
        bottom=bottom,
        west=ps.r,
        east=ps.relfib.projection(),
    )
    d, hw = pt.jfill(dc, sq)
    assert cat.morphism_eq(dc.sig, d, ps.sym_mor)
    assert hw.recheck(dc.sig) == []


def test_jfill_identity_right_leg(sig):
    dc = dcx(sig)
    fib = afib()
    ps = dc.path_structure(fib)
    sq = Square(
        top=ps.r,
        bottom=identity(ps.total),
        west=ps.r,
        east=identity(ps.total),
    )
    d, hw = pt.jfill(dc, sq)
    assert cat.morphism_eq(dc.sig, d, identity(ps.total))


def test_whisker_post(sig):
    dc = dcx(sig)
    fib = afib()
    ps = dc.path_structure(fib)
    # homotopy: refl-homotopy on the identity
    h0 = compose(ps.r, identity(fib.total))
    hw = pt.homotopy_between(dc, fib, h0)
    hmap = Morphism(fib.total, fib.total, (Con("k", (Var(0),)),))
    out = pt.whisker_post(dc, hmap, hw)
    assert out.recheck(dc.sig) == []
    assert cat.morphism_eq(dc.sig, out.f, hmap)
    assert cat.morphism_eq(dc.sig, out.g, hmap)


def test_whisker_composite_agrees(sig):
    dc = dcx(sig)
    fib = afib()
    ps = dc.path_structure(fib)
    hw = pt.homotopy_between(dc, fib, ps.r)  # refl homotopy 1 ~ 1
    h1 = Morphism(fib.total, fib.total, (Con("k", (Var(0),)),))
    h2 = Morphism(fib.total, fib.total, (Con("k", (Con("k", (Var(0),)),)),))
    once = pt.whisker_post(dc, h2, hw)
    via = pt.whisker_post(dc, h1, pt.whisker_post(dc, h1, hw))
    assert cat.morphism_eq(dc.sig, once.f, via.f)
    assert cat.morphism_eq(dc.sig, once.g, via.g)


def test_pair_homotopy(sig):
    dc = dcx(sig)
    fib = afib()
    zfib = Fibration(Telescope(), Telescope.of(("z", A)))
    ps = dc.path_structure(fib)
    hw = pt.homotopy_between(dc, fib, ps.r)
    hmap = Morphism(fib.total, zfib.total, (Con("k", (Var(0),)),))
    out = pt.pair_homotopy(dc, hw, zfib, hmap)
    assert out.recheck(dc.sig) == []


def test_cancel_weq_refl_case(sig):
    dc = dcx(sig)
    fib = afib()
    ps = dc.path_structure(fib)
    # f = g = symmetry map; cancel the reflexivity map out of a constant homotopy
    hp = dc.path_structure(ps.relfib)
    hw = pt.homotopy_between(dc, ps.relfib, compose(hp.r, compose(ps.sym_mor, ps.r)))
    out = pt.cancel_weq(dc, ps.relfib, hw, ps.r, ps.sym_mor, ps.sym_mor)
    assert out.recheck(dc.sig) == []
    assert cat.morphism_eq(dc.sig, out.f, ps.sym_mor)


def test_build_py_rank2_shape(sig):
    dc = dcx(sig)
    theta = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    bundle = pt.build_py(dc, Fibration(Telescope(), theta))
    po, er, tw = bundle.pobj, bundle.eqrel, bundle.transport
    assert po.recheck(dc.sig) == []
    assert er.recheck(dc.sig) == []
    assert tw.recheck(dc.sig) == []
    # telescope order: x0 b0 x1 b1 alpha beta
    names_ok = len(po.rel.total) == 6
    assert names_ok
    assert po.rel.rank == 2


def test_build_py_rank1_matches_path_object(sig):
    dc = dcx(sig)
    bundle = pt.build_py(dc, afib())
    po = pt.path_object(dc, afib())
    assert bundle.pobj.rel == po.rel
    assert bundle.pobj.r == po.r


def test_contract_source_rank1(sig):
    dc = dcx(sig)
    w = pt.contract_source(dc, afib())
    assert w.recheck(dc.sig) == []


def contractible_pair_sig(sig):
    """Postulated contraction data for A over [] and B over [x:A]."""
    s = ck.declare_term(sig, "a0", Telescope(), A)
    s = ck.declare_term(s, "ha", Telescope.of(("x", A)), IdT(A, Var(0), Con("a0")))
    s = ck.declare_term(s, "b0", Telescope.of(("x", A)), TCon("B", (Var(0),)))
    s = ck.declare_term(
        s,
        "hb",
        Telescope.of(("x", A), ("b", TCon("B", (Var(0),)))),
        IdT(TCon("B", (Var(1),)), Var(0), Con("b0", (Var(1),))),
    )
    return s


def altchar_witness(dc, fib, section, hmor):
    hw = pt.homotopy_between(dc, fib, hmor)
    return pt.contract_from_characterisation(dc, fib, section, hw)


def test_contract_from_characterisation_and_compose(sig):
    s = contractible_pair_sig(sig)
    dc = dcx(s)
    # lower: x : A over [] with section a0 and homotopy ha
    low = Fibration(Telescope(), Telescope.of(("x", A)))
    ps_low = dc.path_structure(low)
    sect_low = Morphism(Telescope(), low.total, (Con("a0"),))
    h_low = Morphism(low.total, ps_low.total, (Var(0), Con("a0"), Con("ha", (Var(0),))))
    w_low = altchar_witness(dc, low, sect_low, h_low)
    assert w_low.recheck(dc.sig) == []

    # upper: b : B x over [x:A] with section b0 and homotopy hb
    up = Fibration(low.total, Telescope.of(("b", TCon("B", (Var(0),)))))
    ps_up = dc.path_structure(up)
    sect_up = Morphism(low.total, up.total, (Var(0), Con("b0", (Var(0),))))
    h_up = Morphism(
        up.total,
        ps_up.total,
        (Var(1), Var(0), Con("b0", (Var(1),)), Con("hb", (Var(1), Var(0)))),
    )
    w_up = altchar_witness(dc, up, sect_up, h_up)
    assert w_up.recheck(dc.sig) == []

    out = pt.contract_compose(dc, w_up, w_low)
    assert out.recheck(dc.sig) == []
    assert out.fib.rank == 2


def test_contract_pullback(sig):
    s = contractible_pair_sig(sig)
    dc = dcx(s)
    up = Fibration(Telescope.of(("x", A)), Telescope.of(("b", TCon("B", (Var(0),)))))
    sect_up = Morphism(up.base, up.total, (Var(0), Con("b0", (Var(0),))))
    ps_up = dc.path_structure(up)
    h_up = Morphism(
        up.total,
        ps_up.total,
        (Var(1), Var(0), Con("b0", (Var(1),)), Con("hb", (Var(1), Var(0)))),
    )
    w_up = altchar_witness(dc, up, sect_up, h_up)
    point = Morphism(Telescope(), up.base, (Con("a"),))
    out = pt.contract_pullback(dc, w_up, point)
    assert out.recheck(dc.sig) == []


def test_similar_maps_identity(sig):
    dc = dcx(sig)
    theta = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    b1 = pt.build_py(dc, Fibration(Telescope(), theta))
    w = pt.similar_maps(dc, b1.eqrel, b1.eqrel)
    assert w.recheck(dc.sig) == []


def test_similar_maps_two_transports_rank2(sig):
    dc = dcx(sig)
    theta = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    fib = Fibration(Telescope(), theta)
    b1 = pt.build_py(dc, fib)
    ps2 = dc.alt_structure(fib)
    from idpath.pathtools.witnesses import EquivRelWitness, require_clean

    er2 = require_clean(
        EquivRelWitness(fib, ps2.relfib, ps2.r, ps2.sym_mor, ps2.trans_mor, ps2.trans_dom),
        dc.sig,
    )
    dc.register_relation(ps2.relfib, ("alt", fib, ps2))
    w = pt.similar_maps(dc, b1.eqrel, er2)
    assert w.recheck(dc.sig) == []
