"""Two-out-of-six and composition for witnessed homotopy equivalences."""

import pytest

from idpath import cat, checker as ck
from idpath.cat import Fibration, Morphism, compose, identity
from idpath import pathtools as pt
from idpath.pathtools import hoequiv as he
from idpath.syntax import Con, IdT, Signature, TCon, Telescope, Var

A, B, C, D = TCon("A"), TCon("B"), TCon("C"), TCon("D")


@pytest.fixture
def sig():
    """Three maps with postulated inverses and homotopies for the composites."""
    s = Signature()
    for name in "ABCD":
        s = ck.declare_type(s, name, Telescope())
    s = ck.declare_term(s, "f", Telescope.of(("x", A)), B)
    s = ck.declare_term(s, "g", Telescope.of(("y", B)), C)
    s = ck.declare_term(s, "h", Telescope.of(("z", C)), D)
    s = ck.declare_term(s, "i1", Telescope.of(("z", C)), A)  # inverse of g.f
    s = ck.declare_term(s, "i2", Telescope.of(("w", D)), B)  # inverse of h.g
    gf_i1 = Con("g", (Con("f", (Con("i1", (Var(0),)),)),))
    s = ck.declare_term(s, "e1", Telescope.of(("z", C)), IdT(C, gf_i1, Var(0)))
    i1_gf = Con("i1", (Con("g", (Con("f", (Var(0),)),)),))
    s = ck.declare_term(s, "e2", Telescope.of(("x", A)), IdT(A, i1_gf, Var(0)))
    hg_i2 = Con("h", (Con("g", (Con("i2", (Var(0),)),)),))
    s = ck.declare_term(s, "e3", Telescope.of(("w", D)), IdT(D, hg_i2, Var(0)))
    i2_hg = Con("i2", (Con("h", (Con("g", (Var(0),)),)),))
    s = ck.declare_term(s, "e4", Telescope.of(("y", B)), IdT(B, i2_hg, Var(0)))
    return s


def obj(t):
    return Telescope.of(("o", t))


def arrow(src, dst, name):
    return Morphism(obj(src), obj(dst), (Con(name, (Var(0),)),))


def postulated_equiv(dc, fwd, inv, e_right, e_left):
    """Package postulated identity elements as homotopy witnesses."""
    sig = dc.sig
    dst_fib = Fibration(Telescope(), fwd.dst)
    src_fib = Fibration(Telescope(), fwd.src)
    psd = dc.path_structure(dst_fib)
    pss = dc.path_structure(src_fib)
    hr = Morphism(
        fwd.dst,
        psd.total,
        (compose(fwd, inv).spine[0], Var(0), Con(e_right, (Var(0),))),
    )
    hl = Morphism(
        fwd.src,
        pss.total,
        (compose(inv, fwd).spine[0], Var(0), Con(e_left, (Var(0),))),
    )
    return he.HoEquiv(
        fwd,
        inv,
        pt.homotopy_between(dc, dst_fib, hr),
        pt.homotopy_between(dc, src_fib, hl),
    )


def test_identity_equiv(sig):
    dc = pt.DerivationContext(sig)
    e = he.identity_equiv(dc, obj(A))
    assert e.recheck(dc.sig) == []


def test_compose_with_identity_collapses(sig):
    dc = pt.DerivationContext(sig)
    e = he.identity_equiv(dc, obj(A))
    out = he.compose_equiv(dc, e, e)
    assert out.recheck(dc.sig) == []
    assert cat.morphism_eq(dc.sig, out.fwd, identity(obj(A)))


def test_two_out_of_six(sig):
    dc = pt.DerivationContext(sig)
    f = arrow(A, B, "f")
    g = arrow(B, C, "g")
    h = arrow(C, D, "h")
    w_gf = postulated_equiv(dc, compose(g, f), arrow(C, A, "i1"), "e1", "e2")
    assert w_gf.recheck(dc.sig) == []
    w_hg = postulated_equiv(dc, compose(h, g), arrow(D, B, "i2"), "e3", "e4")
    assert w_hg.recheck(dc.sig) == []
    out = he.two_out_of_six(dc, f, g, h, w_gf, w_hg)
    assert set(out) == {"f", "g", "h", "hgf"}
    for name, e in out.items():
        assert e.recheck(dc.sig) == [], name
    assert cat.morphism_eq(dc.sig, out["hgf"].fwd, compose(h, compose(g, f)))
