"""Path-structure engine: construction and kernel re-checks at low rank."""

import pytest

from idpath import cat, checker as ck
from idpath.cat import Fibration, Morphism, compose, identity
from idpath.pathtools.core import DerivationContext
from idpath.syntax import (
    IdT,
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
    return s


def verify_structure(dc, ps):
    """Kernel-check every component and the relation equations."""
    sig = dc.sig
    ck.check_telescope(sig, Telescope(), ps.total)
    cat.check_morphism(sig, ps.r)
    cat.check_morphism(sig, ps.sym_mor)
    ck.check_telescope(sig, Telescope(), ps.trans_dom.total)
    cat.check_morphism(sig, ps.trans_mor)

    proj = ps.relfib.projection()
    # reflexivity lands on the diagonal
    diag = Morphism(
        ps.fib.total,
        ps.xx,
        identity(ps.fib.total).spine + identity(ps.fib.total).spine[ps.g :],
    )
    assert cat.morphism_eq(sig, compose(proj, ps.r), diag)
    # symmetry swaps the two projections
    st = compose(proj, ps.sym_mor)
    swapped = Morphism(
        ps.total,
        ps.xx,
        ps.tau().spine + ps.sigma().spine[ps.g :],
    )
    assert cat.morphism_eq(sig, st, swapped)
    # transitivity projects to the outer endpoints
    ln = len(ps.trans_dom.total)
    g, n = ps.g, ps.n
    pi1_sigma = [ps.trans_dom.total.cells[i] for i in range(0, 0)]  # unused
    outer = Morphism(
        ps.trans_dom.total,
        ps.xx,
        tuple(Var(ln - 1 - p) for p in range(0, g + n))
        + tuple(Var(ln - 1 - p) for p in range(g + 3 * n, g + 4 * n)),
    )
    assert cat.morphism_eq(sig, compose(proj, ps.trans_mor), outer)


def test_rank0_structure(sig):
    dc = DerivationContext(sig)
    ps = dc.path_structure(Fibration(Telescope.of(("x", A)), Telescope()))
    assert ps.total == Telescope.of(("x", A))


def test_rank1_structure_verifies(sig):
    dc = DerivationContext(sig)
    fib = Fibration(Telescope(), Telescope.of(("x", A)))
    ps = dc.path_structure(fib)
    assert len(ps.total) == 3
    verify_structure(dc, ps)


def test_rank1_over_base_verifies(sig):
    dc = DerivationContext(sig)
    ga = Telescope.of(("x", A))
    fib = Fibration(ga, Telescope.of(("b", TCon("B", (Var(0),)))))
    ps = dc.path_structure(fib)
    verify_structure(dc, ps)


def test_rank1_groupoid_helpers_verify(sig):
    dc = DerivationContext(sig)
    fib = Fibration(Telescope(), Telescope.of(("x", A)))
    ps = dc.path_structure(fib)
    g2 = dc.groupoid_unit(ps)
    cat.check_morphism(dc.sig, g2)
    g4 = dc.groupoid_inverse(ps)
    cat.check_morphism(dc.sig, g4)
    # endpoints of the inverse law: compose-with-reversal vs refl at source
    p2a = dc.p2_structure(ps)
    proj = p2a.relfib.projection()
    got = compose(proj, g4)
    cat.check_morphism(dc.sig, got)


def test_fill_symmetry_square(sig):
    # the square whose filler is path reversal
    dc = DerivationContext(sig)
    fib = Fibration(Telescope(), Telescope.of(("x", A)))
    ps = dc.path_structure(fib)
    cert = dc.cert_r(fib)
    # top: r (as a map into the path object); bottom: swapped endpoints
    lt = 3
    bottom = Morphism(
        ps.total,
        ps.xx,
        (Var(1), Var(2)),
    )
    d, h = dc.fill(cert, ps.relfib, ps.r, bottom)
    sig = dc.sig
    cat.check_morphism(sig, d)
    cat.check_morphism(sig, h)
    proj = ps.relfib.projection()
    assert cat.morphism_eq(sig, compose(proj, d), bottom)
    # d agrees with the built-in symmetry map
    assert cat.morphism_eq(sig, d, ps.sym_mor)
    # h endpoints: d.g and top
    hps = dc.path_structure(ps.relfib)
    assert cat.morphism_eq(sig, compose(hps.sigma(), h), compose(d, cert.g))
    assert cat.morphism_eq(sig, compose(hps.tau(), h), ps.r)


def test_rank2_structure_verifies(sig):
    dc = DerivationContext(sig)
    theta = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    fib = Fibration(Telescope(), theta)
    ps = dc.path_structure(fib)
    # expected telescope shape: x0 b0 x1 b1 alpha beta
    assert len(ps.total) == 6
    assert isinstance(ps.pi[0].ty, IdT)
    assert isinstance(ps.pi[1].ty, IdT)
    verify_structure(dc, ps)


def test_rank2_transport_verifies(sig):
    dc = DerivationContext(sig)
    theta = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    fib = Fibration(Telescope(), theta)
    ps = dc.path_structure(fib)
    td = ps.transport
    sig = dc.sig
    cat.check_morphism(sig, td.gamma)
    cat.check_morphism(sig, td.coherence)
    # gamma lands over the target endpoint
    q = ps.split_q
    lhs = compose(q.projection(), td.gamma)
    lw = len(td.dom.total)
    rhs = Morphism(td.dom.total, ps.x1.total, (Var(1),))
    assert cat.morphism_eq(sig, lhs, rhs)
    # coherence endpoints: transport along refl vs identity
    inner = ps.inner
    one = identity(fib.total)
    gamma_refl = compose(
        td.gamma,
        Morphism(
            fib.total,
            td.dom.total,
            identity(fib.total).spine + ps.r.spine[-2:] if False else identity(fib.total).spine + (Var(1), ps.r.spine[len(ps.r.spine) - 2]),
        ),
    )
    s_side = compose(inner.sigma(), td.coherence)
    t_side = compose(inner.tau(), td.coherence)
    assert cat.morphism_eq(sig, t_side, one)


def test_rank3_structure_verifies(sig):
    dc = DerivationContext(sig)
    theta = Telescope.of(
        ("x", A),
        ("b", TCon("B", (Var(0),))),
        ("c", TCon("C", (Var(1), Var(0)))),
    )
    fib = Fibration(Telescope(), theta)
    ps = dc.path_structure(fib)
    assert len(ps.total) == 9
    verify_structure(dc, ps)
