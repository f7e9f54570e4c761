"""Kernel checks for the identity-type rules and strong sums."""

import pytest

from idpath import checker as ck
from idpath import defeq as dq
from idpath.syntax import (
    Con,
    H,
    IdT,
    J,
    Pair,
    Refl,
    SigT,
    Signature,
    Star,
    TCon,
    Telescope,
    UnitT,
    Var,
)

A = TCon("A")


@pytest.fixture
def sig():
    s = Signature()
    s = ck.declare_type(s, "A", Telescope())
    s = ck.declare_term(s, "a", Telescope(), A)
    s = ck.declare_term(s, "b", Telescope(), A)
    s = ck.declare_type(s, "B", Telescope.of(("x", A)))
    return s


def test_axiom_rule(sig):
    ctx = Telescope.of(("x", A))
    assert ck.infer(sig, ctx, Var(0)) == A


def test_id_formation(sig):
    ctx = Telescope.of(("x", A))
    assert ck.check_type_report(sig, ctx, IdT(A, Var(0), Var(0))).ok


def test_id_formation_scope_error(sig):
    rep = ck.telescope_wf(sig, Telescope.of(("u", IdT(A, Var(0), Var(0)))))
    assert not rep.ok


def test_refl_introduction(sig):
    ctx = Telescope.of(("x", A))
    got = ck.infer(sig, ctx, Refl(A, Var(0)))
    assert got == IdT(A, Var(0), Var(0))


def test_refl_at_wrong_endpoints_rejected(sig):
    rep = ck.check(sig, Telescope(), Refl(A, Con("a")), IdT(A, Con("a"), Con("b")))
    assert not rep.ok
    assert rep.rule == "conversion"


def sym_term():
    """J-term for symmetry: in context x,y,u gives an element of Id A y x."""
    return J(
        ty=A,
        names=("x", "y", "u"),
        delta=Telescope(),
        motive=IdT(TCon("A"), Var(1), Var(2)),
        branch=Refl(TCon("A"), Var(0)),
        a=Var(2),
        b=Var(1),
        p=Var(0),
        args=(),
    )


def id_ctx():
    return Telescope.of(
        ("x", A), ("y", A), ("u", IdT(A, Var(1), Var(0)))
    )


def test_j_elimination_symmetry(sig):
    got = ck.infer(sig, id_ctx(), sym_term())
    assert dq.defeq_types(sig, id_ctx(), got, IdT(A, Var(1), Var(2)))


def test_j_computation_witness(sig):
    ctx = Telescope.of(("x", A))
    h = H(
        ty=A,
        names=("x", "y", "u"),
        delta=Telescope(),
        motive=IdT(TCon("A"), Var(1), Var(2)),
        branch=Refl(TCon("A"), Var(0)),
        a=Var(0),
        args=(),
    )
    got = ck.infer(sig, ctx, h)
    assert isinstance(got, IdT)
    # endpoints: J at refl, and the branch instance
    assert got.rhs == Refl(A, Var(0))


def test_j_does_not_compute_definitionally(sig):
    ctx = Telescope.of(("x", A))
    j_at_refl = J(
        ty=A,
        names=("x", "y", "u"),
        delta=Telescope(),
        motive=IdT(TCon("A"), Var(1), Var(2)),
        branch=Refl(TCon("A"), Var(0)),
        a=Var(0),
        b=Var(0),
        p=Refl(A, Var(0)),
        args=(),
    )
    branch_at = Refl(A, Var(0))
    ty = IdT(A, Var(0), Var(0))
    assert ck.check(sig, ctx, j_at_refl, ty).ok
    assert not dq.defeq_terms(sig, ctx, ty, j_at_refl, branch_at)


def test_j_with_delta_transitivity(sig):
    # context x,y,u:Id(x,y),z,v:Id(y,z); eliminate v with delta (x0, u0)
    ctx = Telescope.of(
        ("x", A),
        ("y", A),
        ("u", IdT(A, Var(1), Var(0))),
        ("z", A),
        ("v", IdT(A, Var(2), Var(0))),
    )
    trans = J(
        ty=A,
        names=("y", "z", "v"),
        # delta over ...,y,z,v: x0 : A, u0 : Id A x0 y
        delta=Telescope.of(
            ("x0", TCon("A")),
            ("u0", IdT(TCon("A"), Var(0), Var(3))),
        ),
        # motive over y,z,v,x0,u0: Id A x0 z
        motive=IdT(TCon("A"), Var(1), Var(3)),
        # branch over y,x0,u0: u0
        branch=Var(0),
        a=Var(3),
        b=Var(1),
        p=Var(0),
        args=(Var(4), Var(2)),
    )
    got = ck.infer(sig, ctx, trans)
    assert dq.defeq_types(sig, ctx, got, IdT(A, Var(4), Var(1)))


def test_spine_arity_mismatch(sig):
    bad = TCon("B", ())
    rep = ck.check_type_report(sig, Telescope(), bad)
    assert not rep.ok
    assert rep.rule == "arity"


def test_sig_disabled_without_flag(sig):
    rep = ck.check_type_report(sig, Telescope(), SigT("x", A, TCon("B", (Var(0),))))
    assert not rep.ok
    assert rep.rule == "strong-sums"


def strong(sig):
    return sig.with_strong_sums(True)


def test_pair_checks_against_sig_type(sig):
    s = strong(sig)
    s = ck.declare_term(s, "bb", Telescope(), TCon("B", (Con("a"),)))
    pair_ty = SigT("x", A, TCon("B", (Var(0),)))
    rep = ck.check(s, Telescope(), Pair(Con("a"), Con("bb")), pair_ty)
    assert rep.ok


def test_unit_eta(sig):
    s = strong(sig)
    s = ck.declare_term(s, "u", Telescope(), UnitT())
    assert dq.defeq_terms(s, Telescope(), UnitT(), Con("u"), Star())


def test_surjective_pairing(sig):
    s = strong(sig)
    pair_ty = SigT("x", A, TCon("B", (Var(0),)))
    s = ck.declare_term(s, "c", Telescope(), pair_ty)
    c = Con("c")
    assert dq.defeq_terms(s, Telescope(), pair_ty, c, Pair(ck.Fst(c), ck.Snd(c)))


def test_projection_reduction(sig):
    s = strong(sig)
    s = ck.declare_term(s, "bb", Telescope(), TCon("B", (Con("a"),)))
    p = Pair(Con("a"), Con("bb"))
    assert dq.whnf(s, ck.Fst(p)) == Con("a")
    assert dq.whnf(s, ck.Snd(p)) == Con("bb")
    assert dq.defeq_types(
        s,
        Telescope(),
        IdT(A, ck.Fst(p), Con("a")),
        IdT(A, Con("a"), Con("a")),
    )


def test_definition_unfolds(sig):
    s = ck.define(sig, "a2", Telescope(), A, Con("a"))
    assert dq.defeq_terms(s, Telescope(), A, Con("a2"), Con("a"))
    assert not dq.defeq_terms(s, Telescope(), A, Con("a2"), Con("b"))


def test_infer_check_agreement(sig):
    ctx = id_ctx()
    t = sym_term()
    got = ck.infer(sig, ctx, t)
    assert ck.check(sig, ctx, t, got).ok


def test_load_order_signature(sig):
    # definition referencing an undeclared name is rejected
    with pytest.raises(ck.CheckError):
        ck.define(sig, "bad", Telescope(), A, Con("nope"))
