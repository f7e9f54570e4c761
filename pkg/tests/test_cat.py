"""Classifying-category layer: composition, pullbacks, collapse."""

import random

import pytest

from idpath import cat, checker as ck, defeq as dq
from idpath.syntax import (
    Con,
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
    s = ck.declare_term(s, "a", Telescope(), A)
    s = ck.declare_term(s, "f", Telescope.of(("x", A)), A)
    return s


def GA():
    return Telescope.of(("x", A))


def test_identity_spines():
    assert cat.identity(Telescope()).spine == ()
    assert cat.identity(GA()).spine == (Var(0),)


def test_compose_with_identity(sig):
    f = cat.Morphism(Telescope(), GA(), (Con("a"),))
    assert cat.morphism_eq(sig, cat.compose(cat.identity(GA()), f), f)
    assert cat.morphism_eq(sig, cat.compose(f, cat.identity(Telescope())), f)


def test_compose_projections_drop_concatenated_segment(sig):
    ga = GA()
    gab = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    p1 = cat.Fibration(ga, Telescope(gab.cells[1:]))  # [x,b] -> [x]
    p0 = cat.Fibration(Telescope(), ga)  # [x] -> []
    both = cat.compose(p0.projection(), p1.projection())
    direct = cat.Fibration(Telescope(), gab).projection()
    assert cat.morphism_eq(sig, both, direct)


def test_associativity_randomized(sig):
    rng = random.Random(3)
    ga = GA()
    for _ in range(20):
        # endomorphisms of [x:A] built from the postulated f
        def rand_endo():
            t = Var(0)
            for _ in range(rng.randrange(3)):
                t = Con("f", (t,))
            return cat.Morphism(ga, ga, (t,))

        f, g, h = rand_endo(), rand_endo(), rand_endo()
        lhs = cat.compose(h, cat.compose(g, f))
        rhs = cat.compose(cat.compose(h, g), f)
        assert cat.morphism_eq(sig, lhs, rhs)


def test_pullback_along_identity(sig):
    p = cat.Fibration(GA(), Telescope.of(("b", TCon("B", (Var(0),)))))
    pb, sq = cat.pullback_display(p, cat.identity(GA()))
    assert pb.ext == p.ext
    assert sq.commutes(sig)


def test_pullback_along_point(sig):
    p = cat.Fibration(GA(), Telescope.of(("b", TCon("B", (Var(0),)))))
    a = cat.Morphism(Telescope(), GA(), (Con("a"),))
    pb, sq = cat.pullback_display(p, a)
    assert pb.base == Telescope()
    assert pb.ext[0].ty == TCon("B", (Con("a"),))
    assert sq.commutes(sig)
    cat.check_morphism(sig, sq.top)


def test_pullback_pasting(sig):
    ga = GA()
    p = cat.Fibration(ga, Telescope.of(("b", TCon("B", (Var(0),)))))
    f = cat.Morphism(ga, ga, (Con("f", (Var(0),)),))
    g = cat.Morphism(Telescope(), ga, (Con("a"),))
    pb_all, _ = cat.pullback_display(p, cat.compose(f, g))
    pb_f, _ = cat.pullback_display(p, f)
    pb_fg, _ = cat.pullback_display(pb_f, g)
    assert dq.defeq_teles(sig, Telescope(), pb_all.ext, pb_fg.ext)


def test_pullback_universal_property(sig):
    ga = GA()
    p = cat.Fibration(ga, Telescope.of(("b", TCon("B", (Var(0),)))))
    f = cat.Morphism(ga, ga, (Con("f", (Var(0),)),))
    pb, sq = cat.pullback_display(p, f)
    # cone from pb.total itself: u = west, v = top
    med = cat.pullback_pair(sq, sq.west, sq.top)
    assert cat.morphism_eq(sig, med, cat.identity(pb.total))


def test_rank_arithmetic(sig):
    gab = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    fib = cat.Fibration(Telescope(), gab)
    high, low = cat.split_fibration(fib, 1)
    assert low.rank == 1 and high.rank == 1
    assert cat.compose_fibrations(high, low) == fib


def test_permute_context(sig):
    ctx = Telescope.of(("x", A), ("y", A), ("u", IdT(A, Var(1), Var(0))))
    new_ctx, fwd, bwd = cat.permute_context(ctx, [1, 0, 2])
    cat.check_morphism(sig, fwd)
    cat.check_morphism(sig, bwd)
    assert cat.morphism_eq(sig, cat.compose(bwd, fwd), cat.identity(ctx))
    assert cat.morphism_eq(sig, cat.compose(fwd, bwd), cat.identity(new_ctx))
    with pytest.raises(cat.CatError):
        cat.permute_context(ctx, [2, 0, 1])  # u before its endpoints


def test_slice_view(sig):
    sv = cat.SliceView(GA())
    disp = sv.object(Telescope.of(("b", TCon("B", (Var(0),)))))
    upper = cat.Fibration(disp.total, Telescope.of(("c", TCon("B", (Var(1),)))))
    tot = sv.sigma_along(disp, upper)
    assert tot.rank == 2
    assert sv.slice_of_slice(disp.ext).base == disp.total


def strong(sig):
    return sig.with_strong_sums(True)


def collapse_roundtrip(sig, base, tele):
    sty, fwd, bwd = cat.sigma_collapse(sig, base, tele)
    ck.check_type(sig, base, sty)
    cat.check_morphism(sig, fwd)
    cat.check_morphism(sig, bwd)
    total = base + tele
    assert cat.morphism_eq(sig, cat.compose(bwd, fwd), cat.identity(total))
    assert cat.morphism_eq(sig, cat.compose(fwd, bwd), cat.identity(base.extend("z", sty)))
    return sty


def test_sigma_collapse_empty(sig):
    s = strong(sig)
    sty = collapse_roundtrip(s, GA(), Telescope())
    assert sty == cat.UnitT()


def test_sigma_collapse_single(sig):
    s = strong(sig)
    sty = collapse_roundtrip(s, Telescope(), GA())
    assert isinstance(sty, cat.SigT)
    assert sty.dom == cat.UnitT()


def test_sigma_collapse_pair(sig):
    s = strong(sig)
    tele = Telescope.of(("x", A), ("b", TCon("B", (Var(0),))))
    sty = collapse_roundtrip(s, Telescope(), tele)
    assert isinstance(sty, cat.SigT)
    assert isinstance(sty.dom, cat.SigT)


def test_sigma_collapse_triple_with_id(sig):
    s = strong(sig)
    tele = Telescope.of(
        ("x", A),
        ("y", A),
        ("u", IdT(A, Var(1), Var(0))),
    )
    collapse_roundtrip(s, Telescope(), tele)


def test_sigma_collapse_requires_flag(sig):
    with pytest.raises(cat.CatError):
        cat.sigma_collapse(sig, Telescope(), GA())
