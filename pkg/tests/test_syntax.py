"""Substitution and weakening on the de Bruijn core."""

import random

from idpath.syntax import (
    Con,
    IdT,
    Refl,
    TCon,
    TeleCell,
    Telescope,
    Var,
    id_spine,
    max_free_index,
    subst,
    subst1,
    weaken,
    weaken_tele,
    well_scoped,
)


def test_weaken_var_at_zero():
    assert weaken(Var(0), 1) == Var(1)
    assert weaken(Var(3), 2) == Var(5)


def test_weaken_respects_cutoff():
    assert weaken(Var(0), 1, at=1) == Var(0)
    assert weaken(Var(1), 1, at=1) == Var(2)


def test_weaken_closed_spine_unchanged():
    t = Con("f", (Con("a", ()), Con("b", ())))
    assert weaken(t, 5) == t


def test_subst_id_type():
    # x replaced by a in Id_A(x, x) gives Id_A(a, a)
    a = Con("a", ())
    ty = IdT(TCon("A"), Var(0), Var(0))
    assert subst1(ty, a) == IdT(TCon("A"), a, a)


def test_subst_refl():
    a = Con("a", ())
    assert subst1(Refl(TCon("A"), Var(0)), a) == Refl(TCon("A"), a)


def test_subst_shifts_remaining_indices():
    # context [z, x]; substituting x leaves z at index 0
    assert subst1(Var(1), Con("a", ())) == Var(0)


def test_subst_under_telescope_cell():
    tele = Telescope.of(("y", TCon("B", (Var(0),))))
    out = weaken_tele(tele, 3)
    assert out[0].ty == TCon("B", (Var(3),))


def test_id_spine_order():
    assert id_spine(3) == (Var(2), Var(1), Var(0))


def _random_term(depth: int, scope: int, rng: random.Random):
    if depth == 0 or rng.random() < 0.3:
        if scope > 0 and rng.random() < 0.7:
            return Var(rng.randrange(scope))
        return Con(rng.choice("abc"), ())
    choice = rng.randrange(3)
    if choice == 0:
        return Con("f", (_random_term(depth - 1, scope, rng), _random_term(depth - 1, scope, rng)))
    if choice == 1:
        return Refl(TCon("A", (_random_term(depth - 1, scope, rng),)), _random_term(depth - 1, scope, rng))
    return _random_term(depth - 1, scope, rng)


def test_weaken_then_subst_is_identity_randomized():
    rng = random.Random(0)
    for _ in range(20):
        scope = rng.randrange(1, 5)
        t = _random_term(3, scope, rng)
        at = rng.randrange(scope)
        widened = weaken(t, 1, at=at)
        filler = _random_term(2, at, rng)
        assert subst(widened, (filler,), at=at) == t


def test_substitution_composition_randomized():
    # substituting two variables one at a time, in either order, agrees
    rng = random.Random(1)
    for _ in range(20):
        t = _random_term(3, 2, rng)
        a = _random_term(2, 0, rng)  # closed
        b = _random_term(2, 0, rng)  # closed
        # context [y, x]: x = Var 0, y = Var 1
        both = subst(t, (b, a))
        one_then_other = subst1(subst1(t, a, at=0), b, at=0)
        other_then_one = subst1(subst1(t, weaken(b, 0), at=1), a, at=0)
        assert both == one_then_other
        assert both == other_then_one


def test_substitution_lemma_spine_composition():
    # t[spine][tail] == t[spine'] where spine' composes the substitutions
    rng = random.Random(2)
    for _ in range(20):
        t = _random_term(3, 3, rng)
        s0 = _random_term(2, 1, rng)
        s1 = _random_term(2, 1, rng)
        s2 = _random_term(2, 1, rng)
        tail = _random_term(2, 0, rng)
        lhs = subst1(subst(t, (s0, s1, s2)), tail)
        composed = tuple(subst1(s, tail) for s in (s0, s1, s2))
        rhs = subst(t, composed)
        assert lhs == rhs


def test_scope_reporting():
    assert max_free_index(Var(4)) == 4
    assert well_scoped(Var(0), 1)
    assert not well_scoped(Var(1), 1)
    tele_ty = IdT(TCon("A"), Var(0), Var(1))
    assert max_free_index(tele_ty) == 1
