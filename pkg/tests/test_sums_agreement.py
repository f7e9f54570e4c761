"""Strong-sums collapse agreement with the built path objects."""

import pytest

from idpath import cat, checker as ck
from idpath import pathtools as pt
from idpath.cat import Fibration
from idpath.pathtools.sums import collapsed_relation
from idpath.syntax import Signature, TCon, Telescope, Var

A = TCon("A")


@pytest.fixture
def sig():
    s = Signature()
    s = ck.declare_type(s, "A", Telescope())
    s = ck.declare_type(s, "B", Telescope.of(("x", A)))
    s = ck.declare_type(s, "C", Telescope.of(("x", A), ("b", TCon("B", (Var(0),)))))
    return s.with_strong_sums(True)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_collapsed_relation_checks(sig, n):
    theta = Telescope.of(
        *[
            ("x", A),
            ("b", TCon("B", (Var(0),))),
            ("c", TCon("C", (Var(1), Var(0)))),
        ][:n]
    )
    dc = pt.DerivationContext(sig)
    rel = collapsed_relation(dc, Fibration(Telescope(), theta))
    assert rel.recheck(dc.sig) == []


@pytest.mark.parametrize("n", [1, 2, 3])
def test_agreement_similarity(sig, n):
    theta = Telescope.of(
        *[
            ("x", A),
            ("b", TCon("B", (Var(0),))),
            ("c", TCon("C", (Var(1), Var(0)))),
        ][:n]
    )
    dc = pt.DerivationContext(sig)
    fib = Fibration(Telescope(), theta)
    bundle = pt.build_py(dc, fib)
    coll = collapsed_relation(dc, fib)
    w = pt.similar_maps(dc, bundle.eqrel, coll)
    assert w.recheck(dc.sig) == []
