"""Algebra of witnessed homotopy equivalences between one-cell objects.

Composition is strictly associative in the classifying category, so the
two-out-of-six witnesses assemble from whiskering and chain composition
alone; every produced homotopy is kernel re-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import cat
from ..cat import Fibration, Morphism, compose, identity
from ..syntax import Telescope
from .core import DerivationContext, DeriveError
from .ops import homotopy_between, whisker_post
from .witnesses import Homotopy, make_homotopy, require_clean


@dataclass(frozen=True)
class HoEquiv:
    """A map with a two-sided homotopy inverse, witnesses included."""

    fwd: Morphism
    inv: Morphism
    fwd_inv: Homotopy  # fwd . inv ~ identity on the target
    inv_fwd: Homotopy  # inv . fwd ~ identity on the source

    def recheck(self, sig) -> list[str]:
        failures = []
        failures += [f"fwd_inv: {x}" for x in self.fwd_inv.recheck(sig)]
        failures += [f"inv_fwd: {x}" for x in self.inv_fwd.recheck(sig)]
        if not cat.morphism_eq(sig, self.fwd_inv.f, compose(self.fwd, self.inv)):
            failures.append("fwd_inv does not start at fwd.inv")
        if not cat.morphism_eq(sig, self.fwd_inv.g, identity(self.fwd.dst)):
            failures.append("fwd_inv does not end at the identity")
        if not cat.morphism_eq(sig, self.inv_fwd.f, compose(self.inv, self.fwd)):
            failures.append("inv_fwd does not start at inv.fwd")
        if not cat.morphism_eq(sig, self.inv_fwd.g, identity(self.fwd.src)):
            failures.append("inv_fwd does not end at the identity")
        return failures


def _obj_fib(ctx) -> Fibration:
    if len(ctx) != 1:
        raise DeriveError("homotopy-equivalence algebra works on one-cell objects")
    return Fibration(Telescope(), ctx)


def hflip(dc: DerivationContext, w: Homotopy) -> Homotopy:
    ps = dc.path_structure(w.fib)
    return homotopy_between(dc, w.fib, ps.flip_w(w.h))


def hcat(dc: DerivationContext, w1: Homotopy, w2: Homotopy) -> Homotopy:
    ps = dc.path_structure(w1.fib)
    return homotopy_between(dc, w1.fib, ps.comp_w(w1.h, w2.h))


def hpre(dc: DerivationContext, w: Homotopy, k: Morphism) -> Homotopy:
    """Precompose both legs of a homotopy with k."""
    return make_homotopy(
        dc.sig, w.fib, w.rel, compose(w.f, k), compose(w.g, k), compose(w.h, k)
    )


def hpost(dc: DerivationContext, k: Morphism, w: Homotopy) -> Homotopy:
    return whisker_post(dc, k, w)


def refl_homotopy(dc: DerivationContext, m: Morphism) -> Homotopy:
    fib = _obj_fib(m.dst)
    ps = dc.path_structure(fib)
    return homotopy_between(dc, fib, compose(ps.r, m))


def identity_equiv(dc: DerivationContext, ctx) -> HoEquiv:
    one = identity(ctx)
    w = refl_homotopy(dc, one)
    return HoEquiv(one, one, w, w)


def compose_equiv(dc: DerivationContext, e1: HoEquiv, e2: HoEquiv) -> HoEquiv:
    """Witnessed equivalences compose: first e1, then e2."""
    fwd = compose(e2.fwd, e1.fwd)
    inv = compose(e1.inv, e2.inv)
    # e2 (e1 e1inv) e2inv ~ e2 e2inv ~ 1
    k1 = hpre(dc, hpost(dc, e2.fwd, e1.fwd_inv), e2.inv)
    fwd_inv = hcat(dc, k1, e2.fwd_inv)
    k2 = hpre(dc, hpost(dc, e1.inv, e2.inv_fwd), e1.fwd)
    inv_fwd = hcat(dc, k2, e1.inv_fwd)
    w = HoEquiv(fwd, inv, fwd_inv, inv_fwd)
    failures = w.recheck(dc.sig)
    if failures:
        raise DeriveError("composite equivalence failed re-check: " + "; ".join(failures))
    return w


def two_out_of_six(
    dc: DerivationContext,
    f: Morphism,
    g: Morphism,
    h: Morphism,
    w_gf: HoEquiv,
    w_hg: HoEquiv,
) -> dict[str, HoEquiv]:
    """From witnessed equivalences for g.f and h.g, derive all four maps."""
    sig = dc.sig
    if not cat.morphism_eq(sig, w_gf.fwd, compose(g, f)):
        raise DeriveError("first witness is not for the composite of f and g")
    if not cat.morphism_eq(sig, w_hg.fwd, compose(h, g)):
        raise DeriveError("second witness is not for the composite of g and h")
    u1, u2 = w_gf.inv, w_hg.inv

    # g: right inverse f.u1 via the first witness; left side by inserting
    # the second witness around the composite
    inv_g = compose(f, u1)
    g_right = w_gf.fwd_inv  # g (f u1) = (g f) u1 ~ 1
    k1 = hpre(dc, hpost(dc, compose(u2, h), w_gf.fwd_inv), g)
    chain_a = hcat(dc, k1, w_hg.inv_fwd)
    k3 = hpre(dc, w_hg.inv_fwd, compose(inv_g, g))
    g_left = hcat(dc, hflip(dc, k3), chain_a)
    e_g = HoEquiv(g, inv_g, g_right, g_left)

    # f: inverse u1.g
    inv_f = compose(u1, g)
    e_f = HoEquiv(f, inv_f, g_left, w_gf.inv_fwd)

    # h: inverse g.u2
    inv_h = compose(g, u2)
    p1 = hpre(dc, hpost(dc, g, w_hg.inv_fwd), compose(f, u1))
    chain_b = hcat(dc, p1, w_gf.fwd_inv)
    p3 = hpost(dc, compose(inv_h, h), w_gf.fwd_inv)
    h_left = hcat(dc, hflip(dc, p3), chain_b)
    e_h = HoEquiv(h, inv_h, w_hg.fwd_inv, h_left)

    e_hgf = compose_equiv(dc, compose_equiv(dc, e_f, e_g), e_h)
    out = {"f": e_f, "g": e_g, "h": e_h, "hgf": e_hgf}
    for name, e in out.items():
        failures = e.recheck(dc.sig)
        if failures:
            raise DeriveError(f"two-out-of-six output {name} failed: " + "; ".join(failures))
    return out
