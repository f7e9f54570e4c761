"""Strong-sums agreement: comparing the built path object with the one
obtained by collapsing the telescope to a single iterated sum type.

The collapsed relation is pulled back along the strict collapse
isomorphisms; the forward comparison map is compiled by a congruence
recursion on the telescope, the backward one by a lifting problem against
a conjugated reflexivity certificate.
"""

from __future__ import annotations

from ..cat import Fibration, Morphism, compose, identity, sigma_collapse
from ..syntax import (
    IdT,
    J as Jnode,
    Refl,
    TeleCell,
    Telescope,
    Var,
    id_spine,
    subst,
    var_spine,
    weaken,
    weaken_tele,
)
from .builders import ap_j, sym_j, trans_j
from .core import DerivationContext, DeriveError, cert_conjugate, transport_apply, vat, vseg
from .witnesses import EquivRelWitness, require_clean


def collapsed_relation(dc: DerivationContext, fib: Fibration) -> EquivRelWitness:
    """The path relation of the collapsed sum type, over the original tuples."""
    if not dc.sig.strong_sums:
        raise DeriveError("collapsed relations need the strong_sums flag")
    base, theta = fib.base, fib.ext
    g, n = len(base), len(theta)
    sty, fwd, bwd = sigma_collapse(dc.sig, base, theta)
    tower = fwd.spine[-1]  # over [base, theta]
    xx = base + theta + weaken_tele(theta, n)
    lxx = g + 2 * n
    tower0 = subst(tower, vseg(lxx, 0, g) + vseg(lxx, g, n))
    tower1 = subst(tower, vseg(lxx, 0, g) + vseg(lxx, g + n, n))
    wcell = TeleCell("w", IdT(weaken(sty, 2 * n), tower0, tower1))
    rel = Fibration(xx, Telescope((wcell,)))
    total = rel.total
    lt = lxx + 1
    ly = g + n
    rho = Morphism(
        fib.total,
        total,
        id_spine(ly) + id_spine(ly)[g:] + (Refl(weaken(sty, n), tower),),
    )
    sty_t = weaken(sty, lt - g)
    t0_t = weaken(tower0, 1)
    t1_t = weaken(tower1, 1)
    sym = Morphism(
        total,
        total,
        vseg(lt, 0, g)
        + vseg(lt, g + n, n)
        + vseg(lt, g, n)
        + (sym_j(sty_t, t0_t, t1_t, Var(0)),),
    )
    theta2 = weaken_tele(theta, 2 * n + 1)
    l2 = lt + n
    tower2 = subst(tower, vseg(l2, 0, g) + vseg(l2, lt, n))
    w2cell = TeleCell(
        "w2",
        IdT(weaken(sty, l2 - g), weaken(tower1, 1 + n), tower2),
    )
    trans_dom = Fibration(total, theta2 + Telescope((w2cell,)))
    ld = l2 + 1
    sty_d = weaken(sty, ld - g)
    trans = Morphism(
        trans_dom.total,
        total,
        vseg(ld, 0, g)
        + vseg(ld, g, n)
        + vseg(ld, lt, n)
        + (
            trans_j(
                sty_d,
                weaken(tower1, n + 2),
                weaken(tower2, 1),
                Var(0),
                weaken(tower0, n + 2),
                Var(n + 1),
            ),
        ),
    )
    w = require_clean(
        EquivRelWitness(fib, rel, rho, sym, trans, trans_dom), dc.sig
    )
    dc.register_relation(rel, ("collapsed", fib))
    return w


def tuple_congruence(dc: DerivationContext, fib: Fibration, body, body_ty):
    """Path between instances of `body` at the two copies of the telescope.

    `body` is a term over fib.total whose type `body_ty` lives over the
    base; the result is a term over the path-structure total relating
    body at the source copy to body at the target copy.
    """
    ps = dc.path_structure(fib)
    g, n = ps.g, ps.n
    if n == 0:
        return Refl(body_ty, body)
    stage = ps.total
    lt = len(stage)
    a = fib.ext[0].ty
    if n == 1:
        body_z = weaken(body, 3, at=1)
        return ap_j(
            weaken(a, 3), Var(2), Var(1), Var(0), body_z, weaken(body_ty, 3)
        )

    m = n - 1
    inner = ps.inner
    td = ps.transport
    cong_inner = tuple_congruence(dc, ps.split_q, body, weaken(body_ty, 1))

    # outer elimination on the first-cell path, carrying the source tail
    theta_r = Telescope(fib.ext.cells[1:])
    delta_j = weaken_tele(weaken_tele(theta_r, 2), 3 * n, 3)
    mctx_len = lt + 3 + m
    gamma = td.gamma
    rho_spine = (
        vseg(mctx_len, 0, g)
        + (vat(mctx_len, lt),)
        + vseg(mctx_len, lt + 3, m)
        + (vat(mctx_len, lt + 1), vat(mctx_len, lt + 2))
    )
    transported = tuple(subst(c, rho_spine) for c in gamma.spine[g + 1 :])
    full_lhs = (
        vseg(mctx_len, 0, g) + (vat(mctx_len, lt),) + vseg(mctx_len, lt + 3, m)
    )
    full_rhs = vseg(mctx_len, 0, g) + (vat(mctx_len, lt + 1),) + transported
    motive = IdT(
        weaken(body_ty, mctx_len - g), subst(body, full_lhs), subst(body, full_rhs)
    )
    # branch: congruence of the inner telescope along the transport coherence
    bctx_len = lt + 1 + m
    y_route = Morphism(
        fib.total,
        fib.total,
        id_spine(g + n),
    )
    flipcoh = inner.flip_w(td.coherence)
    branch_route = (
        vseg(bctx_len, 0, g) + (vat(bctx_len, lt),) + vseg(bctx_len, lt + 1, m)
    )
    flipcoh_b = tuple(subst(c, branch_route) for c in flipcoh.spine)
    branch = subst(cong_inner, flipcoh_b)
    jterm = Jnode(
        weaken(a, 3 * n),
        ("x", "y", "u"),
        delta_j,
        motive,
        branch,
        vat(lt, g),
        vat(lt, g + n),
        vat(lt, g + 2 * n),
        vseg(lt, g + 1, m),
    )
    jterm = dc.intern("cg", stage, jterm)

    # endpoints over the stage and the recursive second leg
    t_mor = dc._t_of_stage(ps, stage, g, g + 1, g + n, g + 2 * n, g + n + 1, g + 2 * n + 1)
    step2 = subst(cong_inner, t_mor.spine)
    step2 = dc.intern("cg", stage, step2)
    b0 = subst(body, vseg(lt, 0, g) + (vat(lt, g),) + vseg(lt, g + 1, m))
    y0 = Morphism(stage, fib.total, vseg(lt, 0, g) + (vat(lt, g),) + vseg(lt, g + 1, m))
    tr_stage = transport_apply(td, y0, vat(lt, g + n), vat(lt, g + 2 * n))
    bmid = subst(body, vseg(lt, 0, g) + (vat(lt, g + n),) + tr_stage.spine[g + 1 :])
    b1 = subst(body, vseg(lt, 0, g) + (vat(lt, g + n),) + vseg(lt, g + n + 1, m))
    result = trans_j(weaken(body_ty, lt - g), bmid, b1, step2, b0, jterm)
    return dc.intern("cg", stage, result)


def collapsed_similarity(dc: DerivationContext, r_canon, r_coll, fib):
    """Comparison maps between the built relation and the collapsed one."""
    from .ops import SimilarityWitness

    base, theta = fib.base, fib.ext
    g, n = len(base), len(theta)
    sty, fwd, bwd = sigma_collapse(dc.sig, base, theta)
    ps = dc.path_structure(fib)
    zfib = Fibration(base, Telescope((TeleCell("z", sty),)))
    psz = dc.path_structure(zfib)

    # forward: compile the congruence term into the collapsed relation
    cong = tuple_congruence(dc, fib, fwd.spine[-1], sty)
    lt = len(ps.total)
    fwd_map = Morphism(
        ps.total, r_coll.rel.total, vseg(lt, 0, g + 2 * n) + (cong,)
    )

    # backward: lift the reflexivity witness against the built relation
    tz = r_coll.rel.total
    ltz = len(tz)
    tower = fwd.spine[-1]
    tower0 = subst(tower, vseg(ltz, 0, g) + vseg(ltz, g, n))
    tower1 = subst(tower, vseg(ltz, 0, g) + vseg(ltz, g + n, n))
    u_to_old = Morphism(
        tz, psz.total, vseg(ltz, 0, g) + (tower0, tower1, Var(0))
    )
    lpz = len(psz.total)
    chains0 = tuple(
        subst(c, vseg(lpz, 0, g) + (Var(2),)) for c in bwd.spine[g:]
    )
    chains1 = tuple(
        subst(c, vseg(lpz, 0, g) + (Var(1),)) for c in bwd.spine[g:]
    )
    u_from_old = Morphism(
        psz.total, tz, vseg(lpz, 0, g) + chains0 + chains1 + (Var(0),)
    )
    cert0 = dc.cert_r(zfib)
    g_conj = compose(u_from_old, compose(cert0.g, fwd))
    cert = cert_conjugate(cert0, g_conj, u_to_old, u_from_old, fwd, bwd)
    dc.register_cert(cert)
    bottom = Morphism(tz, ps.xx, vseg(ltz, 0, g + 2 * n))
    bwd_map, _ = dc.fill(cert, ps.relfib, ps.r, bottom)
    w = SimilarityWitness(r_canon, r_coll, fwd_map, bwd_map)
    return require_clean(w, dc.sig)
