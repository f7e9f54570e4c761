"""Witness-compiler engine.

Lifting problems are solved only against structurally recognised maps:
reflexivity maps of path structures and their pullbacks along fibrations,
carried around as certificates with strict reordering isomorphisms.  The
master `fill` turns such a problem into a single J/H pair at rank one and
recurses through the transport machinery at higher ranks; `path_structure`
builds the path object of a projection of any rank together with its
reflexivity, symmetry and transitivity maps and the transport data the
recursion needs.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..cat import Fibration, Morphism, compose, identity, permute_context
from ..defeq import branch_context, id_triple
from ..syntax import (
    Con,
    Context,
    H as Hnode,
    IdT,
    J as Jnode,
    Refl,
    Signature,
    TeleCell,
    Telescope,
    TypeExpr,
    Var,
    id_spine,
    subst,
    subst_tele,
    var_spine,
    weaken,
    weaken_tele,
)
from .builders import sym_j, sym_h, trans_j, trans_h, ap_j


class DeriveError(Exception):
    pass


def vat(ctx_len: int, pos: int) -> Var:
    """Variable for the cell at position `pos` of a context of length ctx_len."""
    return Var(ctx_len - 1 - pos)


def _term_size(t, limit: int) -> int:
    """Node count, stopping early once past `limit`."""
    stack = [t]
    count = 0
    while stack and count <= limit:
        node = stack.pop()
        count += 1
        for f in getattr(node, "__dataclass_fields__", ()):
            v = getattr(node, f)
            if isinstance(v, tuple):
                stack.extend(x for x in v if hasattr(x, "__dataclass_fields__"))
            elif isinstance(v, Telescope):
                stack.extend(c.ty for c in v)
            elif hasattr(v, "__dataclass_fields__"):
                stack.append(v)
    return count


def vseg(ctx_len: int, start: int, count: int) -> tuple:
    return tuple(vat(ctx_len, p) for p in range(start, start + count))


# ---------------------------------------------------------------------------
# Certificates for structural weak equivalences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeqCert:
    """A map certified as a pullback of a reflexivity map along a fibration.

    The canonical form is `gc : [base, x, delta[x,x,refl]] -> [base, x, y,
    u, delta]`; the stored isomorphisms are strict context reorderings (or
    other definitional isos) carrying the actual g onto gc.
    """

    g: Morphism
    base: Context
    ty: TypeExpr
    delta: Telescope
    u_fwd: Morphism  # g.dst -> Ucanon
    u_bwd: Morphism
    v_fwd: Morphism  # g.src -> Vcanon
    v_bwd: Morphism

    @property
    def u_canon(self) -> Context:
        return self.base + id_triple(self.ty) + self.delta

    @property
    def v_canon(self) -> Context:
        return branch_context(self.base, self.ty, self.delta)

    def canonical_g(self) -> Morphism:
        gg = len(self.base)
        k = len(self.delta)
        src = self.v_canon
        n = len(src)
        spine = (
            var_spine(n, 0, gg)
            + (vat(n, gg), vat(n, gg), Refl(weaken(self.ty, 1 + k), vat(n, gg)))
            + vseg(n, gg + 1, k)
        )
        return Morphism(src, self.u_canon, spine)


def cert_conjugate(
    cert: WeqCert,
    g: Morphism,
    u_to_old: Morphism,
    u_from_old: Morphism,
    v_to_old: Morphism,
    v_from_old: Morphism,
) -> WeqCert:
    """Transport a certificate along strict isomorphisms of its endpoints."""
    return WeqCert(
        g=g,
        base=cert.base,
        ty=cert.ty,
        delta=cert.delta,
        u_fwd=compose(cert.u_fwd, u_to_old),
        u_bwd=compose(u_from_old, cert.u_bwd),
        v_fwd=compose(cert.v_fwd, v_to_old),
        v_bwd=compose(v_from_old, cert.v_bwd),
    )


# ---------------------------------------------------------------------------
# Transport data and path structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransportData:
    """Transport of a fibration along the path object of its one-cell base.

    `gamma` maps [total, x1, path] to total, over the target endpoint; the
    coherence relates transporting along refl to the identity, as a morphism
    into the path structure of the transported fibration.
    """

    dom: Fibration  # (Y, [x1, path]) with Y the transported total
    gamma: Morphism  # dom.total -> Y
    coherence: Morphism  # Y -> inner path-structure total; sigma = gamma(1,refl), tau = 1


class PathStructure:
    """Path object of a canonical projection plus its derived structure."""

    def __init__(self, dc: "DerivationContext", fib: Fibration):
        self.dc = dc
        self.fib = fib
        self.n = fib.rank
        self.g = len(fib.base)
        self.x1: Fibration | None = None
        self.pa: "PathStructure | None" = None
        self.split_q: Fibration | None = None
        self.inner: "PathStructure | None" = None
        self.transport: TransportData | None = None
        self.w1: Morphism | None = None
        self.w2: Morphism | None = None
        self.w3: Morphism | None = None
        self._p2: "PathStructure | None" = None
        self._g2: Morphism | None = None
        self._g4: Morphism | None = None

    # populated by the builder:
    xx: Context
    pi: Telescope
    total: Context
    r: Morphism
    sym_mor: Morphism
    trans_mor: Morphism
    trans_dom: Fibration

    @property
    def relfib(self) -> Fibration:
        return Fibration(self.xx, self.pi)

    def sigma(self) -> Morphism:
        n, g = self.n, self.g
        ln = len(self.total)
        return Morphism(self.total, self.fib.total, vseg(ln, 0, g) + vseg(ln, g, n))

    def tau(self) -> Morphism:
        n, g = self.n, self.g
        ln = len(self.total)
        return Morphism(self.total, self.fib.total, vseg(ln, 0, g) + vseg(ln, g + n, n))

    # equivalence-relation combinators ------------------------------------

    def refl_w(self, m: Morphism) -> Morphism:
        return compose(self.r, m)

    def flip_w(self, w: Morphism) -> Morphism:
        return self.dc.intern_mor("sw", compose(self.sym_mor, w))

    def comp_w(self, w1: Morphism, w2: Morphism) -> Morphism:
        g, n = self.g, self.n
        med = Morphism(w1.src, self.trans_dom.total, w1.spine + w2.spine[g + n :])
        return self.dc.intern_mor("tw", compose(self.trans_mor, med))

    def xx_pair(self, m: Morphism, n_mor: Morphism) -> Morphism:
        """Pair two maps into the same fibre as a map into the endpoint base."""
        g, n = self.g, self.n
        return Morphism(m.src, self.xx, m.spine + n_mor.spine[g:])

    def witness_endpoints(self, w: Morphism) -> tuple[Morphism, Morphism]:
        return compose(self.sigma(), w), compose(self.tau(), w)


def transport_apply(td: TransportData, y: Morphism, x1_t, path_t) -> Morphism:
    med = Morphism(y.src, td.dom.total, y.spine + (x1_t, path_t))
    return compose(td.gamma, med)


def _intern_fill(dc: "DerivationContext", d: Morphism, h: Morphism):
    return dc.intern_mor("fd", d), dc.intern_mor("fh", h)


# ---------------------------------------------------------------------------
# Derivation context
# ---------------------------------------------------------------------------


class DerivationContext:
    """Shared signature plus memoised path structures and certificates.

    Emitted eliminators are interned as checked definitions in a private
    namespace; downstream work then carries small constant spines and the
    kernel unfolds them lazily during comparisons.
    """

    def __init__(self, sig: Signature):
        self.sig = sig
        self._structures: dict[Fibration, PathStructure] = {}
        self._fresh = 0
        self._certs: dict[Morphism, WeqCert] = {}
        self._relations: dict[Fibration, tuple] = {}

    def register_cert(self, cert: WeqCert) -> WeqCert:
        self._certs[cert.g] = cert
        return cert

    def registered_cert(self, m: Morphism) -> WeqCert | None:
        return self._certs.get(m)

    def register_relation(self, rel: Fibration, tag: tuple) -> None:
        self._relations.setdefault(rel, tag)

    def relation_tag(self, rel: Fibration):
        return self._relations.get(rel)

    def intern(self, hint: str, ctx: Context, term, size_limit: int = 24):
        # constant heads applied to variables are already as small as the
        # context allows; wrapping them again would only pile up layers
        if isinstance(term, Var) or (
            isinstance(term, Con) and all(isinstance(a, Var) for a in term.args)
        ):
            return term
        if _term_size(term, size_limit) <= size_limit:
            return term
        from .. import checker as ck

        ty = ck.infer(self.sig, ctx, term)
        self._fresh += 1
        name = f"_{hint}{self._fresh}"
        from ..syntax import DefDecl

        self.sig = self.sig.declare(DefDecl(name, ctx, ty, term))
        return Con(name, id_spine(len(ctx)))

    def intern_mor(self, hint: str, m: Morphism, size_limit: int = 24) -> Morphism:
        """Replace oversized spine components by definitions.

        Keeps composition chains shallow: every emitted morphism carries
        constant-headed components whose arguments are variables or other
        interned constants.
        """
        if all(_term_size(c, size_limit) <= size_limit for c in m.spine):
            return m
        spine = tuple(self.intern(hint, m.src, c, size_limit) for c in m.spine)
        return Morphism(m.src, m.dst, spine)

    # -- structures --------------------------------------------------------

    def path_structure(self, fib: Fibration) -> PathStructure:
        ps = self._structures.get(fib)
        if ps is None:
            ps = self._build_structure(fib)
            self._structures[fib] = ps
        return ps

    def _build_structure(self, fib: Fibration) -> PathStructure:
        if fib.rank == 0:
            return self._build_rank0(fib)
        if fib.rank == 1:
            return self._build_rank1(fib)
        return self._build_rankn(fib)

    def _build_rank0(self, fib: Fibration) -> PathStructure:
        ps = PathStructure(self, fib)
        base = fib.base
        ps.xx = base
        ps.pi = Telescope()
        ps.total = base
        ps.r = identity(base)
        ps.sym_mor = identity(base)
        ps.trans_dom = Fibration(base, Telescope())
        ps.trans_mor = identity(base)
        return ps

    def _build_rank1(self, fib: Fibration) -> PathStructure:
        ps = PathStructure(self, fib)
        g = len(fib.base)
        cell = fib.ext[0]
        a = cell.ty
        nm = cell.name
        ps.xx = fib.base.extend(nm + "0", a).extend(nm + "1", weaken(a, 1))
        ps.pi = Telescope.of((("u"), IdT(weaken(a, 2), Var(1), Var(0))))
        ps.total = ps.xx + ps.pi
        ln = g + 1
        ps.r = Morphism(
            fib.total,
            ps.total,
            var_spine(ln, 0, g) + (Var(0), Var(0), Refl(weaken(a, 1), Var(0))),
        )
        lt = g + 3
        ps.sym_mor = Morphism(
            ps.total,
            ps.total,
            vseg(lt, 0, g)
            + (Var(1), Var(2), sym_j(weaken(a, 3), Var(2), Var(1), Var(0))),
        )
        ps.trans_dom = self._generic_trans_dom(ps)
        l2 = g + 5
        ps.trans_mor = Morphism(
            ps.trans_dom.total,
            ps.total,
            vseg(l2, 0, g)
            + (
                Var(4),
                Var(1),
                trans_j(weaken(a, 5), Var(3), Var(1), Var(0), Var(4), Var(2)),
            ),
        )
        return ps

    def _generic_trans_dom(self, ps: PathStructure) -> Fibration:
        g, n = ps.g, ps.n
        theta = ps.fib.ext
        xi2 = weaken_tele(theta, 3 * n)
        chi_len = g + 4 * n
        chi = (
            vseg(chi_len, 0, g)
            + vseg(chi_len, g + n, n)
            + vseg(chi_len, g + 3 * n, n)
        )
        pi2 = subst_tele(ps.pi, chi)
        return Fibration(ps.total, xi2 + pi2)

    # -- rank >= 2 ----------------------------------------------------------

    def _build_rankn(self, fib: Fibration) -> PathStructure:
        ps = PathStructure(self, fib)
        xcell = fib.ext[0]
        ps.x1 = Fibration(fib.base, Telescope((xcell,)))
        ps.pa = self.path_structure(ps.x1)
        ps.split_q = Fibration(ps.x1.total, Telescope(fib.ext.cells[1:]))
        ps.inner = self.path_structure(ps.split_q)
        ps.transport = self.split_transport(ps)
        self._assemble_rankn(ps)
        return ps

    def split_transport(self, ps: PathStructure) -> TransportData:
        """Transport of the remainder along paths in the first cell."""
        return self.split_transport_for(ps.split_q)

    def split_transport_for(self, fib: Fibration) -> TransportData:
        """Transport of `fib` along paths in the last cell of its base."""
        g = len(fib.base) - 1
        cert = self.cert_recurring(fib)
        y = fib.total
        w_ctx = cert.g.dst
        lw = len(w_ctx)
        tp2 = Morphism(w_ctx, fib.base, vseg(lw, 0, g) + (Var(1),))
        gamma, coherence = self.fill(cert, fib, identity(y), tp2)
        return TransportData(
            dom=Fibration(y, Telescope(w_ctx.cells[len(y) :])),
            gamma=gamma,
            coherence=coherence,
        )

    def alt_structure(self, fib: Fibration) -> PathStructure:
        """A second path structure from a double-transport derivation."""
        base_ps = self.path_structure(fib)
        if base_ps.n < 2:
            raise DeriveError("alternate transports need at least two cells")
        ps2 = PathStructure(self, fib)
        ps2.x1 = base_ps.x1
        ps2.pa = base_ps.pa
        ps2.split_q = base_ps.split_q
        ps2.inner = base_ps.inner
        ps2.transport = self.alt_transport(base_ps)
        self._assemble_rankn(ps2)
        return ps2

    def alt_transport(self, ps: PathStructure) -> TransportData:
        """Transport twice, the second time along a reflexivity path."""
        td = ps.transport
        g, n = ps.g, ps.n
        a = ps.x1.ext[0].ty
        ld = len(td.dom.total)
        gamma2 = self.intern_mor(
            "g2",
            transport_apply(td, td.gamma, Var(1), Refl(weaken(a, ld - g), Var(1))),
        )
        inner = ps.inner
        y = ps.fib.total
        ly = len(y)
        pair_w1 = Morphism(
            y,
            ps.w1.src,
            td.coherence.spine + (Var(n - 1), Refl(weaken(a, n), Var(n - 1))),
        )
        link1 = compose(ps.w1, pair_w1)
        coherence2 = inner.comp_w(link1, td.coherence)
        return TransportData(dom=td.dom, gamma=gamma2, coherence=coherence2)

    def _assemble_rankn(self, ps: PathStructure) -> None:
        fib = ps.fib
        g, n = ps.g, ps.n
        m = n - 1
        xcell = fib.ext[0]
        a = xcell.ty
        gamma = ps.transport.gamma
        coherence = ps.transport.coherence

        # canonical total context [base, copy0, copy1, paths]
        theta = fib.ext
        ps.xx = fib.base + theta + weaken_tele(theta, n)
        l1 = g + 2 * n + 1
        alpha_cell = TeleCell(
            xcell.name + "p", IdT(weaken(a, 2 * n), Var(2 * n - 1), Var(n - 1))
        )
        rho = (
            vseg(l1, 0, g)
            + (vat(l1, g),)
            + vseg(l1, g + 1, m)
            + (vat(l1, g + n), vat(l1, g + 2 * n))
        )
        trans_tail = tuple(subst(c, rho) for c in gamma.spine[g + 1 :])
        psi = (
            vseg(l1, 0, g)
            + (vat(l1, g + n),)
            + trans_tail
            + vseg(l1, g + n + 1, m)
        )
        pi_rest = subst_tele(ps.inner.pi, psi)
        ps.pi = Telescope((alpha_cell,) + pi_rest.cells)
        ps.total = ps.xx + ps.pi

        y = fib.total
        ly = len(y)
        ps.r = Morphism(
            y,
            ps.total,
            id_spine(ly)
            + id_spine(ly)[g:]
            + (Refl(weaken(a, n), Var(n - 1)),)
            + coherence.spine[len(coherence.spine) - len(ps.inner.pi) :],
        )
        ps.trans_dom = self._generic_trans_dom(ps)

        self._build_w_lemmas(ps)
        self._build_recipes(ps)

    # -- lemma witnesses against the inner relation ------------------------

    def _build_w_lemmas(self, ps: PathStructure) -> None:
        g, n = ps.g, ps.n
        m = n - 1
        inner = ps.inner
        td = ps.transport
        pa = ps.pa
        a = ps.x1.ext[0].ty

        # W1: transport respects inner-equivalent inputs
        t_total = inner.total
        lt = len(t_total)
        x1cell = TeleCell("x1w", weaken(a, 1 + 3 * m))
        z1 = t_total.extend(x1cell.name, x1cell.ty)
        z1 = z1.extend(
            "alw", IdT(weaken(a, 2 + 3 * m), Var(1 + 3 * m), Var(0))
        )
        lz1 = len(z1)
        pi_t = Morphism(z1, t_total, vseg(lz1, 0, lt))
        y1 = compose(inner.sigma(), pi_t)
        y2 = compose(inner.tau(), pi_t)
        m_mor = transport_apply(td, y1, Var(1), Var(0))
        n_mor = transport_apply(td, y2, Var(1), Var(0))
        bottom = inner.xx_pair(m_mor, n_mor)
        k1 = compose(td.coherence, inner.sigma())
        k2 = identity(t_total)
        k3 = inner.flip_w(compose(td.coherence, inner.tau()))
        k_top = inner.comp_w(inner.comp_w(k1, k2), k3)
        cert1 = self.cert_recurring(
            Fibration(ps.x1.total, Telescope(t_total.cells[g + 1 :]))
        )
        ps.w1, _ = self.fill(cert1, inner.relfib, k_top, bottom)

        # W3: transport respects paths between paths
        w_ctx = td.dom.total  # [base, x0, theta', x1, alpha]
        lw = len(w_ctx)
        p2a_fib = Fibration(pa.xx, pa.pi)
        p2a = self.path_structure(p2a_fib)
        theta_r = Telescope(ps.fib.ext.cells[1:])
        cert0 = self.cert_r(p2a_fib)
        ext_over_u0 = weaken_tele(theta_r, 4)
        cert_p = self.cert_pullback(cert0, ext_over_u0)
        # reorder [base,x0,x1,u0,u1,w,theta'] -> [base,x0,theta',x1,u0,u1,w]
        u1_ctx = cert_p.g.dst
        order_u = (
            list(range(g + 1))
            + list(range(g + 5, g + 5 + m))
            + [g + 1, g + 2, g + 3, g + 4]
        )
        z3, u1_to_z3, z3_to_u1 = permute_context(u1_ctx, order_u)
        v1_ctx = cert_p.g.src
        order_v = (
            list(range(g + 1))
            + list(range(g + 3, g + 3 + m))
            + [g + 1, g + 2]
        )
        wre, v1_to_w, w_to_v1 = permute_context(v1_ctx, order_v)
        g3 = compose(u1_to_z3, compose(cert_p.g, w_to_v1))
        cert3 = cert_conjugate(cert_p, g3, z3_to_u1, u1_to_z3, w_to_v1, v1_to_w)
        lz3 = len(z3)
        y_part = Morphism(
            z3,
            ps.split_q.total,
            vseg(lz3, 0, g + 1) + vseg(lz3, g + 1, m),
        )
        m3 = transport_apply(td, y_part, vat(lz3, g + 1 + m), vat(lz3, g + 2 + m))
        n3 = transport_apply(td, y_part, vat(lz3, g + 1 + m), vat(lz3, g + 3 + m))
        bottom3 = inner.xx_pair(m3, n3)
        top3 = inner.refl_w(td.gamma)
        ps.w3, _ = self.fill(cert3, inner.relfib, top3, bottom3)

        # W2: transport along a composite is iterated transport
        z2 = w_ctx.extend("x2w", weaken(a, 3 + m))
        z2 = z2.extend("btw", IdT(weaken(a, 4 + m), Var(2), Var(0)))
        lz2 = len(z2)
        # certificate: reorder w_ctx moving x1 to the front
        order_w = list(range(g)) + [g + 1 + m] + list(range(g, g + 1 + m)) + [g + 2 + m]
        wre2, w_to_re, re_to_w = permute_context(w_ctx, order_w)
        cert_rec2 = self.cert_recurring(
            Fibration(
                Telescope(wre2.cells[: g + 1]), Telescope(wre2.cells[g + 1 :])
            )
        )
        u2_ctx = cert_rec2.g.dst  # [wre2, x2, beta]
        order_u2 = (
            list(range(g))
            + list(range(g + 1, g + 2 + m))
            + [g]
            + [g + 2 + m, g + 3 + m, g + 4 + m]
        )
        z2c, u2_to_z2c, z2c_to_u2 = permute_context(u2_ctx, order_u2)
        assert z2c == z2, "stage mismatch in composite-transport lemma"
        g2m = compose(u2_to_z2c, compose(cert_rec2.g, w_to_re))
        cert2 = cert_conjugate(cert_rec2, g2m, z2c_to_u2, u2_to_z2c, w_to_re, re_to_w)
        pth_w = Morphism(
            w_ctx,
            pa.total,
            vseg(lw, 0, g) + (vat(lw, g), vat(lw, g + 1 + m), vat(lw, g + 2 + m)),
        )
        g2pth = compose(self.groupoid_unit(pa), pth_w)
        m3p = Morphism(
            w_ctx,
            z3,
            vseg(lw, 0, g + 1 + m) + (vat(lw, g + 1 + m),) + g2pth.spine[-3:],
        )
        k_top2 = inner.comp_w(
            compose(ps.w3, m3p), inner.flip_w(compose(td.coherence, td.gamma))
        )
        y_part2 = Morphism(
            z2, ps.split_q.total, vseg(lz2, 0, g + 1) + vseg(lz2, g + 1, m)
        )
        pth6 = Morphism(
            z2,
            pa.trans_dom.total,
            vseg(lz2, 0, g)
            + (
                vat(lz2, g),
                vat(lz2, g + 1 + m),
                vat(lz2, g + 2 + m),
                vat(lz2, g + 3 + m),
                vat(lz2, g + 4 + m),
            ),
        )
        mu_ab = compose(pa.trans_mor, pth6).spine[-1]
        m2 = transport_apply(td, y_part2, vat(lz2, g + 3 + m), mu_ab)
        first = transport_apply(td, y_part2, vat(lz2, g + 1 + m), vat(lz2, g + 2 + m))
        n2 = transport_apply(td, first, vat(lz2, g + 3 + m), vat(lz2, g + 4 + m))
        bottom2 = inner.xx_pair(m2, n2)
        ps.w2, _ = self.fill(cert2, inner.relfib, k_top2, bottom2)

    # -- symmetry and transitivity recipes ---------------------------------

    def _t_of_stage(self, ps: PathStructure, src: Context, x0, th0, x1, al, th1, pi) -> Morphism:
        """Inner element of a stage carrying PY-like components.

        Positions index cells of `src`; the source slot is th0 transported
        along al, matching the layout of the path telescope.
        """
        inner = ps.inner
        td = ps.transport
        g, m = ps.g, ps.n - 1
        ls = len(src)
        y_route = Morphism(
            src,
            ps.split_q.total,
            vseg(ls, 0, g) + (vat(ls, x0),) + vseg(ls, th0, m),
        )
        transported = transport_apply(td, y_route, vat(ls, x1), vat(ls, al))
        spine = (
            vseg(ls, 0, g)
            + (vat(ls, x1),)
            + transported.spine[g + 1 :]
            + vseg(ls, th1, m)
            + vseg(ls, pi, m)
        )
        return Morphism(src, inner.total, spine)

    def _build_recipes(self, ps: PathStructure) -> None:
        g, n = ps.g, ps.n
        m = n - 1
        inner = ps.inner
        pa = ps.pa
        td = ps.transport
        py = ps.total
        lp = len(py)

        # cell positions in the total context
        p_x0, p_th0 = g, g + 1
        p_x1, p_th1 = g + n, g + n + 1
        p_al, p_pi = g + 2 * n, g + 2 * n + 1

        pth = Morphism(
            py, pa.total, vseg(lp, 0, g) + (vat(lp, p_x0), vat(lp, p_x1), vat(lp, p_al))
        )
        sigma_alpha = compose(pa.sym_mor, pth).spine[-1]
        t_mor = self._t_of_stage(ps, py, p_x0, p_th0, p_x1, p_al, p_th1, p_pi)

        # symmetry
        link1 = compose(
            ps.w1,
            Morphism(
                py,
                ps.w1.src,
                inner.flip_w(t_mor).spine + (vat(lp, p_x0), sigma_alpha),
            ),
        )
        m2s = Morphism(
            py,
            ps.w2.src,
            vseg(lp, 0, g + 1)
            + vseg(lp, p_th0, m)
            + (vat(lp, p_x1), vat(lp, p_al), vat(lp, p_x0), sigma_alpha),
        )
        link2 = inner.flip_w(compose(ps.w2, m2s))
        g4pth = compose(self.groupoid_inverse(pa), pth)
        m3s = Morphism(
            py,
            ps.w3.src,
            vseg(lp, 0, g + 1) + vseg(lp, p_th0, m) + (vat(lp, p_x0),) + g4pth.spine[-3:],
        )
        link3 = compose(ps.w3, m3s)
        link4 = compose(td.coherence, ps.sigma())
        t1 = inner.comp_w(inner.comp_w(inner.comp_w(link1, link2), link3), link4)
        ps.sym_mor = Morphism(
            py,
            py,
            vseg(lp, 0, g)
            + vseg(lp, p_x1, n)
            + vseg(lp, p_x0, n)
            + (sigma_alpha,)
            + t1.spine[len(t1.spine) - m :],
        )

        # transitivity
        p2 = ps.trans_dom.total
        l2 = len(p2)
        q_x2, q_bt = g + 3 * n, g + 4 * n
        pth2 = Morphism(
            p2,
            pa.trans_dom.total,
            vseg(l2, 0, g)
            + (
                vat(l2, p_x0),
                vat(l2, p_x1),
                vat(l2, p_al),
                vat(l2, q_x2),
                vat(l2, q_bt),
            ),
        )
        mu_ab = compose(pa.trans_mor, pth2).spine[-1]
        m2t = Morphism(
            p2,
            ps.w2.src,
            vseg(l2, 0, g + 1)
            + vseg(l2, p_th0, m)
            + (vat(l2, p_x1), vat(l2, p_al), vat(l2, q_x2), vat(l2, q_bt)),
        )
        l1 = compose(ps.w2, m2t)
        t_first = self._t_of_stage(ps, p2, p_x0, p_th0, p_x1, p_al, p_th1, p_pi)
        m1t = Morphism(p2, ps.w1.src, t_first.spine + (vat(l2, q_x2), vat(l2, q_bt)))
        l2w = compose(ps.w1, m1t)
        l3 = self._t_of_stage(ps, p2, p_x1, p_th1, q_x2, q_bt, q_x2 + 1, q_bt + 1)
        t2 = inner.comp_w(inner.comp_w(l1, l2w), l3)
        ps.trans_mor = Morphism(
            p2,
            py,
            vseg(l2, 0, g)
            + vseg(l2, p_x0, n)
            + vseg(l2, q_x2, n)
            + (mu_ab,)
            + t2.spine[len(t2.spine) - m :],
        )

    # -- groupoid helpers for rank-1 structures -----------------------------

    def p2_structure(self, ps: PathStructure) -> PathStructure:
        if ps._p2 is None:
            ps._p2 = self.path_structure(Fibration(ps.xx, ps.pi))
        return ps._p2

    def groupoid_unit(self, ps: PathStructure) -> Morphism:
        """Homotopy from composing with a reflexivity path to the identity."""
        if ps._g2 is not None:
            return ps._g2
        if ps.n != 1:
            raise DeriveError("groupoid helpers are built on one-cell structures")
        g = ps.g
        a = ps.fib.ext[0].ty
        p2a = self.p2_structure(ps)
        lt = g + 3
        ty3 = weaken(a, 3)
        mu_refl = trans_j(
            ty3, Var(1), Var(1), Refl(ty3, Var(1)), Var(2), Var(0)
        )
        h_mu = trans_h(ty3, Var(1), Var(2), Var(0))
        ps._g2 = Morphism(
            ps.total,
            p2a.total,
            vseg(lt, 0, g) + (Var(2), Var(1), mu_refl, Var(0), h_mu),
        )
        return ps._g2

    def groupoid_inverse(self, ps: PathStructure) -> Morphism:
        """Homotopy from composing a path with its reversal to reflexivity."""
        if ps._g4 is not None:
            return ps._g4
        if ps.n != 1:
            raise DeriveError("groupoid helpers are built on one-cell structures")
        g = ps.g
        a = ps.fib.ext[0].ty
        p2a = self.p2_structure(ps)
        actx = ps.fib.total
        la = g + 1
        a1 = weaken(a, 1)
        refl0 = Refl(a1, Var(0))
        sr = sym_j(a1, Var(0), Var(0), refl0)
        h_sigma = sym_h(a1, Var(0))
        id_a = IdT(weaken(a1, 1), Var(1), Var(1))
        # body over [actx, v]: compose refl with v
        a2 = weaken(a, 2)
        body = trans_j(a2, Var(1), Var(1), Var(0), Var(1), Refl(a2, Var(1)))
        idty = IdT(a1, Var(0), Var(0))
        pp1 = ap_j(idty, sr, refl0, h_sigma, body, idty)
        pp2 = trans_h(a1, Var(0), Var(0), refl0)
        mu_r_sr = trans_j(a1, Var(0), Var(0), sr, Var(0), refl0)
        mu_r_r = trans_j(a1, Var(0), Var(0), refl0, Var(0), refl0)
        el1 = Morphism(
            actx,
            p2a.total,
            var_spine(la, 0, g) + (Var(0), Var(0), mu_r_sr, mu_r_r, pp1),
        )
        el2 = Morphism(
            actx,
            p2a.total,
            var_spine(la, 0, g) + (Var(0), Var(0), mu_r_r, refl0, pp2),
        )
        chain = p2a.comp_w(el1, el2)
        lt = g + 3
        ty3 = weaken(a, 3)
        sigma_u = sym_j(ty3, Var(2), Var(1), Var(0))
        mu_u_sigma = trans_j(ty3, Var(1), Var(2), sigma_u, Var(2), Var(0))
        bottom = Morphism(
            ps.total,
            p2a.xx,
            vseg(lt, 0, g) + (Var(2), Var(2), mu_u_sigma, Refl(ty3, Var(2))),
        )
        cert = self.cert_r(ps.fib)
        ps._g4, _ = self.fill(cert, p2a.relfib, chain, bottom)
        return ps._g4

    # -- certificates --------------------------------------------------------

    def cert_r(self, fib: Fibration) -> WeqCert:
        if fib.rank != 1:
            raise DeriveError("reflexivity certificates live on one-cell fibrations")
        ps = self.path_structure(fib)
        u = ps.total
        v = fib.total
        return WeqCert(
            g=ps.r,
            base=fib.base,
            ty=fib.ext[0].ty,
            delta=Telescope(),
            u_fwd=identity(u),
            u_bwd=identity(u),
            v_fwd=identity(v),
            v_bwd=identity(v),
        )

    def cert_pullback(self, cert: WeqCert, ext: Telescope) -> WeqCert:
        """Pull a certified map back along the projection adding `ext`."""
        k2 = len(ext)
        u2 = cert.g.dst + ext
        v_ext = subst_tele(ext, cert.g.spine)
        v2 = cert.g.src + v_ext
        lv2 = len(v2)
        g2 = Morphism(
            v2,
            u2,
            tuple(weaken(c, k2) for c in cert.g.spine) + vseg(lv2, len(cert.g.src), k2),
        )
        ext_c = subst_tele(ext, cert.u_bwd.spine)
        delta2 = cert.delta + ext_c
        cert2 = WeqCert(
            g=g2,
            base=cert.base,
            ty=cert.ty,
            delta=delta2,
            u_fwd=Morphism(
                u2,
                cert.base + id_triple(cert.ty) + delta2,
                tuple(weaken(c, k2) for c in cert.u_fwd.spine)
                + vseg(len(u2), len(cert.g.dst), k2),
            ),
            u_bwd=Morphism(
                cert.base + id_triple(cert.ty) + delta2,
                u2,
                tuple(weaken(c, k2) for c in cert.u_bwd.spine)
                + vseg(len(u2), len(cert.g.dst), k2),
            ),
            v_fwd=Morphism(
                v2,
                branch_context(cert.base, cert.ty, delta2),
                tuple(weaken(c, k2) for c in cert.v_fwd.spine)
                + vseg(len(v2), len(cert.g.src), k2),
            ),
            v_bwd=Morphism(
                branch_context(cert.base, cert.ty, delta2),
                v2,
                tuple(weaken(c, k2) for c in cert.v_bwd.spine)
                + vseg(len(v2), len(cert.g.src), k2),
            ),
        )
        return cert2

    def cert_recurring(self, fib: Fibration) -> WeqCert:
        """Certificate for (1, refl . proj): total -> total x_base paths.

        `fib` is a projection to a base whose last cell carries the paths.
        """
        if len(fib.base) == 0:
            raise DeriveError("recurring certificate needs a one-cell split in the base")
        gamma_ctx = Telescope(fib.base.cells[:-1])
        gg = len(gamma_ctx)
        xcell = fib.base.cells[-1]
        a = xcell.ty
        mth = fib.rank
        v = fib.total
        lv = len(v)
        u = v.extend(xcell.name + "1", weaken(a, 1 + mth)).extend(
            xcell.name + "p",
            IdT(weaken(a, 2 + mth), Var(1 + mth), Var(0)),
        )
        gmor = Morphism(
            v,
            u,
            id_spine(lv) + (Var(mth), Refl(weaken(a, 1 + mth), Var(mth))),
        )
        delta = weaken_tele(fib.ext, 2)
        # reorder [gamma, x, theta, x1, p] -> [gamma, x, x1, p, theta]
        order = (
            list(range(gg + 1))
            + [gg + 1 + mth, gg + 2 + mth]
            + list(range(gg + 1, gg + 1 + mth))
        )
        ucanon, u_fwd, u_bwd = permute_context(u, order)
        expected = gamma_ctx + id_triple(a, (xcell.name, xcell.name + "1", xcell.name + "p")) + delta
        if ucanon != expected:
            raise DeriveError("recurring certificate context mismatch")
        return WeqCert(
            g=gmor,
            base=gamma_ctx,
            ty=a,
            delta=delta,
            u_fwd=u_fwd,
            u_bwd=u_bwd,
            v_fwd=identity(v),
            v_bwd=identity(v),
        )

    # -- the master fill ------------------------------------------------------

    def fill(
        self,
        cert: WeqCert,
        rfib: Fibration,
        top: Morphism,
        bottom: Morphism,
    ) -> tuple[Morphism, Morphism]:
        """Solve the lifting problem `rfib.projection . top = bottom . cert.g`.

        Returns (d, h) with d : U -> rfib.total, proj . d = bottom, and h a
        fibrewise homotopy into the path structure of rfib with endpoints
        d . g and top.
        """
        n = rfib.rank
        if n == 0:
            return bottom, top
        if n == 1:
            return self._fill_rank1(cert, rfib, top, bottom)
        return self._fill_rankn(cert, rfib, top, bottom)

    def _fill_rank1(self, cert, rfib, top, bottom):
        gg = len(cert.base)
        k = len(cert.delta)
        a = cert.ty
        ucanon = cert.u_canon
        vcanon = cert.v_canon
        l_hat = compose(bottom, cert.u_bwd)
        k_hat = compose(top, cert.v_bwd)
        xi = rfib.ext[0].ty
        c_t = subst(xi, l_hat.spine)
        b_t = k_hat.spine[-1]
        delta = cert.delta

        def shifted_delta(by, at3):
            return Telescope(
                tuple(
                    TeleCell(c.name, weaken(c.ty, by, at=at3 + i))
                    for i, c in enumerate(delta.cells)
                )
            )

        names = ("x", "y", "u")
        j_main = Jnode(
            weaken(a, 3 + k),
            names,
            shifted_delta(3 + k, 3),
            weaken(c_t, 3 + k, at=3 + k),
            weaken(b_t, 3 + k, at=1 + k),
            Var(2 + k),
            Var(1 + k),
            Var(k),
            vseg(len(ucanon), len(ucanon) - k, k),
        )
        j_main = self.intern("j", ucanon, j_main)
        d_hat = Morphism(ucanon, rfib.total, l_hat.spine + (j_main,))
        refl_x = Refl(weaken(a, 1 + k), Var(k))
        spine_v = vseg(len(vcanon), len(vcanon) - k, k)
        # the first endpoint is the filler restricted along the canonical map,
        # so the upper homotopy's source agrees with d . g on the nose
        j_refl = subst(j_main, cert.canonical_g().spine)
        h_term = Hnode(
            weaken(a, 1 + k),
            names,
            shifted_delta(1 + k, 3),
            weaken(c_t, 1 + k, at=3 + k),
            weaken(b_t, 1 + k, at=1 + k),
            Var(k),
            spine_v,
        )
        h_term = self.intern("h", vcanon, h_term)
        ps = self.path_structure(rfib)
        h_hat = Morphism(
            vcanon,
            ps.total,
            k_hat.spine[:-1] + (j_refl, b_t, h_term),
        )
        d = compose(d_hat, cert.u_fwd)
        h = compose(h_hat, cert.v_fwd)
        return _intern_fill(self, d, h)

    def _fill_rankn(self, cert, rfib, top, bottom):
        ps = self.path_structure(rfib)
        g, n = ps.g, ps.n
        q = ps.split_q
        pa = ps.pa
        inner = ps.inner
        td = ps.transport
        top1 = compose(q.projection(), top)
        e, k_tilde = self.fill(cert, ps.x1, top1, bottom)
        k_rev = self.intern_mor("kr", compose(pa.sym_mor, k_tilde))
        med = Morphism(top.src, td.dom.total, top.spine + k_rev.spine[-2:])
        kp = self.intern_mor("kp", compose(td.gamma, med))
        d, h1 = self.fill(cert, q, kp, e)
        dg = self.intern_mor("dg", compose(d, cert.g))
        flip_h1 = inner.flip_w(h1)
        mcount = len(inner.pi)
        l_mor = Morphism(
            top.src,
            ps.total,
            top.spine
            + dg.spine[g:]
            + (k_rev.spine[-1],)
            + flip_h1.spine[len(flip_h1.spine) - mcount :],
        )
        h = compose(ps.sym_mor, l_mor)
        return _intern_fill(self, d, h)
