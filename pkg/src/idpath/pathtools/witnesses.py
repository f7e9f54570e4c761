"""Witness bundles: constructions packaged with kernel-checkable equations.

Every bundle is verified on construction through `recheck`, which uses only
the checker and definitional equality; operations never hand out a bundle
whose equations have not been re-derived by the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import cat
from ..cat import Fibration, Morphism, compose, identity
from ..syntax import Signature, Telescope, Var


class WitnessError(Exception):
    pass


def _eq(sig, label, lhs, rhs, failures):
    if not cat.morphism_eq(sig, lhs, rhs):
        failures.append(label)


@dataclass(frozen=True)
class PathObject:
    """Factorisation of a fibrewise diagonal through a relation fibration."""

    fib: Fibration  # x : X -> I
    rel: Fibration  # (s,t) : P -> X x_I X, canonical projection
    r: Morphism  # X -> P

    def source(self) -> Morphism:
        g, n = len(self.fib.base), self.fib.rank
        ln = len(self.rel.total)
        return Morphism(
            self.rel.total,
            self.fib.total,
            tuple(Var(ln - 1 - p) for p in range(g)) + tuple(Var(ln - 1 - p) for p in range(g, g + n)),
        )

    def target(self) -> Morphism:
        g, n = len(self.fib.base), self.fib.rank
        ln = len(self.rel.total)
        return Morphism(
            self.rel.total,
            self.fib.total,
            tuple(Var(ln - 1 - p) for p in range(g)) + tuple(Var(ln - 1 - p) for p in range(g + n, g + 2 * n)),
        )

    def recheck(self, sig: Signature) -> list[str]:
        failures: list[str] = []
        try:
            from .. import checker as ck

            ck.check_telescope(sig, Telescope(), self.rel.total)
            cat.check_morphism(sig, self.r)
        except Exception as e:  # noqa: BLE001 - surfaced as a failure label
            failures.append(f"typing: {e}")
            return failures
        total = self.fib.total
        diag = Morphism(
            total,
            self.rel.base,
            identity(total).spine + identity(total).spine[len(self.fib.base) :],
        )
        _eq(sig, "r lands on the diagonal", compose(self.rel.projection(), self.r), diag, failures)
        return failures


@dataclass(frozen=True)
class Homotopy:
    """Two parallel maps plus a path-object morphism relating them."""

    fib: Fibration  # the fibration whose path structure is used
    rel: Fibration  # its relation fibration (s,t) : P -> X x_I X
    f: Morphism
    g: Morphism
    h: Morphism

    def recheck(self, sig: Signature) -> list[str]:
        failures: list[str] = []
        try:
            cat.check_morphism(sig, self.h)
        except Exception as e:  # noqa: BLE001
            failures.append(f"typing: {e}")
            return failures
        gl, n = len(self.fib.base), self.fib.rank
        proj = compose(self.rel.projection(), self.h)
        f_part = Morphism(self.h.src, self.fib.total, proj.spine[: gl + n])
        g_part = Morphism(
            self.h.src, self.fib.total, proj.spine[:gl] + proj.spine[gl + n :]
        )
        _eq(sig, "source endpoint", f_part, self.f, failures)
        _eq(sig, "target endpoint", g_part, self.g, failures)
        return failures


def make_homotopy(
    sig: Signature, fib: Fibration, rel: Fibration, f: Morphism, g: Morphism, h: Morphism
) -> Homotopy:
    w = Homotopy(fib=fib, rel=rel, f=f, g=g, h=h)
    failures = w.recheck(sig)
    if failures:
        raise WitnessError("homotopy witness failed re-check: " + "; ".join(failures))
    return w


@dataclass(frozen=True)
class TransportWitness:
    """Transport of a fibration along paths in its base, with coherence."""

    fib: Fibration  # f : Y -> X
    dom: Fibration  # Y x_X PX as a fibration over Y
    gamma: Morphism  # dom.total -> Y
    coherence: Homotopy  # gamma(1, refl . f) ~ identity, fibrewise

    def recheck(self, sig: Signature) -> list[str]:
        failures: list[str] = []
        try:
            cat.check_morphism(sig, self.gamma)
        except Exception as e:  # noqa: BLE001
            failures.append(f"typing: {e}")
            return failures
        ld = len(self.dom.total)
        lhs = compose(self.fib.projection(), self.gamma)
        rhs = Morphism(
            self.dom.total,
            self.fib.base,
            tuple(Var(ld - 1 - p) for p in range(len(self.fib.base) - 1)) + (Var(1),),
        )
        _eq(sig, "transport lands over the path target", lhs, rhs, failures)
        failures += [f"coherence: {x}" for x in self.coherence.recheck(sig)]
        return failures


@dataclass(frozen=True)
class EquivRelWitness:
    """Relation fibration with reflexivity, symmetry and transitivity maps."""

    fib: Fibration  # x : X -> I
    rel: Fibration  # tau : R -> X x_I X
    rho: Morphism  # X -> R
    sym: Morphism  # R -> R
    trans: Morphism  # R x_X R -> R
    trans_dom: Fibration

    def recheck(self, sig: Signature) -> list[str]:
        failures: list[str] = []
        try:
            cat.check_morphism(sig, self.rho)
            cat.check_morphism(sig, self.sym)
            cat.check_morphism(sig, self.trans)
        except Exception as e:  # noqa: BLE001
            failures.append(f"typing: {e}")
            return failures
        g = len(self.fib.base)
        n = self.fib.rank
        proj = self.rel.projection()
        total = self.fib.total
        diag = Morphism(
            total, self.rel.base, identity(total).spine + identity(total).spine[g:]
        )
        _eq(sig, "reflexivity over the diagonal", compose(proj, self.rho), diag, failures)
        lr = len(self.rel.total)
        sigma = Morphism(
            self.rel.total, total,
            tuple(Var(lr - 1 - p) for p in range(g)) + tuple(Var(lr - 1 - p) for p in range(g, g + n)),
        )
        tau = Morphism(
            self.rel.total, total,
            tuple(Var(lr - 1 - p) for p in range(g)) + tuple(Var(lr - 1 - p) for p in range(g + n, g + 2 * n)),
        )
        swapped = Morphism(self.rel.total, self.rel.base, tau.spine + sigma.spine[g:])
        _eq(sig, "symmetry swaps endpoints", compose(proj, self.sym), swapped, failures)
        ld = len(self.trans_dom.total)
        second = len(self.rel.total)
        outer = Morphism(
            self.trans_dom.total,
            self.rel.base,
            tuple(Var(ld - 1 - p) for p in range(0, g + n))
            + tuple(Var(ld - 1 - p) for p in range(second, second + n)),
        )
        _eq(sig, "transitivity relates outer endpoints", compose(proj, self.trans), outer, failures)
        return failures


@dataclass(frozen=True)
class ContractWitness:
    """Sections of a fibration and of its fibrewise path-object projection."""

    fib: Fibration
    rel: Fibration
    section: Morphism  # base -> total
    rel_section: Morphism  # X x_I X -> rel total

    def recheck(self, sig: Signature) -> list[str]:
        failures: list[str] = []
        try:
            cat.check_morphism(sig, self.section)
            cat.check_morphism(sig, self.rel_section)
        except Exception as e:  # noqa: BLE001
            failures.append(f"typing: {e}")
            return failures
        _eq(
            sig,
            "section of the fibration",
            compose(self.fib.projection(), self.section),
            identity(self.fib.base),
            failures,
        )
        _eq(
            sig,
            "section of the path projection",
            compose(self.rel.projection(), self.rel_section),
            identity(self.rel.base),
            failures,
        )
        return failures


def require_clean(witness, sig: Signature):
    failures = witness.recheck(sig)
    if failures:
        raise WitnessError("witness failed re-check: " + "; ".join(failures))
    return witness
