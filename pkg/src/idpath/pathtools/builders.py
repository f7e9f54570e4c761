"""Term-level builders for the standard identity eliminations.

Each builder produces one J or H node relative to an explicit ambient
context; index arithmetic for the binding discipline lives here so the
engine can stay at the level of morphisms.
"""

from __future__ import annotations

from ..syntax import (
    H,
    IdT,
    J,
    Refl,
    Telescope,
    Term,
    TypeExpr,
    Var,
    subst1,
    weaken,
)


def sym_j(ty: TypeExpr, a: Term, b: Term, p: Term) -> Term:
    """Path reversal: an element of Id(ty, b, a) from p : Id(ty, a, b)."""
    return J(
        ty,
        ("x", "y", "u"),
        Telescope(),
        IdT(weaken(ty, 3), Var(1), Var(2)),
        Refl(weaken(ty, 1), Var(0)),
        a,
        b,
        p,
        (),
    )


def sym_h(ty: TypeExpr, a: Term) -> Term:
    """Computation witness: Id(Id(ty,a,a), sym(refl a), refl a)."""
    return H(
        ty,
        ("x", "y", "u"),
        Telescope(),
        IdT(weaken(ty, 3), Var(1), Var(2)),
        Refl(weaken(ty, 1), Var(0)),
        a,
        (),
    )


def _trans_frame(ty: TypeExpr):
    delta = Telescope.of(
        ("x0", weaken(ty, 3)),
        ("u0", IdT(weaken(ty, 4), Var(0), Var(3))),
    )
    motive = IdT(weaken(ty, 5), Var(1), Var(3))
    branch = Var(0)
    return delta, motive, branch


def trans_j(ty: TypeExpr, mid: Term, far: Term, p2: Term, start: Term, p1: Term) -> Term:
    """Path composition via elimination on the second path.

    p1 : Id(ty, start, mid), p2 : Id(ty, mid, far); the extra context
    carries the start point and the first path, giving Id(ty, start, far).
    """
    delta, motive, branch = _trans_frame(ty)
    return J(ty, ("y", "z", "v"), delta, motive, branch, mid, far, p2, (start, p1))


def trans_h(ty: TypeExpr, mid: Term, start: Term, p1: Term) -> Term:
    """Unit law witness: Id(Id(ty,start,mid), trans(p1, refl mid), p1)."""
    delta, motive, branch = _trans_frame(ty)
    return H(ty, ("y", "z", "v"), delta, motive, branch, mid, (start, p1))


def app_body(body: Term, new_cells: int, arg: Term) -> Term:
    """Instantiate `body` (over ctx, z) at `arg` (over ctx extended by new cells)."""
    return subst1(weaken(body, new_cells, at=1), arg)


def ap_j(
    path_ty: TypeExpr,
    a: Term,
    b: Term,
    p: Term,
    body: Term,
    body_ty: TypeExpr,
) -> Term:
    """Congruence: Id(body_ty, body[a], body[b]) from p : Id(path_ty, a, b).

    `body` is a term over the ambient context extended by one binder of
    type path_ty; body_ty must not mention that binder.
    """
    motive = IdT(weaken(body_ty, 3), app_body(body, 3, Var(2)), app_body(body, 3, Var(1)))
    branch = Refl(weaken(body_ty, 1), app_body(body, 1, Var(0)))
    return J(path_ty, ("x", "y", "u"), Telescope(), motive, branch, a, b, p, ())


def ap_h(path_ty: TypeExpr, a: Term, body: Term, body_ty: TypeExpr) -> Term:
    motive = IdT(weaken(body_ty, 3), app_body(body, 3, Var(2)), app_body(body, 3, Var(1)))
    branch = Refl(weaken(body_ty, 1), app_body(body, 1, Var(0)))
    return H(path_ty, ("x", "y", "u"), Telescope(), motive, branch, a, ())
