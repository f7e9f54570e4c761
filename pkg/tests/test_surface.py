"""Parser and printer roundtrips."""

import pytest

from idpath import loader, surface as sf
from idpath.checker import CheckError
from idpath.syntax import (
    Con,
    IdT,
    J,
    Refl,
    TCon,
    Telescope,
    Var,
)

BASE = """
postulate A : Type
postulate a : A
postulate b : A
postulate B (x : A) : Type
"""


def test_postulate_type_arity0():
    f = sf.parse("postulate A : Type")
    d = f.directives[0]
    assert isinstance(d, sf.PostulateType)
    assert d.name == "A" and d.params == ()


def test_postulate_type_with_params():
    f = sf.parse("postulate A : Type\npostulate B (x : A) : Type")
    d = f.directives[1]
    assert isinstance(d, sf.PostulateType)
    assert len(d.params) == 1
    assert d.params[0].ty == TCon("A")


def test_check_directive_refl():
    f = sf.parse("check (x : A) |- refl A x : Id A x x")
    d = f.directives[0]
    assert isinstance(d, sf.CheckTerm)
    assert d.term == Refl(TCon("A"), Var(0))
    assert d.ty == IdT(TCon("A"), Var(0), Var(0))


def test_comments_and_whitespace():
    f = sf.parse("-- a comment\npostulate A : Type  -- trailing\n")
    assert len(f.directives) == 1


def test_unbound_name_is_constant_reference():
    f = sf.parse("check |- q : A")
    d = f.directives[0]
    assert d.term == Con("q")


def test_parse_error_position():
    with pytest.raises(sf.ParseError) as e:
        sf.parse("postulate : Type")
    assert e.value.line == 1


def test_parse_j_with_delta():
    text = (
        "check (x : A) (y : A) (u : Id A x y) (z : A) (v : Id A y z) |- "
        "J (y0 z0 v0 | (x0 : A)(u0 : Id A x0 y0). ) (Id A x0 z0) (y1, x0, u0. u0) "
        "y z v [x, u] : Id A x z"
    )
    f = sf.parse(text)
    d = f.directives[0]
    assert isinstance(d.term, J)
    assert len(d.term.delta) == 2
    assert d.term.args == (Var(4), Var(2))


def test_elaboration_fills_domain():
    src = sf.parse(BASE + "check (x : A) |- J (x0 y0 u0. ) (Id A y0 x0) (x1. refl A x1) x x (refl A x) [] : Id A x x")
    sig, results = loader.run_directives(src)
    assert all(r.report.ok for r in results), [r.report for r in results]


def test_load_signature_atomic():
    src = sf.parse(BASE + "def oops : A := missing")
    with pytest.raises(CheckError):
        loader.load_signature(src)


def test_roundtrip_directives():
    text = BASE + (
        "def c : A := a\n"
        "check (x : A) |- refl A x : Id A x x\n"
        "check (x : A) (y : A) (u : Id A x y) |- "
        "J (x0 y0 u0. ) (Id A y0 x0) (x1. refl A x1) x y u [] : Id A y x\n"
    )
    f1 = sf.parse(text)
    printed = sf.print_file(f1)
    f2 = sf.parse(printed)
    # identical after one round (parse . print = identity on parsed files)
    assert sf.print_file(f2) == printed
    sig, results = loader.run_directives(f2)
    assert all(r.report.ok for r in results)


def test_print_parse_identity_on_core():
    src = sf.parse(
        BASE
        + "check (x : A) (y : A) (u : Id A x y) |- "
        "J (x0 y0 u0. ) (Id A y0 x0) (x1. refl A x1) x y u [] : Id A y x"
    )
    sig, results = loader.run_directives(src)
    assert results[-1].report.ok
    tele = loader.elaborate_tele(
        sig, Telescope(), loader.params_to_tele(src.directives[-1].ctx)
    )
    term = loader.elaborate_term(sig, tele, src.directives[-1].term)
    names = sf.scope_names(tele)
    printed = sf.print_term(term, names)
    reparsed = sf.parse_term_text(printed, names)
    re_elab = loader.elaborate_term(sig, tele, reparsed)
    assert re_elab == term


def test_fuzzed_junk_gives_positioned_error():
    for junk in ["(((", "check |- : :", "postulate A :: Type", "def x", "]"]:
        with pytest.raises(sf.ParseError):
            sf.parse(junk)
