import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from nilword.canonical import (
    Certificate,
    CertificateError,
    ChainForm,
    VForm,
    canonicalize,
    chain_form,
    classify_surjectivity,
    disjoint_reduce,
    v_form,
    valuation,
    verify_certificate,
)
from nilword.distribution import exact_distribution, same_distribution
from nilword.words import Word, class2_normal_form, parse_word

from conftest import group


def same(G, u, v):
    return same_distribution(G, u, v).equal


def test_valuation():
    assert valuation(0, 3, 4) == 4
    assert valuation(18, 3, 4) == 2
    assert valuation(-5, 5, 2) == 1


@pytest.mark.parametrize("text,p,E,t", [
    ("[x1,x2]", 3, 2, (0, 1)),
    ("x1^3 [x1,x2]", 3, 2, (3, 1)),
    ("[x1,x2][x2,x3]^3", 3, 2, (0, 1, 3)),
    ("x1^2", 2, 1, (0,)),
])
def test_chain_examples(text, p, E, t):
    c, cert = chain_form(parse_word(text), p, E)
    assert c.t == t and c.is_valid()
    assert verify_certificate(cert).passed


def test_already_chain_shaped_needs_no_steps():
    for text in ["[x1,x2]", "[x1,x2][x2,x3]^3", "x1^9 [x1,x2]^3 [x2,x3]"]:
        _, cert = chain_form(parse_word(text), 3, 3)
        assert cert.steps == ()


def test_square_of_product_is_primitive_mod_3():
    w = parse_word("x1 x2") ** 2
    c, cert = chain_form(w, 3, 1)
    assert c.t[0] == 1
    G = group("heisenberg:3:1")
    assert verify_certificate(cert, G=G).passed
    assert same(G, w, cert.target)


def test_power_with_commutator_on_heisenberg_mod_9():
    w = parse_word("x1^3 [x1,x2]")
    c, cert = chain_form(w, 3, 2)
    assert same(group("heisenberg:3:2"), w, c.word())


def test_chain_form_accepts_class2_forms():
    f = class2_normal_form(parse_word("x2^3 [x1,x2]^2"))
    c, _ = chain_form(f, 3, 2)
    assert c.t == (3, 1)


def test_bad_modulus():
    with pytest.raises(ValueError):
        chain_form(parse_word("x1"), 4, 1)
    with pytest.raises(ValueError):
        chain_form(parse_word("x1"), 3, 0)


@pytest.mark.parametrize("s", [(1, 2), (2, 1)])
def test_disjoint_collapses_to_smaller_valuation(s):
    form, cert = disjoint_reduce(s, 3, 3)
    assert form.t == (3,)
    assert cert.target == parse_word("[x1,x2]^3", 3)
    assert verify_certificate(cert).passed


def test_disjoint_single_commutator_unchanged():
    form, cert = disjoint_reduce((2,), 3, 3)
    assert form.t == (9,) and cert.steps == ()
    assert disjoint_reduce((), 3, 1)[0].t == ()


def test_disjoint_mod_3_on_extraspecial():
    form, cert = disjoint_reduce((0, 0), 3, 1)
    assert form.t == (1,)
    G = group("extraspecial:3:2:+")
    assert same(G, cert.source, cert.target)


def test_disjoint_keeps_separate_pairs():
    form, _ = disjoint_reduce((0, None, 1), 3, 2)
    assert form.t == (1, 3)
    # Pfaffian invariants of the path are 1, 1, 5^4 and 5^4 vanishes mod 5^3
    form, _ = disjoint_reduce((1, 0, 1, 0, 2), 5, 3)
    assert form.t == (1, 1, 0)


def test_vform_primitive():
    vf, cert = v_form(ChainForm(3, 3, 4, (1, 1, 0)))
    assert vf.variant == "primitive" and str(vf) == "primitive: automorphic to x1"
    assert cert.target == parse_word("x1", 3)


def test_vform_power_collapse():
    c = ChainForm(2, 3, 3, (3, 9))
    vf, cert = v_form(c)
    assert vf.variant == "power-with-tail" and vf.r == 1 and vf.word() == parse_word("x1^3", 2)
    assert same(group("heisenberg:3:2"), c.word(), vf.word())


def test_vform_power_with_tail():
    c = ChainForm(2, 3, 3, (9, 3))
    vf, _ = v_form(c)
    assert (vf.r, vf.ell, vf.s) == (2, 2, (1,))
    assert vf.satisfies_constraints()
    assert same(group("heisenberg:3:2"), c.word(), vf.word())


@pytest.mark.parametrize("r,i,s", [(1, 1, 1), (1, 2, 2), (2, 1, 3), (1, 3, 1)])
def test_power_word_collapse(r, i, s):
    k = i + 1
    w = Word(k, ((1, 3 ** r),)) * parse_word(f"[x{i},x{i + 1}]^{3 ** s}", k)
    chain, _, vf, _, cert = canonicalize(w, 3, 4)
    assert vf.word() == Word(k, ((1, 3 ** r),))
    assert verify_certificate(cert).passed


def test_vform_constraint_predicate_rejects():
    good = VForm(4, 3, 4, "power-with-tail", 2, 3, 3, (0, 1))
    assert good.satisfies_constraints()
    assert not VForm(4, 3, 4, "power-with-tail", 2, 3, 3, (1, 0)).satisfies_constraints()
    assert not VForm(4, 3, 4, "power-with-tail", 1, 3, 3, (0, 1)).satisfies_constraints()
    assert not VForm(4, 3, 4, "pure-commutator", None, 2, 3, (0, 1)).satisfies_constraints()


def test_transcript_round_trip_and_format():
    *_, cert = canonicalize(parse_word("x1^3 [x1,x2] [x2,x3]^3 x3^9"), 3, 3)
    text = cert.to_transcript()
    lines = text.splitlines()
    assert lines[0] == "rank: 3" and lines[1] == "modulus: 3^3"
    assert lines[2].startswith("source: ") and lines[-1].startswith("target: ")
    assert all(len(line.split("\t")) == 3 for line in lines[3:-1])
    assert Certificate.from_transcript(text).to_transcript() == text


def test_non_unit_step_fails():
    text = ("rank: 2\nmodulus: 3^2\nsource: x1\n"
            "unit-power\tpower-by-unit: x1 -> x1^3\tunit normalization\ntarget: x1^3\n")
    v = verify_certificate(Certificate.from_transcript(text))
    assert not v.passed
    assert v.failures[0][0] == 0 and "non-unit" in v.failures[0][1]


def test_wrong_target_fails():
    _, cert = chain_form(parse_word("x1 x2"), 3, 2)
    bad = Certificate(cert.source, parse_word("x1^2", 2), 3, 2, cert.steps)
    v = verify_certificate(bad)
    assert not v.passed and v.failures[-1][0] == -1


def test_tag_kind_mismatch_fails():
    text = ("rank: 2\nmodulus: 3^1\nsource: x1 x2\n"
            "central-tweak\tswap: x1 -> x2; x2 -> x1\trelabel\ntarget: x2 x1\n")
    v = verify_certificate(Certificate.from_transcript(text))
    assert not v.passed


@pytest.mark.parametrize("text", ["rank: 2\nsource: x1\n", "rank: 2\nmodulus: 3^1\nsource: x1\nbogus\tswap: x1 -> x2; x2 -> x1\tx\ntarget: x2\n"])
def test_malformed_transcripts(text):
    with pytest.raises(CertificateError):
        Certificate.from_transcript(text)


def test_exponent_must_divide_modulus():
    _, cert = chain_form(parse_word("x1 x2"), 3, 1)
    v = verify_certificate(cert, G=group("heisenberg:3:2"))
    assert not v.passed


def random_words(max_rank=3):
    return st.integers(1, max_rank).flatmap(
        lambda k: st.lists(
            st.tuples(st.integers(1, k), st.sampled_from([-3, -2, -1, 1, 2, 3, 6, 9])),
            max_size=10,
        ).map(lambda syl: Word(k, tuple(syl)))
    )


@settings(max_examples=300, deadline=None)
@given(random_words(5), st.sampled_from([2, 3, 5, 7]), st.integers(1, 4))
def test_shapes_and_replay(w, p, E):
    chain, c1, vf, c2, cert = canonicalize(w, p, E)
    assert chain.is_valid()
    assert vf.satisfies_constraints()
    assert verify_certificate(c1).passed and verify_certificate(c2).passed
    assert verify_certificate(cert).passed
    assert cert.source == w and cert.target == vf.word()


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_words(3), st.sampled_from([("heisenberg:3:1", 3, 1), ("extraspecial:3:1:-", 3, 2),
                                        ("extraspecial:5:1:+", 5, 1)]))
def test_targets_identically_distributed(w, case):
    spec, p, E = case
    G = group(spec)
    if w.rank == 3 and G.order > 27:
        w = w.with_rank(2) if max(w.used_generators(), default=1) <= 2 else Word(2, ())
    chain, _, vf, _, _ = canonicalize(w, p, E)
    d = exact_distribution(G, w)
    assert same_distribution(G, w, chain.word(), dists=(d, exact_distribution(G, chain.word()))).equal
    assert same_distribution(G, w, vf.word(), dists=(d, exact_distribution(G, vf.word()))).equal


def test_classify_surjectivity_examples():
    G = group("heisenberg:3:1")
    rep = classify_surjectivity(parse_word("x1 x2"), G)
    assert rep.predicted_surjective and rep.empirical_uniform and rep.equivalence_holds
    rep = classify_surjectivity(parse_word("x1^3"), G)
    assert not rep.predicted_surjective and not rep.empirical_surjective
    rep = classify_surjectivity(parse_word("[x1,x2]"), group("extraspecial:5:1:-"))
    assert not rep.empirical_surjective and not rep.empirical_uniform and rep.equivalence_holds
