from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hallstokes.errors import ConfigurationError, DomainError, TruncationError
from hallstokes.graded import (EnvelopeElement, GradedLieElement, LieAlgebraSpec, bracket,
                               degree_action, dv_add, dvs_up_to, exp_envelope, exp_primitive,
                               free_abelian_letters, inverse_envelope, is_primitive_words,
                               lie_projection, lie_residual, log_envelope, log_grouplike)
from hallstokes.quiver import hall_lie_spec

from .strategies import small_fraction


def heisenberg(d=3):
    return LieAlgebraSpec(2, d, {"x": (1, 0), "y": (0, 1), "z": (1, 1)},
                          {("x", "y"): {"z": Fraction(1)}}, name="heis")


def lie_elements(spec):
    return st.dictionaries(st.sampled_from(spec.labels), small_fraction, max_size=len(spec.labels)).map(
        lambda c: GradedLieElement(spec, c))


FREE = free_abelian_letters({"a": (1, 0), "b": (0, 1)}, 5)


def env_elements(spec, max_len=3):
    words = [w for w in spec.words() if len(w) <= max_len]
    return st.dictionaries(st.sampled_from(words), small_fraction, max_size=6).map(
        lambda t: EnvelopeElement(spec, t))


def test_dimension_vectors():
    assert dv_add((1, 0), (0, 2)) == (1, 2)
    vs = dvs_up_to(2, 2)
    assert vs == [(0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert (0, 0) in dvs_up_to(2, 1, include_zero=True)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        LieAlgebraSpec(2, 2, {"x": (1, 0), "y": (0, 1)}, {("x", "y"): {"x": 1}})
    with pytest.raises(ConfigurationError):
        LieAlgebraSpec(2, 2, {"x": (1, 0)}, {("x", "x"): {"x": 1}})
    with pytest.raises(ConfigurationError):
        LieAlgebraSpec(2, 1, {"x": (1, 1)})
    with pytest.raises(ConfigurationError):
        LieAlgebraSpec(2, 2, {"x": (0, 0)})


def test_antisymmetric_partner_filled():
    spec = heisenberg()
    assert spec.bracket_labels("y", "x") == {"z": Fraction(-1)}


@pytest.mark.parametrize("N,d", [(2, 4), (3, 4), (3, 5)])
def test_hall_lie_jacobi_exact(N, d):
    assert hall_lie_spec(N, d).check_jacobi()


def test_jacobi_detects_failure():
    bad = LieAlgebraSpec(1, 3, {"a": (1,), "b": (1,), "g": (1,), "c": (2,), "e": (3,)},
                         {("a", "b"): {"c": 1}, ("b", "g"): {"c": 1}, ("a", "c"): {"e": 1}})
    assert not bad.check_jacobi()


def test_spec_json_round_trip():
    spec = hall_lie_spec(3, 4)
    data = spec.to_json()
    assert [1, 1, 0] in data["roots"]
    assert LieAlgebraSpec.from_json(data) == spec


@given(lie_elements(heisenberg()))
def test_bracket_self_vanishes(x):
    assert not bracket(x, x).coeffs


@given(lie_elements(heisenberg()), lie_elements(heisenberg()))
def test_bracket_matches_commutator(x, y):
    ex, ey = EnvelopeElement.from_lie(x), EnvelopeElement.from_lie(y)
    comm = ex * ey - ey * ex
    assert lie_projection(comm) == bracket(x, y)


def test_hall_bracket_s1_s2():
    spec = hall_lie_spec(2, 2)
    s1 = GradedLieElement(spec, {(1, 1): 1})
    s2 = GradedLieElement(spec, {(2, 2): 1})
    assert bracket(s1, s2).coeffs == {(1, 2): -1}


def test_degree_action():
    spec = heisenberg()
    x = GradedLieElement(spec, {"x": 1, "z": 2})
    out = degree_action(lambda g: complex(g[0] + 10 * g[1]), x)
    assert out.coeffs == {"x": 1, "z": 22}


@given(env_elements(FREE), env_elements(FREE), env_elements(FREE))
def test_envelope_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(env_elements(FREE))
def test_envelope_unit(a):
    one = EnvelopeElement.one(FREE)
    assert a * one == a == one * a


def test_word_overflow_dropped():
    spec = free_abelian_letters({"a": (1, 0), "b": (0, 1)}, 5)
    u = EnvelopeElement(spec, {("a", "a", "b"): 1})
    assert not (u * u).terms


@given(lie_elements(hall_lie_spec(2, 4)))
def test_exp_log_round_trip(x):
    g = exp_primitive(x)
    assert g.scalar == 1
    assert log_grouplike(g) == x


@given(env_elements(FREE))
def test_log_exp_round_trip_envelope(a):
    a = a - a.scalar
    assert log_envelope(exp_envelope(a)) == a


def test_exp_zero_and_log_one():
    spec = heisenberg()
    assert exp_primitive(GradedLieElement(spec)) == EnvelopeElement.one(spec)
    assert not log_grouplike(EnvelopeElement.one(spec)).coeffs


def test_log_needs_unit_scalar():
    with pytest.raises(DomainError):
        log_envelope(EnvelopeElement.one(FREE, 2))


@given(env_elements(FREE))
def test_inverse(a):
    g = a - a.scalar + 1
    assert g * inverse_envelope(g) == EnvelopeElement.one(FREE)


@given(lie_elements(heisenberg(4)), st.integers(1, 4))
def test_truncate_commutes_with_exp(x, k):
    assert exp_primitive(x).truncate(k) == exp_primitive(x.truncate(k)).truncate(k)


@given(env_elements(FREE), env_elements(FREE), st.integers(1, 5))
def test_truncate_is_ring_map(a, b, k):
    lhs = (a * b).truncate(k)
    rhs = (a.truncate(k) * b.truncate(k)).truncate(k)
    assert lhs == rhs


def test_truncate_upwards_rejected():
    with pytest.raises(TruncationError):
        EnvelopeElement.one(FREE).truncate(6)


@given(lie_elements(hall_lie_spec(2, 3)))
def test_exp_is_grouplike_words(x):
    logp = log_envelope(exp_primitive(x))
    assert is_primitive_words(logp)


def test_lie_residual_of_free_words():
    a = EnvelopeElement(FREE, {("a",): 1})
    b = EnvelopeElement(FREE, {("b",): 1})
    assert lie_residual(a * b - b * a) == 0
    assert lie_residual(a * b) > 0
