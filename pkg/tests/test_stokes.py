import random

import pytest

from hallstokes.charges import RaySpec, StabilityCondition
from hallstokes.errors import ConfigurationError, DomainError, OrderingError, SingularConfigurationError
from hallstokes.graded import EnvelopeElement, GradedLieElement, free_abelian_letters
from hallstokes.isomonodromy import epsilon_lie, f_of_Z
from hallstokes.quiver import QuiverSpec, hall_algebra, hall_lie_spec, lie_to_hall, one, realize, splus
from hallstokes.special import TWO_PI_I
from hallstokes.stability import epsilon_all, random_stability, ss_ell
from hallstokes.stokes import (Provenance, delta_from_f, delta_from_kappa_envelope, exp_per_ray,
                               clockwise_product, kappa_from_delta, log_per_ray, stokes_forward,
                               stokes_inverse, stokes_inverse_j)


def _float_Z(rng, N):
    return StabilityCondition([complex(rng.uniform(-1, 1), rng.uniform(0.1, 1)) for _ in range(N)])


def _small_f(spec, rng, scale=0.3):
    return GradedLieElement(spec, {lab: scale * complex(rng.gauss(0, 1), rng.gauss(0, 1))
                                   for lab in spec.labels})


def test_degree_one_epsilon_is_two_pi_i_f():
    spec = hall_lie_spec(2, 1)
    Z = StabilityCondition([-1 + 1j, 1 + 1j])
    f = GradedLieElement(spec, {lab: 1 + 0j for lab in spec.labels})
    eps = stokes_forward(Z, f)
    assert (eps - f * TWO_PI_I).norm() < 1e-14


@pytest.mark.parametrize("N,d", [(2, 5), (3, 4)])
def test_round_trip(N, d):
    rng = random.Random(N * 10 + d)
    spec = hall_lie_spec(N, d)
    for _ in range(5):
        Z = _float_Z(rng, N)
        f = _small_f(spec, rng)
        eps = stokes_forward(Z, f)
        assert (stokes_inverse(Z, eps) - f).norm() <= 1e-8
        assert (stokes_inverse_j(Z, eps) - f).norm() <= 1e-8


def test_log_of_factors_is_forward_map():
    rng = random.Random(3)
    spec = hall_lie_spec(3, 3)
    for _ in range(3):
        Z = _float_Z(rng, 3)
        f = _small_f(spec, rng)
        assert (log_per_ray(Z, delta_from_f(Z, f)) - stokes_forward(Z, f)).norm() <= 1e-10


def test_exp_per_ray_matches_factors():
    # words live in the free envelope, so compare after realising in the Hall algebra
    rng = random.Random(4)
    spec = hall_lie_spec(2, 4)
    alg = hall_algebra(2, 4)
    Z = _float_Z(rng, 2)
    f = _small_f(spec, rng)
    b = {round(x.ray.phase, 9): realize(x.element) for x in exp_per_ray(Z, stokes_forward(Z, f))}
    for x in delta_from_f(Z, f):
        ref = b.pop(round(x.ray.phase, 9), None)
        ref = one(alg) if ref is None else ref
        assert realize(x.element).distance(ref) <= 1e-10
    assert not b


def test_factors_are_in_clockwise_order():
    rng = random.Random(5)
    spec = hall_lie_spec(3, 3)
    Z = _float_Z(rng, 3)
    facs = delta_from_f(Z, _small_f(spec, rng))
    phases = [x.ray.phase for x in facs]
    assert phases == sorted(phases, reverse=True)


@pytest.mark.parametrize("Z", [
    StabilityCondition([-1 + 1j, 1 + 1j]),
    StabilityCondition([1 + 1j, -1 + 1j]),
    StabilityCondition([1j, 2j]),
])
def test_realized_factors_are_semistable_indicators(Z):
    q = QuiverSpec(2, 3)
    alg = hall_algebra(2, 3)
    facs = delta_from_f(Z, f_of_Z(q, Z))
    for fac in facs:
        assert realize(fac.element).distance(ss_ell(Z, fac.classes, alg)) <= 1e-10
    total = clockwise_product(facs, Z)
    assert realize(total).distance(splus(alg)) <= 1e-10


def test_realized_epsilon_matches_hall_log():
    Z = StabilityCondition([-0.5 + 1j, 1 + 0.5j, 0.2 + 1j])
    q = QuiverSpec(3, 3)
    alg = hall_algebra(3, 3)
    eps = stokes_forward(Z, f_of_Z(q, Z))
    ref = epsilon_lie(q, Z)
    assert (eps - ref).norm() <= 1e-10
    total = sum(epsilon_all(Z, alg).values(), lie_to_hall(GradedLieElement(ref.spec)))
    assert lie_to_hall(ref).distance(total) == 0


def test_kappa_delta_round_trip():
    rng = random.Random(6)
    spec = hall_lie_spec(2, 4)
    Z = _float_Z(rng, 2)
    facs = delta_from_f(Z, _small_f(spec, rng))
    kappa = kappa_from_delta(Z, facs)
    back = delta_from_kappa_envelope(Z, kappa)
    assert [x.classes for x in back] == [x.classes for x in facs]
    for x, y in zip(back, facs):
        assert x.element.distance(y.element) <= 1e-12


def test_clockwise_order_is_enforced():
    spec = free_abelian_letters({"a": (1, 0), "b": (0, 1)}, 2)
    one = EnvelopeElement.one(spec)
    with pytest.raises(OrderingError):
        clockwise_product([(RaySpec(0.2), one), (RaySpec(0.7), one)])
    with pytest.raises(DomainError):
        clockwise_product([])


def test_log_per_ray_rejects_misplaced_classes():
    spec = free_abelian_letters({"a": (1, 0), "b": (0, 1)}, 2)
    Z = StabilityCondition([-1 + 1j, 1 + 1j])
    facs = exp_per_ray(Z, GradedLieElement(spec, {"a": 1.0, "b": 1.0}))
    facs[0].ray = facs[1].ray
    with pytest.raises(ConfigurationError):
        log_per_ray(Z, facs)


def test_abelian_letters_commute():
    spec = free_abelian_letters({"a": (1, 0), "b": (0, 1)}, 3)
    Z = StabilityCondition([-1 + 1j, 1 + 1j])
    f = GradedLieElement(spec, {"a": 0.5, "b": -0.25j})
    eps = stokes_forward(Z, f)
    assert (eps - f * TWO_PI_I).norm() < 1e-12


def test_singular_configuration():
    spec = free_abelian_letters({"a": (1, 0)}, 2)
    with pytest.raises(SingularConfigurationError):
        stokes_forward(_ZeroZ(), GradedLieElement(spec, {"a": 1.0}))


class _ZeroZ:
    def __call__(self, gamma):
        return 0j


def test_provenance_records_evaluations():
    spec = hall_lie_spec(2, 2)
    Z = StabilityCondition([-1 + 1j, 1 + 1j])
    prov = Provenance()
    stokes_forward(Z, _small_f(spec, random.Random(1)), prov)
    js = prov.to_json()
    assert js["1,1"]["L_2"] == 2
    assert js["1,0"]["L_1"] == 1


def test_wall_round_trip_exact_stability():
    rng = random.Random(8)
    spec = hall_lie_spec(3, 3)
    Z = random_stability(3, rng)
    f = _small_f(spec, rng)
    assert (stokes_inverse(Z, stokes_forward(Z, f)) - f).norm() <= 1e-8
