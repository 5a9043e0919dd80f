import random

import pytest

from hallstokes.charges import StabilityCondition
from hallstokes.errors import ExperimentError, WallProximityError
from hallstokes.isomonodromy import (chamber_data, f_of_Z, pde_residual, pde_rhs, pde_slope,
                                     wall_distance, wallcross_experiment)
from hallstokes.quiver import QuiverSpec, hall_algebra, indicator, IsoClass
from hallstokes.stability import chamber_label, random_stability
from hallstokes.stokes import Provenance

A2 = QuiverSpec(2, 4)
A3 = QuiverSpec(3, 4)
Z_A2 = StabilityCondition([-0.6 + 0.9j, 0.8 + 0.5j])
Z_A3 = StabilityCondition([-0.7 + 0.8j, 0.1 + 1.0j, 0.9 + 0.4j])
A2_SMALL = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)]


def test_pde_a2():
    res = pde_residual(A2, Z_A2, 1e-4, alphas=A2_SMALL)
    assert max(res.values()) <= 1e-5


def test_pde_a3():
    res = pde_residual(A3, Z_A3, 1e-4)
    assert max(res.values()) <= 1e-4


def test_pde_second_order():
    slope, res = pde_slope(QuiverSpec(2, 3), Z_A2)
    assert 1.8 <= slope <= 2.2
    assert res[0] > res[-1]


def test_pde_detail_rows():
    res, rows = pde_residual(QuiverSpec(2, 2), Z_A2, 1e-4, detail=True)
    assert len(rows) == 4 * len(res)
    assert {r[0] for r in rows} == {"Re z1", "Im z1", "Re z2", "Im z2"}


def test_near_wall_rejected():
    Z = StabilityCondition([-1e-4 + 1j, 1e-4 + 1j])
    assert wall_distance(Z, 2) < 1e-3
    with pytest.raises(WallProximityError):
        pde_residual(QuiverSpec(2, 2), Z, 1e-4)


def test_pde_rhs_vanishes_in_degree_one():
    f = f_of_Z(A2, Z_A2)
    assert pde_rhs(f, Z_A2, [1, 0], (1, 0)).norm() == 0


def test_f_degree_one_is_simples():
    f = f_of_Z(A2, Z_A2)
    c = f.component((1, 0)).coeffs
    assert abs(c[(1, 1)] - 1 / (2j * 3.141592653589793)) < 1e-14


def test_chamber_constancy_exact():
    rng = random.Random(21)
    seen = {}
    for _ in range(25):
        Z = random_stability(3, rng)
        key = chamber_label(Z, 3, 3)
        data = chamber_data(QuiverSpec(3, 3), Z)
        if key in seen:
            assert seen[key] == data
        seen[key] = data
    assert len(seen) >= 2


def test_provenance_of_f():
    prov = Provenance()
    f_of_Z(QuiverSpec(2, 2), Z_A2, prov)
    assert prov.to_json()


def test_wallcross_a2():
    Zw = StabilityCondition([1j, 1j])
    rep = wallcross_experiment(QuiverSpec(2, 2), (1, 1), Zw, [-1, 1], samples=5)
    assert rep.order >= 0.9
    assert all(o >= 0.9 for o in rep.pairwise_orders)
    assert rep.delta_jump > 0
    assert rep.sector_products_equal
    alg = hall_algebra(2, 2)
    P = IsoClass(2, ((1, 2),))
    wall_delta = indicator(alg, P) + indicator(alg, IsoClass(2, ((1, 1), (2, 2))))
    assert rep.delta_sides["wall"] == wall_delta.to_json()
    assert rep.csv_rows()[0] == "s,label,re,im"
    assert len(rep.csv_rows()) > 1
    js = rep.to_json()
    assert js["alpha"] == [1, 1] and len(js["gaps"]) == 3


def test_wallcross_a3():
    Zw = StabilityCondition([0.5 + 1j, 0.5 + 1j, 0.9 + 0.3j])
    rep = wallcross_experiment(QuiverSpec(3, 2), (1, 1, 0), Zw, [-1, 1, 0])
    assert rep.order >= 0.9
    assert rep.sector_products_equal


def test_wallcross_needs_a_wall():
    with pytest.raises(ExperimentError):
        wallcross_experiment(QuiverSpec(2, 2), (1, 1), Z_A2, [0.01, 0])
