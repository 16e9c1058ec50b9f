#!/usr/bin/env python3
"""
Test the plane-parallel Lifshitz quantities
"""

import math

import numpy as np
from scipy.special import zeta

from lifshitz_pp import (ALL_MODES, POSITIVE_ONLY, ZERO_ONLY, MatsubaraModes, ModeFilter,
                         Polarization, free_energy_pp, gee_pp, planar_quantities,
                         polylog2, pressure_pp)
from materials import HBAR_C, K_B, PermittivityModel
from numerics import richardson_derivatives

GOLD = PermittivityModel.drude(9.0, 0.035)
PLASMA = PermittivityModel.plasma(9.0)
PC = PermittivityModel.perfect_conductor()
Z3 = float(zeta(3))


def test_polylog2_values():
    assert abs(float(polylog2(1.0)) - math.pi ** 2 / 6) < 1e-14
    assert abs(float(polylog2(0.0))) < 1e-15
    assert abs(float(polylog2(-1.0)) + math.pi ** 2 / 12) < 1e-14


def test_matsubara_sum_rule():
    a = 0.5
    total = planar_quantities(a, 300.0, GOLD, GOLD, ALL_MODES)
    zero = planar_quantities(a, 300.0, GOLD, GOLD, ZERO_ONLY)
    positive = planar_quantities(a, 300.0, GOLD, GOLD, POSITIVE_ONLY)
    for name in ("free_energy_per_area", "pressure"):
        whole = getattr(total, name)
        split = getattr(zero, name) + getattr(positive, name)
        assert abs(whole - split) <= 1e-6 * abs(whole), name


def test_drude_zero_mode_closed_form():
    a, T = 0.3, 300.0
    kT = K_B * T
    zero = planar_quantities(a, T, GOLD, GOLD, ZERO_ONLY)
    assert abs(zero.free_energy_per_area / (-kT * Z3 / (16 * math.pi * a ** 2)) - 1) < 1e-7
    assert abs(zero.pressure / (-kT * Z3 / (8 * math.pi * a ** 3)) - 1) < 1e-7
    assert abs(zero.gee + a * zero.free_energy_per_area) < 1e-7 * abs(zero.gee)


def test_perfect_conductor_zero_mode_doubles_drude():
    a, T = 0.3, 300.0
    pc = planar_quantities(a, T, PC, PC, ZERO_ONLY).free_energy_per_area
    drude = planar_quantities(a, T, GOLD, GOLD, ZERO_ONLY).free_energy_per_area
    assert abs(pc / drude - 2.0) < 1e-7


def test_plasma_zero_mode_between_drude_and_pc():
    a, T = 0.3, 300.0
    values = [planar_quantities(a, T, model, model, ZERO_ONLY).free_energy_per_area
              for model in (GOLD, PLASMA, PC)]
    assert values[0] > values[1] > values[2]


def test_perfect_conductor_low_temperature_limit():
    a = 0.05
    ideal_energy = -math.pi ** 2 * HBAR_C / (720 * a ** 3)
    ideal_pressure = -math.pi ** 2 * HBAR_C / (240 * a ** 4)
    assert abs(free_energy_pp(a, 300.0, PC, PC) / ideal_energy - 1) < 5e-3
    assert abs(pressure_pp(a, 300.0, PC, PC) / ideal_pressure - 1) < 5e-3


def test_polarizations_add_up():
    a = 0.4
    te = planar_quantities(a, 300.0, GOLD, GOLD,
                           ModeFilter(MatsubaraModes.ALL, Polarization.TE_ONLY))
    tm = planar_quantities(a, 300.0, GOLD, GOLD,
                           ModeFilter(MatsubaraModes.ALL, Polarization.TM_ONLY))
    both = planar_quantities(a, 300.0, GOLD, GOLD, ALL_MODES)
    split = te.free_energy_per_area + tm.free_energy_per_area
    assert abs(split - both.free_energy_per_area) <= 1e-6 * abs(both.free_energy_per_area)


def test_signs_and_scaling():
    near = planar_quantities(0.2, 300.0, GOLD, GOLD)
    far = planar_quantities(0.4, 300.0, GOLD, GOLD)
    assert near.free_energy_per_area < 0 and near.pressure < 0
    assert near.free_energy_per_area < far.free_energy_per_area
    assert gee_pp(0.2, 300.0, GOLD, GOLD) > 0


def test_small_gap_converges_for_every_model():
    for model in (GOLD, PLASMA, PC):
        for mode_filter in (POSITIVE_ONLY, ALL_MODES):
            result = planar_quantities(0.1, 300.0, model, model, mode_filter)
            assert result.free_energy_per_area < 0 and result.pressure < 0
            assert result.free_energy_error < 1e-4 * abs(result.free_energy_per_area)
    ideal = -math.pi ** 2 * HBAR_C / (720 * 0.1 ** 3)
    assert 0.3 < free_energy_pp(0.1, 300.0, GOLD, GOLD) / ideal < 1.0


def test_pressure_is_derivative_of_free_energy():
    a = 0.5
    d = richardson_derivatives(lambda x: free_energy_pp(x, 300.0, GOLD, GOLD), a, 0.02)
    pressure = pressure_pp(a, 300.0, GOLD, GOLD)
    assert abs(-d.first / pressure - 1) < 1e-5


def test_gee_derivative_is_positive_mode_free_energy():
    a = 0.5
    d = richardson_derivatives(lambda x: gee_pp(x, 300.0, GOLD, GOLD), a, 0.02)
    positive = free_energy_pp(a, 300.0, GOLD, GOLD, POSITIVE_ONLY)
    assert abs(d.first / positive - 1) < 1e-5


def test_gee_difference_matches_integrated_free_energy():
    lo, hi = 0.5, 1.0
    nodes, w = np.polynomial.legendre.leggauss(10)
    gaps = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    integral = 0.5 * (hi - lo) * sum(
        wi * free_energy_pp(x, 300.0, GOLD, GOLD, POSITIVE_ONLY) for wi, x in zip(w, gaps))
    difference = gee_pp(lo, 300.0, GOLD, GOLD) - gee_pp(hi, 300.0, GOLD, GOLD)
    assert abs(difference / -integral - 1) < 1e-6


def test_invalid_separation():
    try:
        planar_quantities(0.0, 300.0, GOLD, GOLD)
        assert False, "expected ValueError"
    except ValueError:
        pass


def main():
    """Run all plane-parallel tests"""
    print("🧪 Testing plane-parallel Lifshitz quantities...")
    print("=" * 50)
    tests = [value for name, value in globals().items() if name.startswith("test_")]
    failed = 0
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except Exception as e:
            failed += 1
            print(f"❌ {test.__name__}: {e}")
    print(f"\n{'✅' if not failed else '❌'} {len(tests) - failed}/{len(tests)} passed")
    return failed == 0


if __name__ == "__main__":
    main()
