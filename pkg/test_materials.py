#!/usr/bin/env python3
"""
Test permittivity models, reflection coefficients and Matsubara grids
"""

import math
import os
import tempfile

import numpy as np

from errors import RangeError, TableFormatError
from materials import (HBAR_C, K_B, PermittivityModel, epsilon_imag_axis, fresnel,
                       load_permittivity_table, matsubara_grid, reflection,
                       thermal_length, zero_frequency_reflection)


def _write_table(text):
    handle = tempfile.NamedTemporaryFile("w", suffix=".txt", delete=False, encoding="utf-8")
    handle.write(text)
    handle.close()
    return handle.name


def test_plasma_permittivity():
    plasma = PermittivityModel.plasma(9.0)
    assert abs(epsilon_imag_axis(plasma, 9.0) - 2.0) < 1e-14


def test_drude_permittivity():
    gold = PermittivityModel.drude(9.0, 0.035)
    eps = epsilon_imag_axis(gold, 0.1624)
    assert abs(eps - (1 + 81.0 / (0.1624 * 0.1974))) < 1e-9
    assert abs(eps - 2527.7) < 0.5


def test_perfect_conductor_is_infinite():
    assert math.isinf(epsilon_imag_axis(PermittivityModel.perfect_conductor(), 1.0))


def test_invalid_frequency_raises():
    gold = PermittivityModel.drude(9.0, 0.035)
    for bad in (0.0, -1.0):
        try:
            epsilon_imag_axis(gold, bad)
            assert False, "expected ValueError"
        except ValueError:
            pass


def test_invalid_model_parameters():
    for build in (lambda: PermittivityModel.drude(-1.0, 0.1),
                  lambda: PermittivityModel.drude(9.0, -0.1),
                  lambda: PermittivityModel.plasma(0.0)):
        try:
            build()
            assert False, "expected ValueError"
        except ValueError:
            pass


def test_fresnel_normal_incidence():
    r_te, r_tm = fresnel(4.0, 1.0, 0.0)
    assert abs(r_te + 1.0 / 3.0) < 1e-14
    assert abs(r_tm - 1.0 / 3.0) < 1e-14


def test_fresnel_perfect_conductor():
    r_te, r_tm = fresnel(math.inf, 0.5, np.array([0.0, 1.0, 10.0]))
    assert np.all(r_te == -1.0)
    assert np.all(r_tm == 1.0)


def test_fresnel_bounded():
    k = np.linspace(0.0, 50.0, 101)
    r_te, r_tm = fresnel(25.0, 0.3, k)
    assert np.all(np.abs(r_te) < 1) and np.all(np.abs(r_tm) < 1)
    assert np.all(r_te <= 0) and np.all(r_tm >= 0)


def test_zero_frequency_rules():
    k = np.array([0.1, 1.0, 10.0])
    drude_te, drude_tm = zero_frequency_reflection(PermittivityModel.drude(9.0, 0.035), k)
    assert np.all(drude_te == 0.0) and np.all(drude_tm == 1.0)
    pc_te, _ = zero_frequency_reflection(PermittivityModel.perfect_conductor(), k)
    assert np.all(pc_te == -1.0)
    plasma_te, _ = zero_frequency_reflection(PermittivityModel.plasma(9.0), k)
    kp = 9.0 / HBAR_C
    expected = (k - np.sqrt(k ** 2 + kp ** 2)) / (k + np.sqrt(k ** 2 + kp ** 2))
    assert np.allclose(plasma_te, expected, rtol=1e-14)


def test_reflection_grid_mixes_zero_and_positive():
    gold = PermittivityModel.drude(9.0, 0.035)
    r_te, r_tm = reflection(gold, np.array([0.0, 0.5]), np.array([1.0, 1.0]))
    assert r_te[0] == 0.0 and r_tm[0] == 1.0
    te, tm = fresnel(epsilon_imag_axis(gold, 0.5), 0.5, 1.0)
    assert abs(r_te[1] - te) < 1e-15 and abs(r_tm[1] - tm) < 1e-15


def test_thermal_length():
    lam = thermal_length(300.0)
    assert abs(lam - 1.21482) < 1e-4
    assert abs(lam - HBAR_C / (2 * math.pi * K_B * 300.0)) < 1e-15


def test_matsubara_grid():
    grid = matsubara_grid(300.0, 0.1)
    assert grid.frequencies[0] == 0.0
    assert abs(grid.frequencies[1] - 2 * math.pi * K_B * 300.0) < 1e-15
    assert grid.n_max >= math.ceil(grid.thermal_length / 0.1)
    assert len(grid.frequencies) == grid.n_max + 1
    assert abs(grid.thermal_length_m - grid.thermal_length * 1e-6) < 1e-20


def test_matsubara_grid_rejects_bad_input():
    for args in ((0.0, 0.1), (300.0, 0.0), (300.0, -1.0)):
        try:
            matsubara_grid(*args)
            assert False, "expected ValueError"
        except ValueError:
            pass


def test_tabulated_interpolation_and_range():
    path = _write_table("# hbar xi [eV], eps\n0.1  500\n1.0  50\n10.0  2\n")
    try:
        model = load_permittivity_table(path, zero_frequency="drude")
    finally:
        os.unlink(path)
    mid = epsilon_imag_axis(model, math.sqrt(0.1 * 1.0))
    assert 50 < mid < 500
    assert abs(epsilon_imag_axis(model, 1.0) - 50.0) < 1e-9
    try:
        epsilon_imag_axis(model, 20.0)
        assert False, "expected RangeError"
    except RangeError:
        pass


def test_tabulated_without_zero_rule_rejects_n0():
    model = PermittivityModel.tabulated([0.1, 1.0], [100.0, 10.0])
    try:
        zero_frequency_reflection(model, 1.0)
        assert False, "expected ValueError"
    except ValueError:
        pass


def test_tabulated_rejects_increasing_permittivity():
    try:
        PermittivityModel.tabulated([0.1, 1.0, 10.0], [100.0, 120.0, 2.0])
        assert False, "expected ValueError"
    except ValueError as e:
        assert "increase" in str(e)


def test_table_format_errors_carry_line():
    path = _write_table("0.1 500\n0.05 400\n")
    try:
        load_permittivity_table(path)
        assert False, "expected TableFormatError"
    except TableFormatError as e:
        assert e.line == 2
    finally:
        os.unlink(path)

    path = _write_table("0.1 500\n0.2 abc\n")
    try:
        load_permittivity_table(path)
        assert False, "expected TableFormatError"
    except TableFormatError as e:
        assert e.line == 2
    finally:
        os.unlink(path)


def main():
    """Run all material tests"""
    print("🧪 Testing materials...")
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
