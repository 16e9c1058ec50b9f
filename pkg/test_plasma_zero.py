#!/usr/bin/env python3
"""
Test the plasma TE zero-frequency term, Bessel ratios and decimation
"""

import math
import os
import tempfile

import numpy as np
from scipy.special import iv

import plasma_zero
from bispherical_zero import FD_STEP, bispherical_from_spheres, neumann_classical
from errors import DecimationError
from geometry import SphereGeometry, TruncationPlan
from numerics import richardson_derivatives
from plasma_zero import (StripMatrix, _lentz_bessel_ratio, _logdet_term, build_A_strip,
                         decimate, mie_ratio, plasma_classical_total, read_logdet_terms,
                         resolve_plasma_mode, te_plasma_classical)

RUN_SLOW = os.getenv("CASIMIR_RUN_SLOW", "0") == "1"
T = 300.0
GOLD_OMEGA_P = 9.0


def test_mie_ratio_dipole_value():
    expected = 0.5 * (4 - 3 / math.tanh(1.0))
    assert abs(mie_ratio(1, 1.0) - expected) < 1e-13
    assert mie_ratio(0, 1.0) == 0.0


def test_mie_ratio_against_scipy():
    l = np.arange(0, 30)
    for w in (1e-4, 0.5, 2.5, 40.0):
        reference = l / (l + 1.0) * iv(l + 1.5, w) / iv(l - 0.5, w)
        assert np.allclose(mie_ratio(l, w), reference, rtol=1e-12, atol=0), w


def test_mie_ratio_bounds():
    r = mie_ratio(np.arange(1, 200), 1e4)
    assert np.all(r > 0) and np.all(r < 1)


def test_lentz_ratio_large_order():
    for nu, w in ((50.5, 30.0), (10.5, 200.0)):
        assert abs(_lentz_bessel_ratio(nu, w) / (iv(nu + 1, w) / iv(nu, w)) - 1) < 1e-13


def test_invalid_mie_arguments():
    for args in ((1, 0.0), (-1, 1.0)):
        try:
            mie_ratio(*args)
            assert False, "expected ValueError"
        except ValueError:
            pass


def test_decimate_identity_blocks():
    geom = SphereGeometry(2.0, 3.0, 0.2)
    plan = TruncationPlan.for_geometry(geom, decimation=None)
    strip = build_A_strip(1, geom, GOLD_OMEGA_P, plan)
    assert np.array_equal(decimate(strip, 1, 1), strip.to_dense())


def test_decimate_constant_blocks_preserve_traces():
    rng = np.random.default_rng(7)
    p1, p2 = 3, 2
    small = rng.uniform(0.0, 0.1, size=(4, 5))
    dense = np.kron(small, np.ones((p1, p2)))
    strip = StripMatrix(shape=dense.shape, col_start=np.zeros(dense.shape[0], dtype=int),
                        values=dense)
    reduced = decimate(strip, p1, p2)
    full_gram = dense @ dense.T
    reduced_gram = reduced @ reduced.T
    for k in (1, 2, 3):
        full = np.trace(np.linalg.matrix_power(full_gram, k))
        approx = np.trace(np.linalg.matrix_power(reduced_gram, k))
        assert abs(full - approx) < 1e-12 * abs(full), k


def test_strip_is_contractive():
    geom = SphereGeometry(5.0, 5.0, 0.2)
    plan = TruncationPlan.for_geometry(geom, decimation=None)
    for m in (0, 1, 5):
        dense = build_A_strip(m, geom, GOLD_OMEGA_P, plan).to_dense()
        assert np.linalg.norm(dense, 2) < 1


def test_plate_geometry_rejected():
    geom = SphereGeometry(5.0, math.inf, 0.2)
    try:
        build_A_strip(0, geom, GOLD_OMEGA_P, TruncationPlan.for_geometry(geom))
        assert False, "expected ValueError"
    except ValueError:
        pass


def test_strip_width_converged():
    geom = SphereGeometry(2.0, 2.0, 0.2)
    narrow = TruncationPlan.for_geometry(geom, decimation=None, strip_factor=3.0)
    default = TruncationPlan.for_geometry(geom, decimation=None)
    wide = TruncationPlan.for_geometry(geom, decimation=None, strip_factor=12.0)
    clipped = te_plasma_classical(geom, T, GOLD_OMEGA_P, narrow).energy
    base = te_plasma_classical(geom, T, GOLD_OMEGA_P, default).energy
    wider = te_plasma_classical(geom, T, GOLD_OMEGA_P, wide).energy
    assert base < 0
    assert abs(wider / base - 1) < 1e-6
    assert abs(clipped / base - 1) > 1e-6


def test_dump_and_m_decay():
    geom = SphereGeometry(2.0, 3.0, 0.2)
    path = os.path.join(tempfile.mkdtemp(), "terms.bin")
    result = te_plasma_classical(geom, T, GOLD_OMEGA_P, dump_path=path)
    records = read_logdet_terms(path)
    assert list(records["m"]) == list(range(len(records)))
    assert np.all(records["value"] < 0)
    assert result.m_max == records["m"][-1]
    tail = np.abs(records["value"][1:])
    assert np.all(tail[1:] < tail[:-1])


def _te_force(geom, omega_p, decimation, workers=4):
    plan = TruncationPlan.for_geometry(geom, decimation=decimation)
    return te_plasma_classical(geom, T, omega_p, plan, workers=workers).force


def test_large_plasma_frequency_approaches_neumann():
    # reduced radius over gap of 25, 50 and 100
    for radius, a in ((5.0, 0.1), (5.0, 0.05), (10.0, 0.05)):
        geom = SphereGeometry(radius, radius, a)
        plasma = te_plasma_classical(geom, T, 1e4, TruncationPlan.for_geometry(geom, decimation=None),
                                     workers=4)
        neumann = neumann_classical(bispherical_from_spheres(geom), T)
        assert abs(plasma.energy / neumann.energy - 1) < 5e-3, (radius, a)
        assert abs(plasma.force / neumann.force - 1) < 5e-3, (radius, a)


def test_light_decimation_error():
    geom = SphereGeometry(20.0, 20.0, 0.1)
    exact = _te_force(geom, GOLD_OMEGA_P, None)
    coarse = _te_force(geom, GOLD_OMEGA_P, (5, 5))
    assert abs(coarse / exact - 1) < 5e-3


def test_decimation_error_grows_with_block_size():
    # reduced radius over gap of 25, 50 and 100
    cases = (((5.0, 0.1), 2), ((10.0, 0.1), 2), ((20.0, 0.1), 5))
    for (radius, a), p in cases:
        geom = SphereGeometry(radius, radius, a)
        exact = _te_force(geom, GOLD_OMEGA_P, None)
        errors = [abs(_te_force(geom, GOLD_OMEGA_P, (q, q)) / exact - 1) for q in (p, 2 * p)]
        assert errors[0] <= errors[1], (radius, p, errors)


def test_decimation_error_shrinks_with_m():
    if not RUN_SLOW:
        print("⚠️  CASIMIR_RUN_SLOW not set - skipping the 50 um, 7x7 block run")
        return
    geom = SphereGeometry(50.0, 50.0, 0.1)
    exact_plan = TruncationPlan.for_geometry(geom, decimation=None)
    coarse_plan = TruncationPlan.for_geometry(geom, decimation=(7, 7))

    def m_force(m, plan):
        def energy(a):
            return _logdet_term(m, geom.with_gap(a), GOLD_OMEGA_P, plan)[0]
        return -richardson_derivatives(energy, geom.a, FD_STEP * geom.a).first

    errors = [abs(m_force(m, coarse_plan) / m_force(m, exact_plan) - 1) for m in range(4)]
    assert 5e-4 < errors[0] < 2e-3, errors
    assert all(later < earlier for earlier, later in zip(errors, errors[1:])), errors


def test_shifted_gap_decimation_failure_names_gap():
    geom = SphereGeometry(2.0, 3.0, 0.2)
    original = plasma_zero._terms_for

    def failing(ms, shifted, omega_p, plan, workers):
        if shifted.a != geom.a:
            raise DecimationError("decimation blocks too large", ms[0])
        return original(ms, shifted, omega_p, plan, workers)

    plasma_zero._terms_for = failing
    try:
        te_plasma_classical(geom, T, GOLD_OMEGA_P)
        assert False, "expected DecimationError"
    except DecimationError as e:
        assert e.m == 0
        assert "shifted gap" in str(e)
    finally:
        plasma_zero._terms_for = original


def test_mode_resolution():
    small = TruncationPlan.for_geometry(SphereGeometry(5.0, 5.0, 0.1))
    large = TruncationPlan.for_geometry(SphereGeometry(50.0, 50.0, 0.1))
    assert resolve_plasma_mode(small) == "exact"
    assert resolve_plasma_mode(large) == "pc_substitute"
    assert resolve_plasma_mode(large, "exact") == "exact"
    try:
        resolve_plasma_mode(small, "fast")
        assert False, "expected ValueError"
    except ValueError:
        pass


def test_plasma_total_parts():
    geom = SphereGeometry(2.0, 2.0, 0.2)
    total = plasma_classical_total(geom, T, GOLD_OMEGA_P, "isolated")
    assert set(total.parts) == {"TM", "TE"}
    assert total.force < 0
    assert abs(total.energy - total.parts["TM"].energy - total.parts["TE"].energy) < 1e-12 * abs(total.energy)


def main():
    """Run all plasma zero-frequency tests"""
    print("🧪 Testing plasma TE zero-frequency term...")
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
