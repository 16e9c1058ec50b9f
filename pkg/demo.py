"""
Demo script for the sphere-sphere Casimir calculator
Walks through the slab formulas, the zero-frequency solvers and the PFA deviations
"""

import asyncio
import math
import os

from scipy.special import zeta

from assembly import ModelSpec, deviation, weights
from bispherical_zero import asymptotic_drude, bispherical_from_spheres, dirichlet_classical
from de_positive import kappa_compute
from de_tables import get_table
from geometry import SphereGeometry
from lifshitz_pp import ALL_MODES, POSITIVE_ONLY, ZERO_ONLY, planar_quantities
from materials import PermittivityModel, thermal_length
from service import casimir_service

GOLD = PermittivityModel.drude(9.0, 0.035)

# beta_{n=0} for two isolated 10 um spheres, perfect conductor
PC_REFERENCE = {0.1: -1.98, 0.2: -1.72, 0.3: -1.57, 0.4: -1.46, 0.9: -1.17, 2.0: -0.89}


async def demo_planar():
    """Slab-slab quantities and the Matsubara split"""
    print("📐 Plane-parallel Lifshitz Demo")
    print("-" * 30)
    print(f"Thermal length at 300 K: {thermal_length(300.0):.4f} um")
    for a in (0.1, 0.5, 2.0):
        total = planar_quantities(a, 300.0, GOLD, GOLD, ALL_MODES)
        zero = planar_quantities(a, 300.0, GOLD, GOLD, ZERO_ONLY)
        positive = planar_quantities(a, 300.0, GOLD, GOLD, POSITIVE_ONLY)
        split = zero.free_energy_per_area + positive.free_energy_per_area
        print(f"✅ a={a:4} um  F={total.free_energy_per_area:.6e} eV/um^2  "
              f"P={total.pressure:.6e} eV/um^3  sum-rule gap={abs(split - total.free_energy_per_area):.1e}")


async def demo_tables():
    """Embedded coefficients against the recomputed curvature terms"""
    print("\n📊 Derivative-Expansion Tables Demo")
    print("-" * 30)
    for a in (0.2, 1.0, 2.0):
        row = get_table("drude").lookup(a)
        kappa, kappa_tilde = kappa_compute(a, 300.0, GOLD, GOLD)
        print(f"✅ a={a} um  theta={row['theta']:.3f}  kappa table/computed="
              f"{row['kappa']:.3f}/{kappa:.3f}  kappa_tilde table/computed="
              f"{row['kappa_tilde']:.3f}/{kappa_tilde:.3f}")


async def demo_asymptotics():
    """Near- and far-field laws of the grounded Drude classical force"""
    print("\n🔭 Zero-Frequency Asymptotics Demo")
    print("-" * 30)
    near = SphereGeometry(100.0, 100.0, 0.1)
    exact = dirichlet_classical(bispherical_from_spheres(near), 300.0)
    print(f"✅ near field: exact={exact.force:.6e}  law={asymptotic_drude(near, 300.0, 'grounded', 'near'):.6e} eV/um")
    print(f"   expected beta_n0 limit 1/(6 zeta(3)) = {1 / (6 * float(zeta(3))):.5f}")
    far = SphereGeometry(1.0, 1.0, 300.0)
    exact = dirichlet_classical(bispherical_from_spheres(far), 300.0)
    print(f"✅ far field:  exact={exact.force:.6e}  law={asymptotic_drude(far, 300.0, 'grounded', 'far'):.6e} eV/um")


async def demo_weights():
    """Classical share of the PFA force"""
    print("\n⚖️  Classical Weight Demo")
    print("-" * 30)
    for prescription in ("drude", "plasma"):
        model = ModelSpec(prescription=prescription)
        values = ", ".join(f"{a}: {weights(a, model)[0]:.3f}" for a in (0.1, 0.5, 2.0))
        print(f"✅ {prescription:7} w(a) = {values}")


async def demo_deviations():
    """Perfect-conductor classical deviations for two isolated 10 um spheres"""
    print("\n🧲 Deviation from PFA Demo")
    print("-" * 30)
    model = ModelSpec(prescription="pc", boundary="isolated")
    for a, reference in PC_REFERENCE.items():
        if a < 0.3 and os.getenv("CASIMIR_RUN_SLOW", "0") != "1":
            continue
        result = deviation(SphereGeometry(10.0, 10.0, a), model)
        print(f"✅ a={a} um  beta_n0={result.beta_n0:+.3f} (reference {reference:+.2f})  "
              f"beta={result.beta:+.3f}  beta_tilde={result.beta_tilde:+.3f}")


async def demo_service():
    """JSON service call, as used by the CLI and the web API"""
    print("\n🌐 Service Demo")
    print("-" * 30)
    result = await casimir_service.deviation({"R1_um": 50.0, "R2_um": 150.0, "gap_um": 0.5})
    if result["success"]:
        si = result["si"]
        print(f"✅ F={si['F_N']:.4e} N  F'={si['Fp_N_per_m']:.4e} N/m  beta={si['beta']:.3f}")
    else:
        print(f"❌ {result['error']}")


async def main():
    """Run all demos"""
    print("🧲 Sphere-Sphere Casimir Calculator - Demo")
    print("=" * 50)
    await demo_planar()
    await demo_tables()
    await demo_asymptotics()
    await demo_weights()
    await demo_deviations()
    await demo_service()
    print("\n" + "=" * 50)
    print("🎉 Demo completed!")
    print(f"   ideal-metal PFA prefactor pi^3/360 = {math.pi ** 3 / 360:.6f}")


if __name__ == "__main__":
    asyncio.run(main())
