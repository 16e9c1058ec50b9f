"""
Setup script for the sphere-sphere Casimir calculator
"""

import os
import shutil
import subprocess
import sys

def install_requirements():
    """Install required packages"""
    print("📦 Installing requirements...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
        print("✅ Requirements installed successfully!")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install requirements: {e}")
        return False

def create_env_file():
    """Create .env from env_example.txt if it doesn't exist"""
    if os.path.exists('.env'):
        print("✅ .env file already exists!")
        return True
    print("📝 Creating .env file...")
    shutil.copyfile('env_example.txt', '.env')
    print("✅ .env file created with default material parameters.")
    return True

def check_numerical_stack():
    """Smoke-check numpy/scipy with a known closed form"""
    print("🔍 Checking numerical stack...")
    try:
        import math
        from lifshitz_pp import polylog2
        from materials import thermal_length

        li2 = float(polylog2(1.0))
        if abs(li2 - math.pi ** 2 / 6) > 1e-12:
            print(f"⚠️  Li2(1) = {li2}, expected pi^2/6")
            return False
        print(f"✅ scipy OK, thermal length at 300 K = {thermal_length(300.0):.4f} um")
        return True
    except Exception as e:
        print(f"❌ Numerical stack check failed: {e}")
        return False

def main():
    """Main setup function"""
    print("🧲 Sphere-sphere Casimir calculator setup")
    print("=" * 40)

    if not install_requirements():
        return False

    if not create_env_file():
        return False

    stack_ok = check_numerical_stack()

    print("\n" + "=" * 40)
    print("🎉 Setup completed!")
    print("\nNext steps:")
    print("1. Edit .env to change default temperature or material parameters")
    print("2. Run a sweep:")
    print("   python casimir.py sweep --config sweep_config.json")
    print("\nOr start the web API:")
    print("   python web_interface.py")

    if not stack_ok:
        print("\n⚠️  Note: the numerical smoke check failed; check your scipy install.")

    return stack_ok

if __name__ == "__main__":
    if len(sys.argv) > 1:
        # Invoked by a build frontend (pip/setuptools): metadata lives in pyproject.toml
        from setuptools import setup
        setup()
    else:
        main()
