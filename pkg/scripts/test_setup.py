#!/usr/bin/env python3
"""
Test the development setup
"""
import math
import os
import sys
import time

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)


def test_config():
    """Test configuration loading"""
    print("🧪 Testing configuration...")
    try:
        from app.config import settings
        print("✅ Config loaded successfully")
        print(f"   📱 App Name: {settings.APP_NAME}")
        print(f"   🌍 Environment: {settings.ENVIRONMENT}")
        print(f"   🔧 Truncation M: {settings.DEFAULT_M}")
        print(f"   📂 Output: {settings.OUTPUT_DIR}")
        return True
    except Exception as e:
        print(f"❌ Config test failed: {e}")
        return False


def test_numerics():
    """Test the numerical stack"""
    print("🧪 Testing numerical libraries...")
    try:
        import matplotlib
        import mpmath
        import numpy
        import scipy
        for name, module in (("numpy", numpy), ("scipy", scipy), ("mpmath", mpmath), ("matplotlib", matplotlib)):
            print(f"   ✅ {name} {module.__version__}")
        return True
    except ImportError as e:
        print(f"❌ Missing library: {e}")
        return False


def test_wave_solver():
    """Solve a small bifurcating wave"""
    print("🧪 Testing the profile solver...")
    try:
        from app.services.wave import WaveService
        start = time.perf_counter()
        solver = WaveService()
        wave = solver.newton_solve(solver.bifurcation_seed(1.0, 1e-2, M=16))
        elapsed = time.perf_counter() - start
        print(f"   🔍 T = {wave.T:.6f}, residual = {wave.residual_norm:.2e}, {wave.iterations} iterations")
        if wave.residual_norm <= 1e-10:
            print(f"✅ Wave solved in {elapsed:.2f}s")
            return True
        print("❌ Newton residual too large")
        return False
    except Exception as e:
        print(f"❌ Wave test failed: {e}")
        return False


def test_lattice_sums():
    """Compare a lattice sum with its Gaussian integral"""
    print("🧪 Testing lattice sums...")
    try:
        from app.services import riemann
        plain, weighted = riemann.sharpness_gap(2.0 * math.pi, 1.0, 16, 4.0)
        print(f"   🔍 plain gap {plain.gap:.3e}, weighted gap {weighted.gap:.3e}")
        print(f"   🔍 agreement with extended precision: {plain.agreement_digits:.1f} digits")
        print("✅ Lattice sums working")
        return True
    except Exception as e:
        print(f"❌ Lattice sum test failed: {e}")
        return False


def main():
    """Run all tests"""
    print("🧪 Development Setup Test Suite")
    print("=" * 50)
    print()

    tests = [
        ("Configuration Loading", test_config),
        ("Numerical Libraries", test_numerics),
        ("Profile Solver", test_wave_solver),
        ("Lattice Sums", test_lattice_sums),
    ]

    results = []

    for name, test_func in tests:
        print(f"📋 {name}")
        print("-" * 30)
        result = test_func()
        results.append(result)
        print()

    # Summary
    passed = sum(results)
    total = len(results)

    print("📊 Test Summary")
    print("=" * 30)
    print(f"✅ Passed: {passed}")
    print(f"❌ Failed: {total - passed}")
    print(f"📈 Success Rate: {passed}/{total} ({(passed/total*100):.1f}%)")
    print()

    if passed == total:
        print("🎉 All tests passed! Setup is working correctly.")
        print("🚀 Ready to run: python -m app.main pipeline --config run.yaml")
        return True
    else:
        print("⚠️ Some tests failed. Please check the setup.")
        print("💡 Make sure the dependencies are installed: pip install -r requirements.txt")
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
