"""Smoke test for the llasym_py extension.

Uses an installed module if present, otherwise the library produced by
`cargo build --release -p llasym-py`.
"""

import importlib
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    try:
        return importlib.import_module("llasym_py")
    except ImportError:
        pass
    for name in ("libllasym_py.so", "libllasym_py.dylib", "llasym_py.dll"):
        lib = os.path.join(ROOT, "target", "release", name)
        if os.path.exists(lib):
            tmp = tempfile.mkdtemp()
            ext = ".pyd" if name.endswith(".dll") else ".so"
            shutil.copy(lib, os.path.join(tmp, "llasym_py" + ext))
            sys.path.insert(0, tmp)
            return importlib.import_module("llasym_py")
    sys.exit("llasym_py not found; run `cargo build --release -p llasym-py` first")


def main():
    m = load()

    d = m.dress(1e6, 1.0)
    assert abs(d["q"] - 1.0) < 1e-5, d["q"]
    assert abs(d["v_f"] - 2.0) < 1e-4
    assert len(d["lambda"]) == 96
    assert d["z_identity_residual"] < 1e-7

    s = m.saddle(1.0, 1.0, 1.0)
    assert s["regime"] == "time-like" and s["u_second"] < 0

    terms, rho = m.expansion(1e6, 1.0, 0.1, points=[(10.0, 1.0), (20.0, 2.0)], max_abs_ell=1)
    by_label = {t.label: t for t in terms}
    zf = by_label["zero_freq"]
    assert abs(zf.exponent_plus - 0.25) < 1e-5 and abs(zf.exponent_minus - 0.25) < 1e-5
    assert zf.amplitude is not None and zf.amplitude > 0
    assert all(t.amplitude is None for t in terms if t.label.startswith("harmonic"))
    assert len(rho) == 2 and all(isinstance(v, complex) and math.isfinite(abs(v)) for v in rho)

    try:
        m.dress(-1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative coupling accepted")

    checks = m.verify()
    assert len(checks) >= 12 and all(c[3] for c in checks), [c for c in checks if not c[3]]
    bad = [c[0] for c in m.verify(perturb=1e-3) if not c[3]]
    assert bad and all(n.startswith("z_") for n in bad), bad

    print("smoke test passed: %d checks, rho(10, 1) = %.6f%+.6fj" % (len(checks), rho[0].real, rho[0].imag))


if __name__ == "__main__":
    main()
