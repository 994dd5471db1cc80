"""Smoke test for the Python bindings.

Build first with `cargo build -p dgcomplex-python --release` (or install with
maturin from crates/python). The script imports an installed `dgcomplex_py`
when available and otherwise loads the shared library from target/.
"""

import importlib.machinery
import importlib.util
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import dgcomplex_py

        return dgcomplex_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("libdgcomplex_py.so", "libdgcomplex_py.dylib", "dgcomplex_py.dll"):
            path = ROOT / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("dgcomplex_py", str(path))
                spec = importlib.util.spec_from_file_location("dgcomplex_py", path, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("dgcomplex_py not found; run `cargo build -p dgcomplex-python` first")


def main():
    dg = load()

    mesh = dg.Mesh("cartesian", 6)
    assert mesh.n_cells == 36 and mesh.validate(), mesh
    assert abs(mesh.h_min - 1.0 / 6.0) < 1e-12
    again = dg.Mesh.from_text(mesh.to_text())
    assert again.n_cells == mesh.n_cells

    tri = dg.Mesh("triangles", 4, seed=42)
    assert tri.n_cells == 32 and tri.validate()

    r = dg.run("maxwell_stationary", tri, 1, "dBcurl", "godunov", t_final=0.2)
    assert r.steps > 0 and r.max_drift() <= 1e-11, r
    assert all(e <= 1.0 + 1e-12 for e in r.energy)

    r = dg.run("wave_wavetrain", mesh, 1, "dBdiv", "godunov", t_final=0.1)
    assert set(r.errors) == {"p", "u_x", "u_y"}
    assert all(math.isfinite(e) for e in r.errors.values())

    small = dg.Mesh("cartesian", 2)
    assert dg.betti_numbers(small, 1) == (1, 2, 1)
    checks = dg.properties(small, [0, 1])
    failed = [c for c in checks if not c[4]]
    assert not failed, failed

    rates, slope = dg.convergence_rates([0.1, 0.05], [1e-2, 2.5e-3])
    assert abs(rates[0] - 2.0) < 1e-12 and abs(slope - 2.0) < 1e-12

    try:
        dg.run("no_such_case", mesh, 1, "dBdiv", "godunov")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown case accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
