"""Smoke test for the Python bindings.

Build the extension first:

    cargo build --release -p lsq-obstacle-py --features extension-module

The script copies target/release/liblsq_obstacle_py.so to a temporary
directory as lsq_obstacle.so and imports it from there.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    for name in ("liblsq_obstacle_py.so", "liblsq_obstacle_py.dylib", "lsq_obstacle_py.dll"):
        built = ROOT / "target" / "release" / name
        if built.exists():
            break
    else:
        sys.exit("extension not built; run cargo build --release -p lsq-obstacle-py --features extension-module")
    tmp = Path(tempfile.mkdtemp())
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy(built, tmp / ("lsq_obstacle" + suffix))
    sys.path.insert(0, str(tmp))
    import lsq_obstacle

    return lsq_obstacle


def main():
    lo = load()
    assert set(lo.EXAMPLES) == {"smooth", "lshape", "pyramid"}

    mesh = lo.Mesh.structured("unit_square", 4)
    assert mesh.n_elements == 32
    fine = mesh.refine([0, 5])
    assert fine.n_elements > mesh.n_elements and fine.is_conforming()
    assert abs(fine.total_area() - 1.0) < 1e-12
    assert lo.Mesh.from_text(fine.to_text()).n_elements == fine.n_elements

    sol = lo.solve("smooth", mesh.refine_uniform(), form="A", set="Ks")
    est, eta, rho, osc = sol.estimate()
    assert abs(est**2 - (eta**2 + rho**2 + osc**2)) <= 1e-12 * est**2
    err_u, err_v = sol.errors()
    assert err_u > 0 and err_v > 0
    assert min(sol.lambda_) >= -1e-9
    assert len(sol.local_estimates()) == 128
    print(f"solve: {sol.iterations} iterations, est {est:.3e}, errU {err_u:.3e}")

    try:
        lo.validate("smooth", "A", "K1")
    except ValueError as e:
        assert "admissible" in str(e)
    else:
        raise AssertionError("A/K1 accepted")

    levels = lo.run("smooth", mode="uniform", max_levels=4)
    n = [lv.n_elements for lv in levels]
    e = [lv.err_norm_u for lv in levels]
    rate = lo.fit_rate(n[-3:], e[-3:])
    assert 0.4 <= rate <= 0.6, rate
    print(f"uniform run: {len(levels)} levels, errU rate {rate:.3f}")

    adaptive = lo.run("pyramid", max_dofs=3000)
    assert all(lv.err_norm_u is None for lv in adaptive)
    assert all(lv.osc_f == 0.0 for lv in adaptive)
    assert lo.doerfler_mark([4.0, 3.0, 2.0, 1.0], 0.5) == [0, 1]
    assert math.isclose(lo.fit_rate([100, 400], [1.0, 0.5]), 0.5)
    print("ok")


if __name__ == "__main__":
    main()
