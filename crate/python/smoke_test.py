"""Smoke test for the pychemofv extension module.

Build the module first, e.g.

    cargo build --release -p pychemofv
    cp target/release/libpychemofv.so python/pychemofv.so
    python3 python/smoke_test.py

or install it with `maturin develop -m crates/python/Cargo.toml`.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pychemofv as cf


def main():
    names = cf.preset_names()
    assert "test1-desk" in names, names

    mesh = cf.Mesh((0.0, 1.0), (0.0, 2.0), 4, 5)
    assert mesh.num_cells == 20
    assert abs(mesh.total_measure() - 2.0) < 1e-12
    assert cf.discrete_norm([1.0] * 20, mesh, 2.0) > 0.0

    assert cf.limiter_s(1.0, 1.0, 0.0, 0.5) == 0.25
    assert cf.limiter_s(1.0, 1.0, 0.0, 5.0) == 5.0
    beta = cf.beta_n([1.0, 2.0], [1.5, 1.0])
    assert 0.0 <= beta <= 1.0, beta

    result = cf.run("test1-desk", dt=0.05, t_final=0.25, nx=12, ny=10, strict=True)
    assert result.steps == 5
    assert min(result.u) >= 0.0
    drift = max(abs(m - result.mass[0]) for m in result.mass)
    assert drift <= 1e-10 * result.mass[0], drift
    assert result.checked_matrices > 0

    corrected, plain = cf.oracle_check("test1-desk", 0.1, nx=8, ny=8)
    assert corrected <= plain, (corrected, plain)

    rows = cf.convergence_study("test1-desk", [0.1, 0.05], 0.01, t_final=0.2, nx=8, ny=8)
    assert len(rows) == 4
    assert all(math.isfinite(err) for _, _, err, _ in rows)

    try:
        cf.run("no-such-preset")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown preset accepted")

    print(f"pychemofv {cf.__version__}: smoke test ok ({result!r})")


if __name__ == "__main__":
    main()
