"""Smoke test for the nested_schur_py extension module.

Build and run from the repository root:

    cargo build --release -p nested-schur-py --features extension-module
    python3 python/smoke_test.py

The script looks for the compiled library in target/release when the module
is not already importable.
"""

import importlib.util
import math
import pathlib
import random
import shutil
import sys
import tempfile


def load_module():
    try:
        import nested_schur_py

        return nested_schur_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for name in ("libnested_schur_py.so", "libnested_schur_py.dylib", "nested_schur_py.dll"):
        lib = root / "target" / "release" / name
        if lib.exists():
            break
    else:
        sys.exit("build the extension first: cargo build --release -p nested-schur-py --features extension-module")
    tmp = pathlib.Path(tempfile.mkdtemp())
    target = tmp / ("nested_schur_py.pyd" if lib.suffix == ".dll" else "nested_schur_py.so")
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("nested_schur_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def norm(v):
    return math.sqrt(sum(x * x for x in v))


def main():
    ns = load_module()

    total, n, m = ns.dof_counts(20, 20, 12)
    assert (total, n, m) == (45565, 34398, 11167), (total, n, m)

    p = ns.Problem(6, 6, 4)
    assert p.dim == p.n + p.m and p.m > 0
    print(p)

    # The residual of a returned solution, recomputed here through the
    # bindings, must agree with the reported one.
    gamma = 0.012
    b = p.random_rhs(gamma, seed=7)
    x, rep = p.solve_nested(b, gamma=gamma, tol=1e-10)
    ax = p.shifted_matvec(x, gamma)
    res = norm([u - v for u, v in zip(ax, b)]) / norm(b)
    assert rep.converged and res <= 1e-9, (rep, res)
    assert abs(res - rep.residual) <= 1e-12
    print("nested:", rep)

    y, rep_fs = p.solve_fs(b, gamma=gamma, tol=1e-10)
    assert rep_fs.converged
    diff = norm([u - v for u, v in zip(x, y)]) / norm(x)
    assert diff <= 1e-8, diff
    print("fs:", rep_fs)

    # 𝒜 is linear.
    rng = random.Random(1)
    u = [rng.gauss(0, 1) for _ in range(p.dim)]
    v = [rng.gauss(0, 1) for _ in range(p.dim)]
    lhs = p.matvec([a + 2 * c for a, c in zip(u, v)])
    rhs = [a + 2 * c for a, c in zip(p.matvec(u), p.matvec(v))]
    assert norm([a - c for a, c in zip(lhs, rhs)]) <= 1e-10 * norm(rhs)

    ritz = p.ritz("nested", gamma=gamma, steps=12)
    assert len(ritz) == 12 and all(isinstance(z, complex) for z in ritz)
    assert min(z.real for z in ritz) > 0.5

    try:
        p.matvec([1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("wrong-length input must raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
