"""Smoke test for the Python extension.

Build first:
    cargo build --release -p viscosity-py --features extension-module
then run:
    python3 python/smoke_test.py [path/to/libviscosity_py.so]
"""

import importlib.util
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load(path=None):
    if path is None:
        for profile in ("release", "debug"):
            cand = ROOT / "target" / profile / "libviscosity_py.so"
            if cand.exists():
                path = cand
                break
        else:
            sys.exit("extension not built; see the docstring")
    # The init symbol is PyInit_viscosity, so the file must be named accordingly.
    tmp = Path(tempfile.mkdtemp()) / "viscosity.so"
    shutil.copy(path, tmp)
    spec = importlib.util.spec_from_file_location("viscosity", tmp)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def check(name, ok, info=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {info}")
    return ok


def main():
    v = load(sys.argv[1] if len(sys.argv) > 1 else None)
    results = []

    g = v.Grid([0.0], [1.0], [201])
    results.append(check("grid", len(g) == 201 and g.dim == 1 and abs(g.h - 0.005) < 1e-15))

    eps = 0.01
    op = v.Operator.from_callable(1, lambda x, r, p, X: -eps * X[0][0] + p[0] + r - x[0] - 1, name="neumann", gamma=1.0)
    res = v.solve(op, g, v.Boundary.neumann(1), method="newton", residual_tol=1e-10)
    err = max(abs(u - v.closed_form("neumann-exact", x, eps)) for u, x in zip(res["u"], g.points()))
    results.append(check("python operator solve", res["converged"] and err < 1e-2, f"error {err:.3e}"))

    hjb = v.Operator.catalog("hjb", 2)
    g2 = v.Grid([-1.0, -1.0], [1.0, 1.0], [17, 17])
    res2 = v.solve(hjb, g2, v.Boundary.dirichlet(2, 0.0))
    results.append(check("catalog solve", res2["converged"], f"iters {res2['iters']}"))
    results.append(check("catalog proper", hjb.check_proper(500, 1)[0]))

    g3 = v.Grid([-1.0], [1.0], [101])
    eik = v.Operator.from_callable(1, lambda x, r, p, X: p[0] ** 2 - 1, first_order=True)
    ok_kink, _ = v.certify(eik, g3, g3.sample(lambda x: -abs(x[0])))
    bad_kink, nodes = v.certify(eik, g3, g3.sample(lambda x: abs(x[0])), side="super")
    results.append(check("certify", ok_kink and not bad_kink and 50 in nodes))

    gc = v.Grid([-1.2, -1.2], [1.2, 1.2], [81, 81])
    psi = gc.sample(lambda x: math.hypot(x[0], x[1]) - 0.8)
    states = v.mean_curvature_flow(gc, psi, 0.05, snapshots=[0.025])
    worst = max(abs(rad - math.sqrt(0.64 - 2 * t)) for t, _, rad in states)
    results.append(check("shrinking circle", len(states) == 3 and worst < 0.03, f"radius error {worst:.3e}"))

    gs = v.Grid([-2.0], [2.0], [101])
    src = gs.sample(lambda x: -abs(x[0]))
    conv = v.sup_convolution(gs, src, 4.0)
    results.append(check("sup-convolution dominates", all(c >= s for c, s in zip(conv, src))))

    cap = g3.sample(lambda x: 1 - x[0] ** 2)
    table, chain = v.doubling(g3, cap, [0.0] * len(g3), [1.0, 2.0, 4.0, 8.0])
    results.append(check("doubling chain", chain and len(table) == 4))

    if not all(results):
        sys.exit(1)
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
