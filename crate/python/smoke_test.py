"""Smoke test for the pywallforge extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/py

then run `python python/smoke_test.py`.
"""

import json

import pywallforge as wf


def check(label, got, expected):
    status = "ok" if got == expected else "FAILED"
    print(f"{status:6} {label}: {got!r}")
    if got != expected:
        raise SystemExit(f"{label}: expected {expected!r}")


def main():
    sl2 = wf.LieAlgebra.sl2()
    check("sl2 trivial homology", sl2.homology(), [1, 0, 0, 1])
    check("sl2 adjoint homology", sl2.homology("adjoint"), [0, 0, 0, 0])
    check("[e, f] in sl2", sl2.bracket([1, 0, 0], [0, 0, 1]), ["0", "1", "0"])

    heis = wf.LieAlgebra.heisenberg("1/3")
    check("Heisenberg homology", heis.homology(), [1, 2, 2, 1])
    same = wf.LieAlgebra.from_brackets(3, [(0, 1, [(2, "1/3")])])
    check("Heisenberg from brackets", same.bracket([1, 0, 0], [0, 1, 0]), ["0", "0", "1/3"])

    # The circle: two vertices, two edges, boundary head - tail.
    circle = wf.ChainComplex(0, [2, 2], [[[-1, 1], [1, -1]]])
    check("circle Betti numbers", circle.betti_numbers(), [1, 1])
    check("circle Euler characteristic", circle.euler_characteristic(), 0)
    try:
        wf.ChainComplex(0, [1, 1, 1], [[[1]], [[1]]])
    except ValueError as e:
        print(f"ok     d∘d != 0 refused: {e}")
    else:
        raise SystemExit("a non-complex was accepted")

    z3 = wf.FiniteGroup("Z3")
    check("|Z2xZ2|", wf.FiniteGroup("Z2xZ2").order, 4)
    check("Ext over Q[Z3]", z3.ext_trivial(3), [1, 0, 0, 0])

    wall = wf.WallAssembly.demo(wf.FiniteGroup("S3"), 3)
    cert = wall.certify()
    check("S3 wall certificate", cert["ok"], True)
    check("S3 wall total Betti = base Betti", cert["total_betti"][: len(cert["base_betti"])], cert["base_betti"])

    check("radius 3^(-1/4)", wf.radius_params(3, "-1/4", 1, 3), {"h": 1, "ell": 1, "in_sR": True, "m": 1})
    check("Gauss norm of 2x^2 + x", wf.gauss_norm(1, [([2], 2), ([1], 1)], 2, 1), "1")
    check("BCH coefficient of XY", wf.bch_coefficient("XY"), "1/2")
    check("BCH coefficient of XXY", wf.bch_coefficient("XXY"), "1/12")

    code, out, _ = wf.run(["ce-homology", "--builtin", "sl2"])
    doc = json.loads(out)
    check("CLI exit code", code, 0)
    check("CLI schema", doc["schema"], wf.SCHEMA)
    check("CLI result", doc["result"]["betti"], [1, 0, 0, 1])
    code, _, err = wf.run(["radius", "--p", "4", "--r", "-1/4", "--q", "4"])
    check("CLI rejects a non-prime", code, 1)

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
