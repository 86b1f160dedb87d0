#!/usr/bin/env python3
"""One-time symbolic derivation backing the built-in problem definitions.

Derives K = P^T D P, the four tensor partials used by the difference
operator moments, and the manufactured source f = -div(K grad u) for the
three built-in problems, then checks them against the closed forms frozen
into include/meshbench/problems.hpp. Run: python3 scripts/derive_problems.py
"""

import sympy as sp

x, y = sp.symbols("x y", real=True)


def rotation(theta):
    c, s = sp.cos(theta), sp.sin(theta)
    return sp.Matrix([[c, s], [-s, c]])


def divergence_form_f(K, u):
    flux = K * sp.Matrix([sp.diff(u, x), sp.diff(u, y)])
    return sp.simplify(-(sp.diff(flux[0], x) + sp.diff(flux[1], y)))


def check(label, expr, frozen):
    ok = sp.simplify(expr - frozen) == 0
    print(f"  {label}: {'ok' if ok else 'MISMATCH'}")
    if not ok:
        print(f"    derived: {sp.simplify(expr)}")
        raise SystemExit(1)


def report(name, K, u, frozen):
    print(name)
    f = divergence_form_f(K, u)
    check("K11", K[0, 0], frozen["K11"])
    check("K12", K[0, 1], frozen["K12"])
    check("K22", K[1, 1], frozen["K22"])
    check("dK11/dx", sp.diff(K[0, 0], x), sp.diff(frozen["K11"], x))
    check("dK12/dy", sp.diff(K[0, 1], y), sp.diff(frozen["K12"], y))
    check("dK12/dx", sp.diff(K[0, 1], x), sp.diff(frozen["K12"], x))
    check("dK22/dy", sp.diff(K[1, 1], y), sp.diff(frozen["K22"], y))
    # the code composes f from K, dK and the u derivatives; verify that
    # composition against the direct symbolic divergence
    ux, uy = sp.diff(u, x), sp.diff(u, y)
    composed = -(frozen["K11"] * sp.diff(u, x, 2)
                 + 2 * frozen["K12"] * sp.diff(sp.diff(u, x), y)
                 + frozen["K22"] * sp.diff(u, y, 2)
                 + (sp.diff(frozen["K11"], x) + sp.diff(frozen["K12"], y)) * ux
                 + (sp.diff(frozen["K12"], x) + sp.diff(frozen["K22"], y)) * uy)
    check("f composition", f, composed)
    print(f"  f = {f}")


def main():
    # problem 1: K = I, u = 2 exp(2x + y)
    u1 = 2 * sp.exp(2 * x + y)
    f1 = sp.simplify(-(sp.diff(u1, x, 2) + sp.diff(u1, y, 2)))
    print("problem 1")
    check("f", f1, -10 * sp.exp(2 * x + y))
    print(f"  f = {f1}")

    # problem 2: rotation pi/8, D = diag(1+2x^2+y^2, 1+x^2+2y^2)
    u23 = sp.sin(sp.pi * x) * sp.sin(sp.pi * y)
    P2 = rotation(sp.pi / 8)
    K2 = sp.simplify(P2.T * sp.diag(1 + 2 * x**2 + y**2, 1 + x**2 + 2 * y**2) * P2)
    c2, s2 = sp.cos(sp.pi / 8) ** 2, sp.sin(sp.pi / 8) ** 2
    cs = sp.cos(sp.pi / 8) * sp.sin(sp.pi / 8)
    report("problem 2", K2, u23, {
        "K11": 1 + (1 + c2) * x**2 + (1 + s2) * y**2,
        "K12": cs * (x**2 - y**2),
        "K22": 1 + (1 + s2) * x**2 + (1 + c2) * y**2,
    })

    # problem 3: rotation pi/4, D = diag(1+2x^2+y^2+y^5, 1+x^2+2y^2+x^3)
    P3 = rotation(sp.pi / 4)
    K3 = sp.simplify(P3.T * sp.diag(1 + 2 * x**2 + y**2 + y**5,
                                    1 + x**2 + 2 * y**2 + x**3) * P3)
    diag = 1 + sp.Rational(3, 2) * x**2 + sp.Rational(3, 2) * y**2 + (x**3 + y**5) / 2
    report("problem 3", K3, u23, {
        "K11": diag,
        "K12": (x**2 - y**2 + y**5 - x**3) / 2,
        "K22": diag,
    })

    # reference values frozen into the unit tests
    pt = {x: sp.Rational(1, 2), y: sp.Rational(1, 2)}
    m = [sp.Integer(0),
         -(sp.diff(K2[0, 0], x) + sp.diff(K2[0, 1], y)).subs(pt),
         -(sp.diff(K2[0, 1], x) + sp.diff(K2[1, 1], y)).subs(pt),
         (-2 * K2[0, 0]).subs(pt), (-2 * K2[0, 1]).subs(pt), (-2 * K2[1, 1]).subs(pt)]
    print("problem 2 operator moments at (1/2, 1/2):")
    print(" ", [sp.nsimplify(v) for v in m])
    print(" ", [float(sp.N(v, 20)) for v in m])


if __name__ == "__main__":
    main()
