"""Independent reference computations, written in sympy without using starsep.

wick_coefficients
    Brute-force solve for a product on flat C^1 with constant coefficients.
    On exponentials ``e_i = exp(p_i zbar + q_i z)`` such a product acts as
    ``e_1 * e_2 = P(p_1, q_2) e_1 e_2`` with
    ``P(x, y) = 1 + sum_r nu^r sum_{a,b} c[r, a, b] x^a y^b``. Separation of
    variables and the unit axiom restrict to ``a, b >= 1``; associativity is
    ``P(p1, q2) P(p1 + p2, q3) = P(p2, q3) P(p1, q2 + q3)``. The normalization
    ``zbar * g = zbar g + nu dg/dz`` (left multiplication by the derivative of
    the potential ``z zbar / nu``) fixes the remaining freedom.

cp1_c2
    The second cochain for the potential ``log(1 + z zbar) / nu`` on the
    standard chart of the sphere, derived by hand: with ``G = (1 + z zbar)^2``
    and ``G' = dG/dzbar``, ``A_2 = (G^2 F_2 / 2 + G G' F_1 / 2) d^2 +
    (2 zbar / (1 + z zbar)) (G^2 F_2 / 2 + G G' F_1 / 2) d`` where ``F_k`` is
    the ``k``-th antiholomorphic derivative of the left argument. Associativity
    alone leaves a multiple of ``C_1`` free at this order (it is the freedom of
    the order-0 potential), so the formula is compared exactly.
"""

from __future__ import annotations

import sympy as sp


def wick_coefficients(order: int) -> dict[tuple[int, int, int], sp.Rational]:
    """``{(r, a, b): c}`` for ``1 <= r <= order``; ``C_r(f, g) = sum c dzbar^a f dz^b g``."""
    p1, p2, q2, q3, nu = sp.symbols("p1 p2 q2 q3 nu")
    known: dict[tuple[int, int, int], sp.Expr] = {}

    def P(x, y, upto, unknown=None):
        s = sp.Integer(1)
        for (r, a, b), c in known.items():
            if r <= upto:
                s += nu**r * c * x**a * y**b
        if unknown is not None:
            r, table = unknown
            s += nu**r * sum(c * x**a * y**b for (a, b), c in table.items())
        return s

    for r in range(1, order + 1):
        table = {(a, b): sp.Symbol(f"c_{r}_{a}_{b}") for a in range(1, r + 1) for b in range(1, r + 1)}
        left = P(p1, q2, r, (r, table)) * P(p1 + p2, q3, r, (r, table))
        right = P(p2, q3, r, (r, table)) * P(p1, q2 + q3, r, (r, table))
        eq = sp.expand(left - right).coeff(nu, r)
        equations = sp.Poly(eq, p1, p2, q2, q3).coeffs() if eq != 0 else []
        # zbar * g: only a = 1 survives on the left argument zbar (p1-linear part)
        for b in range(1, r + 1):
            equations.append(table[(1, b)] - (1 if (r, b) == (1, 1) else 0))
        sol = sp.solve(equations, list(table.values()), dict=True)
        if len(sol) != 1:
            raise AssertionError(f"order {r}: expected a unique solution, got {sol}")
        for key, sym in table.items():
            value = sol[0].get(sym, sym)
            if value.free_symbols:
                raise AssertionError(f"order {r}: coefficient {sym} left undetermined")
            known[(r,) + key] = sp.nsimplify(value)
    return {k: v for k, v in known.items() if v != 0}


def cp1_c2():
    """``{(a, b): sympy coefficient}`` of ``C_2`` for ``log(1 + z zbar) / nu``."""
    z, w = sp.symbols("z1 w1")
    G = (1 + z * w) ** 2
    Gp = sp.diff(G, w)
    top = {2: G**2 / 2, 1: G * Gp / 2}
    lower = {k: sp.factor(2 * w / (1 + z * w) * v) for k, v in top.items()}
    out = {}
    for a, v in top.items():
        out[(a, 2)] = sp.factor(v)
    for a, v in lower.items():
        out[(a, 1)] = v
    return out


def cp1_associator_order2(c1, c2, f, g, h):
    """``nu^2`` coefficient of ``(f * g) * h - f * (g * h)`` for sympy bidifferential callables."""
    def star(u, v):
        return [u * v, c1(u, v), c2(u, v)]

    def star_series(a, b):
        out = [0, 0, 0]
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                for k, t in enumerate(star(ai, bj)):
                    if i + j + k <= 2:
                        out[i + j + k] += t
        return out

    fg = star_series([f], [g])
    gh = star_series([g], [h])
    return sp.simplify(star_series(fg, [h])[2] - star_series([f], gh)[2])
