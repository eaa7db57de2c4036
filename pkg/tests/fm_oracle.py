"""Independent feasibility oracle: Fourier-Motzkin elimination.

Deliberately shares no code with the package solver (which reduces by
Gaussian elimination and runs a phase-one simplex).  Everything here
works on "a . x <= b" rows in exact rationals: equalities enter as two
opposite inequalities, nonnegativity as -x_i <= 0, and variables are
eliminated one at a time - smallest positive*negative row product first,
which keeps these structured systems from blowing up.
"""

from __future__ import annotations

from fractions import Fraction

ZERO = Fraction(0)


class OracleBlowup(RuntimeError):
    pass


def _normalize(coeffs: tuple[Fraction, ...], rhs: Fraction):
    scale = next((abs(c) for c in coeffs if c != 0), None)
    if scale is None:
        return coeffs, rhs
    return tuple(c / scale for c in coeffs), rhs / scale


def fm_feasible(n_vars: int, equalities, row_cap: int = 200_000) -> bool:
    """Feasibility of {A x = b, x >= 0} by pure elimination.

    `equalities` is a list of (coeff dict, rhs).  Raises OracleBlowup if
    an elimination round would exceed `row_cap` rows.
    """
    work: set[tuple[tuple[Fraction, ...], Fraction]] = set()

    def add(coeffs: tuple[Fraction, ...], rhs: Fraction) -> bool:
        """Insert a row unless trivially true; False on a contradiction."""
        coeffs, rhs = _normalize(coeffs, rhs)
        if all(c == 0 for c in coeffs):
            return rhs >= 0
        work.add((coeffs, rhs))
        return True

    for coeffs, rhs in equalities:
        dense = tuple(coeffs.get(j, ZERO) for j in range(n_vars))
        if not add(dense, rhs):
            return False
        if not add(tuple(-c for c in dense), -rhs):
            return False
    for j in range(n_vars):
        add(tuple(Fraction(-1) if i == j else ZERO for i in range(n_vars)), ZERO)

    remaining = set(range(n_vars))
    while remaining:
        # cheapest variable first: fewest combination products
        def cost(v: int) -> int:
            pos = sum(1 for c, _ in work if c[v] > 0)
            neg = sum(1 for c, _ in work if c[v] < 0)
            return pos * neg

        var = min(sorted(remaining), key=cost)
        remaining.discard(var)
        pos = []
        neg = []
        rest: set[tuple[tuple[Fraction, ...], Fraction]] = set()
        for coeffs, rhs in work:
            c = coeffs[var]
            if c > 0:
                pos.append((coeffs, rhs))
            elif c < 0:
                neg.append((coeffs, rhs))
            else:
                rest.add((coeffs, rhs))
        if len(pos) * len(neg) + len(rest) > row_cap:
            raise OracleBlowup(
                f"eliminating variable {var} would combine {len(pos)}x{len(neg)} rows"
            )
        work = rest
        for pc, pr in pos:
            inv_p = 1 / pc[var]
            for nc, nr in neg:
                inv_n = -1 / nc[var]
                combined = tuple(a * inv_p + b * inv_n for a, b in zip(pc, nc))
                combined, crhs = _normalize(combined, pr * inv_p + nr * inv_n)
                if all(c == 0 for c in combined):
                    if crhs < 0:
                        return False
                else:
                    work.add((combined, crhs))
    return all(rhs >= 0 for _, rhs in work)
