"""Exact rational feasibility of {A x = b, x >= 0}.

Small systems only (tens of variables).  Equalities are first reduced by
Gauss-Jordan elimination over Fractions, which catches inconsistencies
and drops redundant rows; the reduced system is then handed to a
phase-one simplex with Bland's rule.  Variable order and all tie-breaks
are lexicographic, so the returned point is deterministic for a given
equation list.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)

# an equation is (coeffs, rhs) with coeffs a {var_index: Fraction} dict
Equation = tuple[dict[int, Fraction], Fraction]


def dedup_equations(equations: Sequence[Equation]) -> list[Equation]:
    """Drop duplicate equations after scaling the leading coefficient to 1."""
    seen: set[tuple] = set()
    out: list[Equation] = []
    for coeffs, rhs in equations:
        items = sorted((v, c) for v, c in coeffs.items() if c != 0)
        if not items:
            if rhs != 0:
                # normalized contradiction: keep one representative
                key = ("contradiction",)
                if key not in seen:
                    seen.add(key)
                    out.append(({}, ONE))
            continue
        lead = items[0][1]
        key = (tuple((v, c / lead) for v, c in items), rhs / lead)
        if key not in seen:
            seen.add(key)
            out.append((dict(items), rhs))
    return out


def _gauss_reduce(n_vars: int, equations: Sequence[Equation]) -> list[list[Fraction]] | None:
    """Row-reduce [A | b]; returns independent rows, or None if inconsistent."""
    rows = [[eq[0].get(j, ZERO) for j in range(n_vars)] + [eq[1]] for eq in equations]
    pivots: list[list[Fraction]] = []
    pivot_cols: list[int] = []
    for row in rows:
        # eliminate against existing pivots
        for prow, pcol in zip(pivots, pivot_cols):
            f = row[pcol]
            if f != 0:
                for j in range(n_vars + 1):
                    row[j] -= f * prow[j]
        col = next((j for j in range(n_vars) if row[j] != 0), None)
        if col is None:
            if row[n_vars] != 0:
                return None
            continue
        inv = ONE / row[col]
        row = [v * inv for v in row]
        # back-substitute into earlier pivots to keep them reduced
        for prow in pivots:
            f = prow[col]
            if f != 0:
                for j in range(n_vars + 1):
                    prow[j] -= f * row[j]
        pivots.append(row)
        pivot_cols.append(col)
    return pivots


def solve_nonneg(n_vars: int, equations: Sequence[Equation]) -> list[Fraction] | None:
    """A nonnegative solution of the equality system, or None if infeasible."""
    reduced = _gauss_reduce(n_vars, dedup_equations(equations))
    if reduced is None:
        return None
    if not reduced:
        return [ZERO] * n_vars

    # phase-one simplex: minimize sum of artificials over the reduced rows
    rows = []
    for row in reduced:
        if row[n_vars] < 0:
            row = [-v for v in row]
        rows.append(row)
    m = len(rows)
    # tableau columns: n_vars structural + m artificial + rhs
    width = n_vars + m + 1
    tab = []
    for i, row in enumerate(rows):
        trow = row[:n_vars] + [ZERO] * m + [row[n_vars]]
        trow[n_vars + i] = ONE
        tab.append(trow)
    basis = [n_vars + i for i in range(m)]
    # reduced cost row for min sum(artificials): c_j - sum over rows
    cost = [ZERO] * width
    for j in range(width):
        cost[j] = -sum(tab[i][j] for i in range(m))
    for i in range(m):
        cost[n_vars + i] += ONE

    while True:
        enter = next((j for j in range(n_vars + m) if cost[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][width - 1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            # unbounded cannot happen for a sum of nonnegative artificials
            raise RuntimeError("phase-one simplex reported unbounded objective")
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [v - f * p for v, p in zip(tab[i], tab[leave])]
        f = cost[enter]
        if f != 0:
            cost = [v - f * p for v, p in zip(cost, tab[leave])]
        basis[leave] = enter

    residual = sum(tab[i][width - 1] for i in range(m) if basis[i] >= n_vars)
    if residual != 0:
        return None
    x = [ZERO] * n_vars
    for i, b in enumerate(basis):
        if b < n_vars:
            x[b] = tab[i][width - 1]
    return x
