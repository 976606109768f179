"""Exact rational feasibility LP (two-phase tableau simplex, Bland's rule)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Number = int | Fraction


def feasible_point(n: int,
                   a_eq: Sequence[Sequence[Number]] = (),
                   b_eq: Sequence[Number] = (),
                   a_ub: Sequence[Sequence[Number]] = (),
                   b_ub: Sequence[Number] = (),
                   lower: Sequence[Number] | Number = 0) -> list[Fraction] | None:
    r"""
    Return an exact point ``x`` with ``a_eq x = b_eq``, ``a_ub x <= b_ub`` and
    ``x >= lower``, or ``None`` if the system is infeasible.

    EXAMPLES::

        >>> feasible_point(2, a_eq=[[1, -1]], b_eq=[0], lower=1)
        [Fraction(1, 1), Fraction(1, 1)]
        >>> feasible_point(1, a_ub=[[1]], b_ub=[0], lower=1) is None
        True
    """
    lo = [Fraction(lower)] * n if not isinstance(lower, (list, tuple)) else [Fraction(x) for x in lower]
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for row, b in zip(a_eq, b_eq):
        r = [Fraction(x) for x in row]
        rows.append(r)
        rhs.append(Fraction(b) - sum(ri * li for ri, li in zip(r, lo)))
        kinds.append("eq")
    for row, b in zip(a_ub, b_ub):
        r = [Fraction(x) for x in row]
        rows.append(r)
        rhs.append(Fraction(b) - sum(ri * li for ri, li in zip(r, lo)))
        kinds.append("ub")
    m = len(rows)
    if m == 0:
        return lo
    n_slack = kinds.count("ub")
    width = n + n_slack + m  # originals, slacks, artificials
    tab: list[list[Fraction]] = []
    basis: list[int] = []
    s = 0
    for i in range(m):
        t = [Fraction(0)] * (width + 1)
        t[:n] = rows[i]
        if kinds[i] == "ub":
            t[n + s] = Fraction(1)
            s += 1
        if rhs[i] < 0:
            t = [-x for x in t]
            t[width] = -rhs[i]
        else:
            t[width] = rhs[i]
        t[n + n_slack + i] = Fraction(1)
        tab.append(t)
        basis.append(n + n_slack + i)
    # phase 1 objective: minimise the sum of artificials
    art0 = n + n_slack
    obj = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(width + 1):
            obj[j] -= tab[i][j]
    for i in range(m):
        obj[art0 + i] += 1
    while True:
        col = next((j for j in range(width) if obj[j] < 0), None)
        if col is None:
            break
        best = None
        for i in range(m):
            if tab[i][col] > 0:
                ratio = tab[i][width] / tab[i][col]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded phase 1 cannot happen; guard anyway
            break
        _pivot(tab, obj, best[1], col)
        basis[best[1]] = col
    if obj[width] != 0:
        return None
    x = [Fraction(0)] * n
    for i, bcol in enumerate(basis):
        if bcol < n:
            x[bcol] = tab[i][width]
    return [xi + li for xi, li in zip(x, lo)]


def _pivot(tab, obj, r, c):
    pv = tab[r][c]
    row = [x / pv for x in tab[r]]
    tab[r] = row
    for i in range(len(tab)):
        if i != r and tab[i][c] != 0:
            f = tab[i][c]
            tab[i] = [a - f * b for a, b in zip(tab[i], row)]
    if obj[c] != 0:
        f = obj[c]
        obj[:] = [a - f * b for a, b in zip(obj, row)]
