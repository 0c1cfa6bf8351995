"""Exact rational helpers: parsing, small dense linear algebra and a
bounded-variable simplex over :class:`fractions.Fraction`.

Nothing in here touches floating point once the inputs are converted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Q = Fraction
Vector = tuple  # tuple of Fractions


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions, floats (exactly) and "p/q" strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    # numpy scalars
    if hasattr(value, "item"):
        return to_fraction(value.item())
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def to_vector(values: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in values)


def is_rational_like(value) -> bool:
    return isinstance(value, (int, Fraction, str)) and not isinstance(value, bool)


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def exact_sqrt(q: Fraction) -> Optional[Fraction]:
    """Square root of a nonnegative rational if it is rational, else None."""
    if q < 0:
        raise ValueError("negative argument")
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def l1(u: Sequence[Fraction]) -> Fraction:
    return sum((abs(a) for a in u), Fraction(0))


# ---------------------------------------------------------------------------
# dense linear algebra


def row_reduce(rows: Sequence[Sequence[Fraction]]):
    """Reduced row echelon form. Returns (matrix, pivot columns)."""
    M = [list(map(to_fraction, r)) for r in rows]
    if not M:
        return M, []
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(row_reduce(rows)[1])


def solve(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[Vector]:
    """One exact solution of ``A x = b`` (free variables set to 0), or None."""
    if not A:
        return ()
    n = len(A[0])
    aug = [list(row) + [to_fraction(bi)] for row, bi in zip(A, b)]
    R, pivots = row_reduce(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = R[i][n]
    return tuple(x)


# ---------------------------------------------------------------------------
# linear programming


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[Vector] = None
    value: Optional[Fraction] = None
    # multipliers y on the equality rows proving infeasibility:
    # y.b lies outside the range of (y^T A) x over the bound box
    farkas: Optional[Vector] = None


_INF = None  # marker for an infinite bound


def box_range(c: Sequence[Fraction], lower, upper):
    """(inf, sup) of c.x over the box; None encodes -inf / +inf."""
    lo = Fraction(0)
    hi = Fraction(0)
    for ci, l, u in zip(c, lower, upper):
        if ci == 0:
            continue
        if ci > 0:
            lo = None if (lo is None or l is None) else lo + ci * l
            hi = None if (hi is None or u is None) else hi + ci * u
        else:
            lo = None if (lo is None or u is None) else lo + ci * u
            hi = None if (hi is None or l is None) else hi + ci * l
    return lo, hi


def check_farkas(A, b, lower, upper, y) -> bool:
    """Exact audit of an infeasibility certificate for ``A x = b``, box bounds."""
    ncols = len(A[0]) if A else 0
    c = [sum((y[i] * A[i][j] for i in range(len(A))), Fraction(0)) for j in range(ncols)]
    target = dot(y, b)
    lo, hi = box_range(c, lower, upper)
    return (hi is not None and target > hi) or (lo is not None and target < lo)


class _Simplex:
    """Bounded-variable primal simplex, Bland's rule, exact arithmetic.

    Solves min cost.y s.t. M y = beta, 0 <= y <= ub (ub entry None = inf).
    """

    def __init__(self, M, beta, ub):
        self.m = len(M)
        self.n = len(M[0]) if M else 0
        self.sign = [1 if bi >= 0 else -1 for bi in beta]
        m, n = self.m, self.n
        # structural columns then one artificial per row
        self.T = [
            [self.sign[i] * M[i][j] for j in range(n)] + [Fraction(int(k == i)) for k in range(m)]
            for i in range(m)
        ]
        self.ub = list(ub) + [None] * m
        self.basis = [n + i for i in range(m)]
        self.at_upper = [False] * (n + m)
        self.xB = [self.sign[i] * beta[i] for i in range(m)]

    def _run(self, cost, allowed):
        m = self.m
        T, basis, ub = self.T, self.basis, self.ub
        while True:
            cB = [cost[j] for j in basis]
            basic = set(basis)
            enter = None
            for j in range(len(cost)):
                if j in basic or not allowed[j]:
                    continue
                d = cost[j] - sum((cB[i] * T[i][j] for i in range(m) if T[i][j] != 0), Fraction(0))
                if (not self.at_upper[j] and d < 0) or (self.at_upper[j] and d > 0):
                    enter = j
                    break
            if enter is None:
                return "optimal"
            delta = -1 if self.at_upper[enter] else 1
            theta = ub[enter]
            leave = None
            leave_to_upper = False
            for i in range(m):
                a = delta * T[i][enter]
                if a > 0:
                    lim = self.xB[i] / a
                    to_up = False
                elif a < 0 and ub[basis[i]] is not None:
                    lim = (ub[basis[i]] - self.xB[i]) / (-a)
                    to_up = True
                else:
                    continue
                if theta is None or lim < theta or (
                    lim == theta and leave is not None and basis[i] < basis[leave]
                ):
                    theta, leave, leave_to_upper = lim, i, to_up
            if theta is None:
                return "unbounded"
            for i in range(m):
                if T[i][enter] != 0:
                    self.xB[i] -= delta * T[i][enter] * theta
            if leave is None:
                self.at_upper[enter] = not self.at_upper[enter]
                continue
            # pivot
            new_val = theta if delta > 0 else ub[enter] - theta
            old = basis[leave]
            self.at_upper[old] = leave_to_upper
            piv = T[leave][enter]
            row = [x / piv for x in T[leave]]
            T[leave] = row
            for i in range(m):
                if i != leave and T[i][enter] != 0:
                    f = T[i][enter]
                    T[i] = [a - f * b for a, b in zip(T[i], row)]
            basis[leave] = enter
            self.at_upper[enter] = False
            self.xB[leave] = new_val

    def values(self):
        y = [Fraction(0)] * (self.n + self.m)
        for j in range(self.n + self.m):
            if self.at_upper[j]:
                y[j] = self.ub[j]
        for i, j in enumerate(self.basis):
            y[j] = self.xB[i]
        return y

    def phase1(self):
        n, m = self.n, self.m
        cost = [Fraction(0)] * n + [Fraction(1)] * m
        self._run(cost, [True] * (n + m))
        infeas = sum((self.xB[i] for i, j in enumerate(self.basis) if j >= n), Fraction(0))
        if infeas > 0:
            # duals of the phase-1 problem: artificial block of T is B^-1
            cB = [cost[j] for j in self.basis]
            pi = [sum((cB[k] * self.T[k][n + i] for k in range(m)), Fraction(0)) for i in range(m)]
            return False, [pi[i] * self.sign[i] for i in range(m)]
        # artificials are pinned at zero from here on
        for j in range(n, n + m):
            self.ub[j] = Fraction(0)
            self.at_upper[j] = False
        return True, None

    def phase2(self, cost):
        full = list(cost) + [Fraction(0)] * self.m
        allowed = [True] * self.n + [False] * self.m
        return self._run(full, allowed)


def linprog_exact(
    c: Sequence,
    A_eq: Sequence[Sequence],
    b_eq: Sequence,
    lower: Sequence = None,
    upper: Sequence = None,
    feasibility_only: bool = False,
) -> LPResult:
    """Minimize ``c.x`` subject to ``A_eq x = b_eq`` and ``lower <= x <= upper``.

    Bounds use ``None`` for infinity; default bounds are ``x >= 0``.
    Infeasible problems come back with a Farkas vector that
    :func:`check_farkas` accepts.
    """
    A = [[to_fraction(v) for v in row] for row in A_eq]
    b = [to_fraction(v) for v in b_eq]
    n = len(A[0]) if A else len(c)
    lower = [Fraction(0)] * n if lower is None else [None if v is None else to_fraction(v) for v in lower]
    upper = [None] * n if upper is None else [None if v is None else to_fraction(v) for v in upper]
    c = [to_fraction(v) for v in c]

    # x_j = offset_j + sgn_j * y_j  (free variables split in two)
    cols = []  # (original index, sgn)
    offsets = [Fraction(0)] * n
    ub = []
    for j in range(n):
        lo, hi = lower[j], upper[j]
        if lo is not None and hi is not None and hi < lo:
            return LPResult("infeasible", farkas=None)
        if lo is not None:
            offsets[j] = lo
            cols.append((j, 1))
            ub.append(None if hi is None else hi - lo)
        elif hi is not None:
            offsets[j] = hi
            cols.append((j, -1))
            ub.append(None)
        else:
            cols.append((j, 1))
            ub.append(None)
            cols.append((j, -1))
            ub.append(None)
    M = [[A[i][j] * s for (j, s) in cols] for i in range(len(A))]
    beta = [b[i] - dot(A[i], offsets) for i in range(len(A))]

    if not A:
        if feasibility_only:
            return LPResult("optimal", x=tuple(offsets), value=Fraction(0))
        A, M, beta = [[Fraction(0)] * n], [[Fraction(0)] * len(cols)], [Fraction(0)]

    sx = _Simplex(M, beta, ub)
    ok, farkas = sx.phase1()
    if not ok:
        return LPResult("infeasible", farkas=tuple(farkas))
    if not feasibility_only:
        cost = [c[j] * s for (j, s) in cols]
        status = sx.phase2(cost)
        if status == "unbounded":
            return LPResult("unbounded")
    y = sx.values()
    x = list(offsets)
    for k, (j, s) in enumerate(cols):
        x[j] += s * y[k]
    x = tuple(x)
    return LPResult("optimal", x=x, value=dot(c, x))
