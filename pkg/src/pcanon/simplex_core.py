"""Block-pivot simplex with Dantzig's rule for the complementarity problem.

Given ``A`` with the P-property and a cost vector ``c`` over its columns, find
the unique ``v`` with ``c^T - v^T A >= 0`` and at least one zero per block.
This is the dual of ``min c^T x, A x = b, x >= 0`` for any ``b`` whose feasible
bases are exactly the representative submatrices, so ``b`` never has to be
known: the column leaving the basis is always the current one from the
entering column's block.
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .blockmat import hat_decomposition, representative_submatrix, solve_left, vecmat
from .errors import PivotCapExceeded, SingularMatrixError


@dataclass(frozen=True)
class GlcpSolution:
    v: tuple
    selection: tuple
    residual: tuple
    pivots: int
    trace: tuple  # ((entering (j, k)), (leaving (j, k'))) per pivot

    def trace_lines(self):
        """Pivot trace as JSON lines with 1-based column ids."""
        return "".join(
            json.dumps({"enter": [e[0] + 1, e[1] + 1], "leave": [l[0] + 1, l[1] + 1]},
                       separators=(",", ":")) + "\n"
            for e, l in self.trace
        )


@dataclass(frozen=True)
class GlcpStandardForm:
    z: tuple
    w: tuple  # over columns (j, k) with k < n_j - 1, in storage order


def ye_pivot_bound(m, n, d):
    """Ceiling of ``m (n - m) / d * ln(m^2 / d)``."""
    d = Fraction(d)
    if d <= 0 or d > 1:
        raise ValueError(f"d must lie in (0, 1], got {d}")
    if not n > m >= 1:
        raise ValueError(f"need n > m >= 1, got m={m}, n={n}")
    with mpmath.workdps(50):
        dd = mpmath.mpf(d.numerator) / d.denominator
        value = m * (n - m) / dd * mpmath.log(m * m / dd)
        return int(mpmath.ceil(value))


def default_pivot_cap(A):
    m, n = A.m, A.n
    ye = ye_pivot_bound(m, n, Fraction(1, n)) if n > m else 0
    return max(2 * ye, math.prod(A.blocks))


def reduced_costs(A, c, selection):
    """``c^T - v^T A`` where ``v`` solves ``v^T C = c_selection``."""
    return _reduced(A, c, selection)[1]


def _reduced(A, c, selection):
    C = representative_submatrix(A, selection)
    c_sel = [c[A.index(j, k)] for j, k in enumerate(selection)]
    v = solve_left(C, c_sel)
    vA = vecmat(v, A.rows)
    return v, tuple(ci - a for ci, a in zip(c, vA))


def solve_glcp(A, c, start=None, pivot_cap=None):
    """Run the block-pivot simplex from ``start`` (default: last column per block).

    Raises :class:`PivotCapExceeded` past ``pivot_cap`` pivots and
    :class:`SingularMatrixError` on a singular basis.
    """
    c = tuple(Fraction(x) for x in c)
    if len(c) != A.n:
        raise ValueError(f"cost vector has {len(c)} entries, matrix has {A.n} columns")
    sel = list(start) if start is not None else [nj - 1 for nj in A.blocks]
    for j, k in enumerate(sel):
        A.index(j, k)
    cap = default_pivot_cap(A) if pivot_cap is None else pivot_cap
    ids = A.column_ids()
    trace = []
    while True:
        try:
            v, r = _reduced(A, c, sel)
        except SingularMatrixError:
            raise SingularMatrixError(
                f"singular basis {tuple(sel)}; input lacks the P-property",
                stage="solve_glcp",
            ) from None
        # min over (value, column id): most negative, ties to smallest (j, k)
        best, col = min(zip(r, ids))
        if best >= 0:
            return GlcpSolution(v, tuple(sel), r, len(trace), tuple(trace))
        if len(trace) >= cap:
            raise PivotCapExceeded(
                f"pivot cap {cap} exceeded; the MDP-equivalence conditions probably fail",
                stage="solve_glcp",
            )
        j, k = col
        trace.append(((j, k), (j, sel[j])))
        sel[j] = k


def glcp_standard_form(A, c, sol):
    """Rewrite a solution in hat coordinates as a generalized LCP pair.

    ``z`` is the residual on the last column of each block and ``w`` the
    residual on the remaining columns; ``w = q + z^T A_hat_N`` with
    ``q = c_N - c_hat^T A_hat_N``.
    """
    C_hat, A_hat = hat_decomposition(A)
    c = tuple(Fraction(x) for x in c)
    c_hat = [c[A.index(j, nj - 1)] for j, nj in enumerate(A.blocks)]
    z = tuple(ch - u for ch, u in zip(c_hat, vecmat(sol.v, C_hat)))
    shifted = vecmat([ch - zj for ch, zj in zip(c_hat, z)], A_hat.rows)
    w = tuple(
        c[A.index(j, k)] - shifted[A.index(j, k)]
        for j, nj in enumerate(A.blocks)
        for k in range(nj - 1)
    )
    return GlcpStandardForm(z, w)


def glcp_complementary(A, form):
    """Per-block product ``z_j * prod_k w_jk`` vanishes for every block."""
    it = iter(form.w)
    for j, nj in enumerate(A.blocks):
        prod = form.z[j]
        for _ in range(nj - 1):
            prod *= next(it)
        if prod != 0:
            return False
    return True
