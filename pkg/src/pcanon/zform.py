"""Complementary Z-form: the canonical ``Abar = Xbar A`` of a P-matrix.

Each row of ``Xbar`` comes from one complementarity subproblem on
``A_hat = C_hat^{-1} A`` with the row's own block deleted.
"""

from dataclasses import dataclass
from fractions import Fraction

from .blockmat import (
    BlockMatrix,
    fstr,
    hat_decomposition,
    identity,
    solve_left,
    solve_linear,
    vecmat,
)
from .errors import PcanonError, PPropertyError, SingularMatrixError
from .simplex_core import solve_glcp


@dataclass(frozen=True)
class ZFormResult:
    Xbar: tuple
    Abar: BlockMatrix
    per_row_pivots: tuple

    def to_json(self):
        return {
            "Xbar": [[fstr(x) for x in row] for row in self.Xbar],
            "Abar": self.Abar.to_json(),
            "pivots": {"per_row": list(self.per_row_pivots)},
        }


@dataclass(frozen=True)
class ZFormViolation:
    condition: int  # 1, 2 or 3
    row: int
    block: int
    k: int = None  # offending column within the block; None for condition 3

    def __str__(self):
        where = f"({self.row + 1},{self.block + 1}"
        where += f",{self.k + 1})" if self.k is not None else ")"
        return f"condition ({self.condition}) fails at {where}"


def subproblem(A_hat, i):
    """Matrix and cost vector of the row-``i`` subproblem in hat coordinates."""
    sub = A_hat.delete(i)
    row = A_hat.rows[i]
    c = tuple(-row[col] for col, (j, _) in enumerate(A_hat.column_ids()) if j != i)
    return sub, c


def _row(A, i, C_hat, A_hat, solver):
    """Row ``i`` of Xbar plus the subproblem's pivot count."""
    if A.m == 1:
        v, pivots = (), 0
    else:
        sub, c = subproblem(A_hat, i)
        sol = solver(sub, c)
        v, pivots = sol.v, sol.pivots
    u = v[:i] + (Fraction(1),) + v[i:]
    block = A.block_of(vecmat(u, A_hat.rows), i)
    if not all(x > 0 for x in block):
        raise PPropertyError(
            f"row {i + 1}: combination is not positive on its own block; "
            "input lacks the P-property",
            stage="zform",
        )
    return solve_left(C_hat, u), pivots


def zform_row(A, i, pivot_cap=None):
    """Row ``i`` of Xbar, normalized so that ``Abar[i, (i, n_i - 1)] = 1``."""
    C_hat, A_hat = hat_decomposition(A)
    return _row(A, i, C_hat, A_hat, _pivoting(pivot_cap))[0]


def _pivoting(pivot_cap):
    return lambda sub, c: solve_glcp(sub, c, pivot_cap=pivot_cap)


def compute_zform(A, pivot_cap=None, solver=None):
    """Assemble and verify the complementary Z-form of ``A``.

    ``solver(sub, c)`` may replace the pivoting engine; it must return an
    object with ``v`` and ``pivots`` attributes.
    """
    solver = solver or _pivoting(pivot_cap)
    C_hat, A_hat = hat_decomposition(A)
    rows, pivots = [], []
    for i in range(A.m):
        row, p = _row(A, i, C_hat, A_hat, solver)
        rows.append(row)
        pivots.append(p)
    Xbar = tuple(rows)
    Abar = A.left_multiply(Xbar)
    bad = verify_zform(Xbar, A)
    if bad:
        raise PPropertyError(
            "computed matrix is not a complementary Z-form: "
            + "; ".join(str(v) for v in bad[:3]),
            stage="zform",
        )
    for j, nj in enumerate(A.blocks):
        if Abar.entry(j, j, nj - 1) != 1:
            raise PcanonError(f"normalization lost at row {j + 1}", stage="zform")
    return ZFormResult(Xbar, Abar, tuple(pivots))


def verify_zform(Xbar, A):
    """All violations of the three Z-form conditions by ``Xbar A``."""
    XA = A.left_multiply(Xbar)
    out = []
    for i in range(A.m):
        for j in range(A.m):
            vals = XA.block_of(XA.rows[i], j)
            if i == j:
                out.extend(ZFormViolation(1, i, j, k) for k, x in enumerate(vals) if x <= 0)
            else:
                out.extend(ZFormViolation(2, i, j, k) for k, x in enumerate(vals) if x > 0)
                if 0 not in vals:
                    out.append(ZFormViolation(3, i, j))
    return out


def lemma1_reduce(Abar, j):
    """Eliminate column ``(j, n_j - 1)`` off row ``j``, then drop row/block ``j``."""
    last = Abar.blocks[j] - 1
    pivot = Abar.entry(j, j, last)
    if pivot == 0:
        raise ZeroDivisionError(f"pivot entry ({j + 1},{j + 1},{last + 1}) is zero")
    E = [list(r) for r in identity(Abar.m)]
    for i in range(Abar.m):
        if i != j:
            E[i][j] = -Abar.entry(i, j, last) / pivot
    return Abar.left_multiply(E).delete(j)


def nstep_cone_sample(Xbar, q):
    """``Xbar^{-1} q``: a right-hand side every representative basis keeps feasible."""
    q = tuple(Fraction(x) for x in q)
    if not all(x > 0 for x in q):
        raise ValueError("q must be strictly positive")
    try:
        return solve_linear(Xbar, q)
    except SingularMatrixError:
        raise SingularMatrixError("Xbar is singular", stage="nstep_cone_sample") from None
