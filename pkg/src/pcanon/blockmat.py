"""Exact block-structured matrices and representative submatrices.

A block matrix has ``m`` rows and its ``n`` columns split into ``m`` blocks;
column ``(j, k)`` is the ``k``-th column of block ``j``.  Indices are 0-based
in this API.  Every entry is a :class:`fractions.Fraction`.
"""

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MatrixFormatError, SingularMatrixError

#: ``p_property`` refuses to enumerate more representative submatrices than this.
ENUMERATION_CAP = 10**6

_RATIONAL = re.compile(r"(-?\d+)(?:/(\d+))?")


def to_fraction(value):
    """Parse an integer, Fraction or ``"p/q"`` string exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise MatrixFormatError(f"boolean is not a matrix entry: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        match = _RATIONAL.fullmatch(value.strip())
        if match is None:
            raise MatrixFormatError(f"not an exact rational: {value!r}")
        num, den = int(match[1]), int(match[2] or 1)
        if den == 0:
            raise MatrixFormatError(f"zero denominator in {value!r}")
        if math.gcd(num, den) != 1:
            raise MatrixFormatError(f"{value!r} is not in lowest terms")
        return Fraction(num, den)
    raise MatrixFormatError(f"unsupported entry type {type(value).__name__}")


def fstr(q):
    """Canonical string for a Fraction: ``"7"`` or ``"-3/4"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_matrix(rows):
    """Tuple-of-tuples of Fractions; the immutable square/dense matrix type."""
    return tuple(tuple(to_fraction(x) for x in row) for row in rows)


def identity(order):
    return tuple(
        tuple(Fraction(int(i == j)) for j in range(order)) for i in range(order)
    )


def matmul(X, Y):
    cols = list(zip(*Y))
    return tuple(
        tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols)
        for row in X
    )


def vecmat(v, M):
    """Row vector times matrix: ``v^T M``."""
    if not M:
        return ()
    out = [Fraction(0)] * len(M[0])
    for vi, row in zip(v, M):
        if vi:
            for c, a in enumerate(row):
                if a:
                    out[c] += vi * a
    return tuple(out)


def matvec(M, x):
    return tuple(sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in M)


def transpose(M):
    return tuple(zip(*M))


@dataclass(frozen=True)
class BlockMatrix:
    """An ``m x n`` rational matrix with columns grouped into ``m`` blocks."""

    rows: tuple
    blocks: tuple
    offsets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = as_matrix(self.rows)
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks:
            raise MatrixFormatError("a block matrix needs at least one block")
        if any(b < 1 for b in blocks):
            raise MatrixFormatError(f"every block needs at least one column: {blocks}")
        if len(rows) != len(blocks):
            raise MatrixFormatError(
                f"{len(rows)} rows but {len(blocks)} blocks; need one block per row"
            )
        n = sum(blocks)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise MatrixFormatError(
                    f"row {i + 1} has {len(row)} entries, block sizes {list(blocks)} "
                    f"need {n}"
                )
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(
            self, "offsets", tuple(itertools.accumulate((0,) + blocks[:-1]))
        )

    @property
    def m(self):
        return len(self.blocks)

    @property
    def n(self):
        return sum(self.blocks)

    def index(self, j, k):
        """Flat column offset of column ``(j, k)``."""
        if not (0 <= j < self.m and 0 <= k < self.blocks[j]):
            raise IndexError(f"column {(j, k)} outside blocks {self.blocks}")
        return self.offsets[j] + k

    def column_ids(self):
        """All ``(j, k)`` in storage order."""
        return [(j, k) for j, nj in enumerate(self.blocks) for k in range(nj)]

    def column(self, j, k):
        c = self.index(j, k)
        return tuple(row[c] for row in self.rows)

    def entry(self, i, j, k):
        return self.rows[i][self.index(j, k)]

    def block_of(self, vector, j):
        """Slice of an ``n``-vector belonging to block ``j``."""
        start = self.offsets[j]
        return tuple(vector[start:start + self.blocks[j]])

    def selections(self):
        """Iterate over every representative selection."""
        return itertools.product(*(range(nj) for nj in self.blocks))

    def num_selections(self):
        return math.prod(self.blocks)

    def left_multiply(self, X):
        """``X @ self`` keeping the block structure."""
        return BlockMatrix(matmul(X, self.rows), self.blocks)

    def delete(self, i):
        """Drop row ``i`` and every column of block ``i``."""
        keep = [c for c, (j, _) in enumerate(self.column_ids()) if j != i]
        rows = [
            [row[c] for c in keep] for r, row in enumerate(self.rows) if r != i
        ]
        return BlockMatrix(rows, self.blocks[:i] + self.blocks[i + 1:])

    def to_json(self):
        return {
            "m": self.m,
            "blocks": list(self.blocks),
            "rows": [[fstr(x) for x in row] for row in self.rows],
        }


def dump_block_matrix(A):
    return json.dumps(A.to_json(), separators=(",", ":"))


def block_matrix_from_json(obj):
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix JSON must be an object")
    try:
        m, blocks, rows = obj["m"], obj["blocks"], obj["rows"]
    except KeyError as exc:
        raise MatrixFormatError(f"missing field {exc}") from None
    if not isinstance(blocks, list) or not all(
        isinstance(b, int) and not isinstance(b, bool) for b in blocks
    ):
        raise MatrixFormatError("blocks must be a list of integers")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise MatrixFormatError("rows must be a list of lists")
    if m != len(blocks):
        raise MatrixFormatError(f"m={m} but {len(blocks)} blocks given")
    return BlockMatrix(rows, blocks)


def parse_block_matrix(text):
    """Parse the JSON interchange format into a :class:`BlockMatrix`."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"invalid JSON: {exc}") from None
    return block_matrix_from_json(obj)


def representative_submatrix(A, selection):
    """Square matrix whose column ``j`` is column ``(j, selection[j])`` of A."""
    if len(selection) != A.m:
        raise IndexError(f"selection {selection} does not cover {A.m} blocks")
    cols = [A.index(j, k) for j, k in enumerate(selection)]
    return tuple(tuple(row[c] for c in cols) for row in A.rows)


# -- fraction-free elimination ------------------------------------------------

def _integer_rows(rows):
    """Scale each row to integers; returns (int rows, per-row scale factors)."""
    out, scales = [], []
    for row in rows:
        s = math.lcm(*(Fraction(x).denominator for x in row)) if row else 1
        out.append([int(Fraction(x) * s) for x in row])
        scales.append(s)
    return out, scales


def _bareiss(a, order):
    """In-place Bareiss forward elimination on the first ``order`` columns.

    Returns the permutation sign, or 0 if the leading block is singular.
    """
    sign, prev = 1, 1
    width = len(a[0]) if a else 0
    for k in range(order):
        p = next((r for r in range(k, order) if a[r][k]), None)
        if p is None:
            return 0
        if p != k:
            a[k], a[p] = a[p], a[k]
            sign = -sign
        piv, rowk = a[k][k], a[k]
        for i in range(k + 1, order):
            rowi = a[i]
            f = rowi[k]
            for c in range(k + 1, width):
                rowi[c] = (rowi[c] * piv - f * rowk[c]) // prev
            rowi[k] = 0
        prev = piv
    return sign


def determinant(M):
    """Exact determinant by Bareiss elimination."""
    order = len(M)
    if order == 0:
        return Fraction(1)
    a, scales = _integer_rows(M)
    sign = _bareiss(a, order)
    if sign == 0:
        return Fraction(0)
    return Fraction(sign * a[-1][-1], math.prod(scales))


def solve_many(M, rhs_columns):
    """Solve ``M X = B`` for each column of ``B``; returns the list of solutions."""
    order = len(M)
    rhs_columns = [tuple(b) for b in rhs_columns]
    if order == 0:
        return [() for _ in rhs_columns]
    aug = [
        list(M[i]) + [b[i] for b in rhs_columns] for i in range(order)
    ]
    a, _ = _integer_rows(aug)
    if _bareiss(a, order) == 0:
        raise SingularMatrixError("singular matrix")
    sols = []
    for r in range(len(rhs_columns)):
        x = [Fraction(0)] * order
        col = order + r
        for i in range(order - 1, -1, -1):
            s = Fraction(a[i][col])
            row = a[i]
            for c in range(i + 1, order):
                if row[c]:
                    s -= row[c] * x[c]
            x[i] = s / row[i]
        sols.append(tuple(x))
    return sols


def solve_linear(M, b):
    """Exact ``x`` with ``M x = b``."""
    return solve_many(M, [b])[0]


def solve_left(M, c):
    """Exact ``y`` with ``y^T M = c^T``."""
    return solve_many(transpose(M), [c])[0]


def inverse(M):
    order = len(M)
    cols = solve_many(M, identity(order))
    return transpose(cols)


# -- P-property machinery -----------------------------------------------------

@dataclass(frozen=True)
class PVerdict:
    """Outcome of :func:`p_property`; exactly one of sign / violation is set."""

    sign: int = None
    violation: tuple = None
    determinants: int = 0

    @property
    def holds(self):
        return self.sign is not None


def _sign(q):
    return (q > 0) - (q < 0)


def p_property(A, cap=ENUMERATION_CAP):
    """Enumerate every representative determinant and compare signs."""
    total = A.num_selections()
    if total > cap:
        raise ValueError(
            f"{total} representative submatrices exceed the enumeration cap {cap}"
        )
    first, first_sign = None, 0
    for count, sel in enumerate(A.selections(), 1):
        s = _sign(determinant(representative_submatrix(A, sel)))
        if first is None:
            first, first_sign = sel, s
            if s == 0:
                return PVerdict(violation=(sel, sel), determinants=count)
        elif s != first_sign:
            return PVerdict(violation=(first, sel), determinants=count)
    return PVerdict(sign=first_sign, determinants=total)


def sign_preserving_witness(A, y):
    """First block ``j`` on which ``y^T A`` has one strict sign, else None."""
    if not any(y):
        raise ValueError("y must be nonzero")
    x = vecmat(y, A.rows)
    for j in range(A.m):
        signs = {_sign(v) for v in A.block_of(x, j)}
        if len(signs) == 1 and 0 not in signs:
            return j
    return None


def hat_decomposition(A):
    """Return ``(C_hat, A_hat)`` with C_hat the last-column representative.

    ``A_hat = C_hat^{-1} A``, so column ``(j, n_j - 1)`` of ``A_hat`` is ``e_j``.
    """
    sel = tuple(nj - 1 for nj in A.blocks)
    C_hat = representative_submatrix(A, sel)
    try:
        cols = solve_many(C_hat, transpose(A.rows))
    except SingularMatrixError:
        raise SingularMatrixError(
            "the last-column representative submatrix is singular; "
            "the input does not have the P-property",
            stage="hat_decomposition",
        ) from None
    return C_hat, BlockMatrix(transpose(cols), A.blocks)
