"""K-matrix tests, MDP-equivalence verdicts and independent certificate checks.

The ``check_*`` functions recompute everything by direct substitution and
never reuse the code path that produced the object they check.
"""

from dataclasses import dataclass
from fractions import Fraction

from .blockmat import (
    BlockMatrix,
    fstr,
    inverse,
    matvec,
    representative_submatrix,
    solve_left,
    vecmat,
)
from .errors import CertificateError, PcanonError, SingularMatrixError
from .lp_oracle import EQ, LE, problem, simplex_solve

_ZERO = Fraction(0)


# -- substitution checks ------------------------------------------------------

def check_scaling_primal(Abar, x, d):
    sums = vecmat(x, Abar.rows)
    if any(s < d for s in sums):
        return False
    return all(
        x[j] * Abar.entry(j, j, k) <= 1
        for j, nj in enumerate(Abar.blocks)
        for k in range(nj)
    )


def check_lp_primal(A, X, d):
    """``(X, d)`` feasible for LP(A)."""
    XA = A.left_multiply(X)
    for i in range(A.m):
        for col, (j, _) in enumerate(A.column_ids()):
            if XA.rows[i][col] > (1 if i == j else 0):
                return False
    return all(s >= d for s in vecmat((Fraction(1),) * A.m, XA.rows))


def _dual_common(Abar, cert):
    if len(cert.w) != Abar.n or any(v < 0 for v in cert.w):
        return False
    if sum(cert.w, _ZERO) != 1:
        return False
    if any(v < 0 for v in cert.y.values()):
        return False
    own = sum((v for (i, j, _), v in cert.y.items() if i == j), _ZERO)
    return own == cert.objective


def check_scaling_dual(Abar, cert, value=None):
    """Feasibility of ``(y, w)`` in the scaling-LP dual, objective equal to ``value``."""
    if not _dual_common(Abar, cert):
        return False
    if any(i != j for (i, j, _) in cert.y):
        return False
    Aw = matvec(Abar.rows, cert.w)
    for i in range(Abar.m):
        lhs = sum(
            (Abar.entry(i, i, k) * v for (ii, _, k), v in cert.y.items() if ii == i), _ZERO
        )
        if lhs != Aw[i]:
            return False
    return value is None or cert.objective == value


def check_lp_dual(A, cert, value=None):
    """Feasibility of ``(y, w)`` in the dual of LP(A), objective equal to ``value``."""
    if not _dual_common(A, cert):
        return False
    Aw = matvec(A.rows, cert.w)
    for i in range(A.m):
        y_i = [_ZERO] * A.n
        for (ii, j, k), v in cert.y.items():
            if ii == i:
                y_i[A.index(j, k)] = v
        if matvec(A.rows, y_i) != Aw:
            return False
    return value is None or cert.objective == value


# -- K-matrices and failure certificates ---------------------------------------

@dataclass(frozen=True)
class KVerdict:
    is_k: bool
    inverse: tuple = None
    witness: tuple = None  # M^{-1} e > 0 when is_k


def is_z_matrix(M):
    return all(M[i][j] <= 0 for i in range(len(M)) for j in range(len(M)) if i != j)


def k_matrix_check(M):
    """A Z-matrix is K iff it is invertible with a nonnegative inverse."""
    if not is_z_matrix(M):
        raise ValueError("k_matrix_check needs a Z-matrix (off-diagonal <= 0)")
    try:
        inv = inverse(M)
    except SingularMatrixError:
        return KVerdict(False)
    if any(x < 0 for row in inv for x in row):
        return KVerdict(False, inv)
    witness = tuple(sum(row, _ZERO) for row in inv)
    return KVerdict(True, inv, witness)


@dataclass(frozen=True)
class FailureCertificate:
    selection: tuple
    x: tuple

    def residual(self, Abar):
        return matvec(representative_submatrix(Abar, self.selection), self.x)

    def to_json(self, Abar):
        return {
            "selection": [k + 1 for k in self.selection],
            "x": [fstr(v) for v in self.x],
            "Cx": [fstr(v) for v in self.residual(Abar)],
        }


def check_failure_certificate(Abar, cert):
    x = cert.x
    if len(x) != Abar.m or any(v < 0 for v in x) or not any(x):
        return False
    return all(v <= 0 for v in cert.residual(Abar))


def _nonpositive_image(C):
    """A point of ``{x >= 0, sum x = 1, C x <= 0}`` or None."""
    m = len(C)
    rows = [(list(C[r]), LE, 0) for r in range(m)]
    rows.append(([1] * m, EQ, 1))
    sol = simplex_solve(problem("min", [0] * m, rows))
    return sol.x if sol.status == "optimal" else None


def failure_certificate(Abar):
    """Search representatives of a Z-form for a non-K one; certify it."""
    for sel in Abar.selections():
        C = representative_submatrix(Abar, sel)
        if not is_z_matrix(C):
            raise ValueError(f"representative {sel} is not a Z-matrix")
        if k_matrix_check(C).is_k:
            continue
        x = _nonpositive_image(C)
        if x is None:
            continue
        cert = FailureCertificate(tuple(sel), tuple(x))
        if not check_failure_certificate(Abar, cert):
            raise CertificateError("failure certificate failed substitution")
        return cert
    return None


# -- brute-force complementarity (degraded mode and test oracle) ---------------

@dataclass(frozen=True)
class EnumeratedSolution:
    v: tuple
    selection: tuple
    residual: tuple
    pivots: int = 0


def glcp_by_enumeration(A, c):
    """Find the complementary ``v`` by trying every representative selection."""
    c = tuple(Fraction(x) for x in c)
    for sel in A.selections():
        C = representative_submatrix(A, sel)
        try:
            v = solve_left(C, [c[A.index(j, k)] for j, k in enumerate(sel)])
        except SingularMatrixError:
            continue
        r = tuple(ci - a for ci, a in zip(c, vecmat(v, A.rows)))
        if all(x >= 0 for x in r):
            return EnumeratedSolution(v, tuple(sel), r)
    raise PcanonError("no complementary selection; input lacks the P-property")


# -- MDP-equivalence verdicts ------------------------------------------------

@dataclass(frozen=True)
class Theorem2Verdict:
    holds: bool
    Abar: BlockMatrix = None
    p: tuple = None
    b: tuple = None
    cert: FailureCertificate = None
    degraded: bool = False
    stage: str = None  # pipeline stage that aborted, in degraded mode

    def to_json(self):
        out = {"holds": self.holds, "degraded": self.degraded}
        if self.stage:
            out["aborted_stage"] = self.stage
        if self.holds:
            out["p"] = [fstr(v) for v in self.p]
            out["b"] = [fstr(v) for v in self.b]
        elif self.cert is not None:
            out["certificate"] = self.cert.to_json(self.Abar)
        return out


def zform_verdict(Abar):
    """Judge a matrix already in Z-form (conditions 1-2)."""
    from .scaling import optimal_scaling

    cert = failure_certificate(Abar)
    if cert is not None:
        return Theorem2Verdict(False, Abar, cert=cert)
    p = optimal_scaling(Abar).x
    b = (Fraction(1),) * Abar.m
    return Theorem2Verdict(True, Abar, p=p, b=b)


def theorem2_verdict(A, pivot_cap=None):
    """Witnesses ``(p, b)`` for the MDP-equivalence conditions, or a failure certificate."""
    from .scaling import optimal_scaling
    from .zform import compute_zform, nstep_cone_sample

    try:
        zf = compute_zform(A, pivot_cap=pivot_cap)
        sc = optimal_scaling(zf.Abar, pivot_cap=pivot_cap)
    except PcanonError as exc:
        stage = exc.stage or "pipeline"
    else:
        if sc.d > 0 and check_scaling_primal(zf.Abar, sc.x, sc.d):
            b = nstep_cone_sample(zf.Xbar, (Fraction(1),) * A.m)
            return Theorem2Verdict(True, zf.Abar, p=sc.x, b=b)
        stage = "optimal_scaling"
    # degraded mode: rebuild the Z-form by enumeration, then look for a non-K basis
    try:
        zf = compute_zform(A, solver=glcp_by_enumeration)
    except PcanonError as exc:
        exc.stage = exc.stage or "degraded_zform"
        raise
    verdict = zform_verdict(zf.Abar)
    if verdict.holds:
        raise PcanonError(
            "pivoting failed but every representative of the Z-form is a K-matrix",
            stage=stage,
        )
    return Theorem2Verdict(False, zf.Abar, cert=verdict.cert, degraded=True, stage=stage)
