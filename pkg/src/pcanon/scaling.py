"""Optimal row scaling of a Z-form and the dual certificates proving it optimal."""

from dataclasses import dataclass
from fractions import Fraction

from .blockmat import (
    BlockMatrix,
    fstr,
    representative_submatrix,
    solve_linear,
    vecmat,
)
from .certify import check_lp_dual, check_lp_primal, check_scaling_dual, check_scaling_primal
from .errors import CertificateError, PcanonError, SingularMatrixError
from .simplex_core import solve_glcp
from .zform import compute_zform


@dataclass(frozen=True)
class ScalingResult:
    x: tuple
    d: Fraction
    v: tuple
    XA_opt: BlockMatrix
    argmax: tuple  # (i, k) of the entry v_i * Abar[i, (i, k)] that fixes d
    tight: tuple  # per block, every k whose column of XA_opt sums to d
    pivots: int = 0


@dataclass(frozen=True)
class DualCertificate:
    y: dict  # (i, j, k) -> value; absent keys are zero
    w: tuple  # one entry per column, storage order
    objective: Fraction

    def to_json(self):
        return {
            "y": [
                {"index": [i + 1, j + 1, k + 1], "value": fstr(val)}
                for (i, j, k), val in sorted(self.y.items())
                if val
            ],
            "w": [fstr(x) for x in self.w],
            "objective": fstr(self.objective),
        }


def _complementary(Abar, pivot_cap=None):
    neg_e = (Fraction(-1),) * Abar.n
    try:
        return solve_glcp(Abar, neg_e, pivot_cap=pivot_cap)
    except PcanonError as exc:
        exc.stage = "complementary_v"
        raise


def complementary_v(Abar, pivot_cap=None):
    """``v`` with ``v^T Abar >= e`` and one tight column per block."""
    return tuple(-x for x in _complementary(Abar, pivot_cap).v)


def optimal_scaling(Abar, pivot_cap=None, v=None):
    """Scale ``v`` down until every own-block entry of ``diag(x) Abar`` is <= 1."""
    pivots = 0
    if v is None:
        sol = _complementary(Abar, pivot_cap)
        v, pivots = tuple(-x for x in sol.v), sol.pivots
    best, argmax = None, None
    for i, ni in enumerate(Abar.blocks):
        for k in range(ni):
            val = v[i] * Abar.entry(i, i, k)
            if best is None or val > best:
                best, argmax = val, (i, k)
    if best <= 0:
        raise PcanonError(
            "complementary v has no positive own-block product; "
            "MDP-equivalence conditions fail",
            stage="optimal_scaling",
        )
    d = 1 / best
    x = tuple(d * vi for vi in v)
    XA = BlockMatrix([[xi * a for a in row] for xi, row in zip(x, Abar.rows)], Abar.blocks)
    sums = vecmat((Fraction(1),) * Abar.m, XA.rows)
    tight = tuple(
        tuple(k for k, s in enumerate(XA.block_of(sums, j)) if s == d)
        for j in range(Abar.m)
    )
    return ScalingResult(x, d, tuple(v), XA, argmax, tight, pivots)


def scaling_dual_certificate(Abar, res):
    """Dual solution of the scaling LP with objective ``res.d``."""
    i, k = res.argmax
    if not all(res.tight):
        raise CertificateError("some block has no tight column", stage="scaling_dual")
    sel = tuple(t[0] for t in res.tight)
    C = representative_submatrix(res.XA_opt, sel)
    rhs = tuple(res.d if r == i else Fraction(0) for r in range(Abar.m))
    try:
        wc = solve_linear(C, rhs)
    except SingularMatrixError:
        raise CertificateError("tight representative is singular", stage="scaling_dual") from None
    if any(x < 0 for x in wc):
        raise CertificateError(
            "tight representative is not a K-matrix (negative w)", stage="scaling_dual"
        )
    w = [Fraction(0)] * Abar.n
    for j, (kk, val) in enumerate(zip(sel, wc)):
        w[Abar.index(j, kk)] = val
    cert = DualCertificate({(i, i, k): res.d}, tuple(w), res.d)
    if not check_scaling_dual(Abar, cert, res.d):
        raise CertificateError("scaling dual failed substitution", stage="scaling_dual")
    return cert


def zero_selector(Abar, i):
    """For each block ``j != i`` the smallest ``k`` with ``Abar[i, (j, k)] = 0``."""
    out = {}
    for j in range(Abar.m):
        if j == i:
            continue
        vals = Abar.block_of(Abar.rows[i], j)
        if 0 not in vals:
            raise CertificateError(
                f"row {i + 1} has no zero in block {j + 1}; condition (3) fails",
                stage="lift_dual",
            )
        out[j] = vals.index(0)
    return out


def lift_dual_to_lp(Abar, dual):
    """Extend a scaling-LP dual to a dual of LP(Abar) with the same objective."""
    m = Abar.m
    Aw = [sum((a * wv for a, wv in zip(row, dual.w)), Fraction(0)) for row in Abar.rows]
    y = {key: val for key, val in dual.y.items() if val}
    for i in range(m):
        others = [j for j in range(m) if j != i]
        if not others:
            continue
        K = zero_selector(Abar, i)
        own = [dual.y.get((i, i, k), Fraction(0)) for k in range(Abar.blocks[i])]
        M, rhs = [], []
        for ip in others:
            M.append([Abar.entry(ip, j, K[j]) for j in others])
            own_term = sum(
                (Abar.entry(ip, i, k) * yk for k, yk in enumerate(own)), Fraction(0)
            )
            rhs.append(Aw[ip] - own_term)
        if any(r < 0 for r in rhs):
            raise CertificateError(
                f"system {i + 1} has a negative right-hand side; input dual is infeasible",
                stage="lift_dual",
            )
        sol = solve_linear(M, rhs)
        if any(s < 0 for s in sol):
            raise CertificateError(
                f"system {i + 1} has a negative solution; coefficient matrix is not K",
                stage="lift_dual",
            )
        for j, s in zip(others, sol):
            if s:
                y[(i, j, K[j])] = s
    lifted = DualCertificate(y, dual.w, dual.objective)
    if not check_lp_dual(Abar, lifted):
        raise CertificateError("lifted dual failed substitution", stage="lift_dual")
    return lifted


@dataclass(frozen=True)
class TwoStepResult:
    Xopt: tuple
    d: Fraction
    zform: object
    scaling: ScalingResult
    scaling_dual: DualCertificate
    lp_dual: DualCertificate

    def to_json(self):
        sc = self.scaling
        return {
            "d": fstr(self.d),
            "x": [fstr(v) for v in sc.x],
            "Xopt": [[fstr(v) for v in row] for row in self.Xopt],
            "XAopt": sc.XA_opt.to_json(),
            "zform": self.zform.to_json(),
            "tight_columns": [[k + 1 for k in t] for t in sc.tight],
            "argmax": [sc.argmax[0] + 1, sc.argmax[1] + 1],
            "certificates": {
                "scaling_lp": self.scaling_dual.to_json(),
                "lp_Abar": self.lp_dual.to_json(),
            },
            "pivots": {
                "per_row": list(self.zform.per_row_pivots),
                "scaling": sc.pivots,
            },
        }


def two_step(A, pivot_cap=None):
    """Solve LP(A): Z-form first, then the optimal scaling of its rows."""
    zf = compute_zform(A, pivot_cap=pivot_cap)
    sc = optimal_scaling(zf.Abar, pivot_cap=pivot_cap)
    Xopt = tuple(tuple(xi * a for a in row) for xi, row in zip(sc.x, zf.Xbar))
    if not check_scaling_primal(zf.Abar, sc.x, sc.d):
        raise CertificateError("scaling solution infeasible", stage="optimal_scaling")
    if not check_lp_primal(A, Xopt, sc.d):
        raise CertificateError("Xopt infeasible for LP(A)", stage="two_step")
    sdual = scaling_dual_certificate(zf.Abar, sc)
    ldual = lift_dual_to_lp(zf.Abar, sdual)
    # X̄ is nonsingular, so the same (y, w) is dual feasible for LP(A) itself
    if not check_lp_dual(A, ldual, sc.d):
        raise CertificateError("lifted dual infeasible for LP(A)", stage="two_step")
    return TwoStepResult(Xopt, sc.d, zf, sc, sdual, ldual)
