"""Reference exact LP solver: dense two-phase tableau simplex.

Deliberately independent of the block-pivot engine; used to cross-check the
two-step method on LP(A) and on the scaling LP.

Dual convention for ``max c^T x``: ``y_i >= 0`` on ``<=`` rows, ``y_i <= 0``
on ``>=`` rows, free on ``=`` rows, and ``A^T y >= c`` on nonnegative
variables, ``A^T y = c`` on free ones.  For ``min`` every sign flips.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq

from .blockmat import fstr

LE, GE, EQ = "<=", ">=", "="
_ZERO = Fraction(0)


@dataclass(frozen=True)
class LpProblem:
    sense: str  # "max" or "min"
    objective: tuple
    rows: tuple  # (coefficients, relation, rhs)
    free: tuple  # per variable: True if unrestricted in sign
    names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        nvar = len(self.objective)
        if len(self.free) != nvar:
            raise ValueError("free flags do not match variable count")
        for coeffs, rel, _ in self.rows:
            if len(coeffs) != nvar or rel not in (LE, GE, EQ):
                raise ValueError("malformed constraint row")

    def to_json(self):
        return {
            "sense": self.sense,
            "objective": [fstr(c) for c in self.objective],
            "free": list(self.free),
            "names": list(self.names) if self.names else None,
            "rows": [
                {"coeffs": [fstr(a) for a in co], "rel": rel, "rhs": fstr(b)}
                for co, rel, b in self.rows
            ],
        }

    def dumps(self):
        return json.dumps(self.to_json(), separators=(",", ":"))


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "unbounded" | "infeasible"
    x: tuple = None
    duals: tuple = None
    objective: Fraction = None
    pivots: int = 0


def problem(sense, objective, rows, free=None, names=None):
    objective = tuple(Fraction(c) for c in objective)
    rows = tuple(
        (tuple(Fraction(a) for a in co), rel, Fraction(b)) for co, rel, b in rows
    )
    free = tuple(free) if free is not None else (False,) * len(objective)
    return LpProblem(sense, objective, rows, free, tuple(names) if names else None)


def build_lp_A(A):
    """LP(A): variables ``X[i][i']`` row-major, then ``d``; maximize ``d``."""
    m, n = A.m, A.n
    nvar = m * m + 1
    rows = []
    for i in range(m):
        for col, (j, _) in enumerate(A.column_ids()):
            co = [_ZERO] * nvar
            for ip in range(m):
                co[i * m + ip] = A.rows[ip][col]
            rows.append((co, LE, Fraction(1) if i == j else _ZERO))
    for col in range(n):
        co = [_ZERO] * nvar
        for i in range(m):
            for ip in range(m):
                co[i * m + ip] = -A.rows[ip][col]
        co[-1] = Fraction(1)
        rows.append((co, LE, _ZERO))
    obj = [_ZERO] * nvar
    obj[-1] = Fraction(1)
    names = [f"X{i + 1}{ip + 1}" for i in range(m) for ip in range(m)] + ["d"]
    return problem("max", obj, rows, [True] * nvar, names)


def build_scaling_lp(Abar):
    """Scaling LP: variables ``x_1..x_m, d``; maximize ``d``."""
    m = Abar.m
    nvar = m + 1
    rows = []
    for col, (j, _) in enumerate(Abar.column_ids()):
        co = [_ZERO] * nvar
        for i in range(m):
            co[i] = -Abar.rows[i][col]
        co[-1] = Fraction(1)
        rows.append((co, LE, _ZERO))
    for col, (j, _) in enumerate(Abar.column_ids()):
        co = [_ZERO] * nvar
        co[j] = Abar.rows[j][col]
        rows.append((co, LE, Fraction(1)))
    obj = [_ZERO] * nvar
    obj[-1] = Fraction(1)
    names = [f"x{i + 1}" for i in range(m)] + ["d"]
    return problem("max", obj, rows, [True] * nvar, names)


def _q(x):
    return mpq(x.numerator, x.denominator)


def _frac(x):
    return Fraction(int(x.numerator), int(x.denominator))


class _Tableau:
    """Rows ``[coefficients..., rhs]``; ``basis[r]`` is the basic column of row r.

    Entries are gmpy2 ``mpq`` internally; the initial basis must be an
    identity, which the lexicographic ratio test uses to break ties.
    """

    def __init__(self, rows, basis, rule, cap):
        self.rows = [[_q(a) for a in row] for row in rows]
        self.basis = basis
        self.initial = list(basis)
        self.rule = rule
        self.cap = cap
        self.pivots = 0

    def pivot(self, r, s, objectives):
        if self.pivots >= self.cap:
            raise RuntimeError(f"oracle pivot cap {self.cap} tripped")
        prow = self.rows[r]
        p = prow[s]
        if p != 1:
            prow = [a / p for a in prow]
            self.rows[r] = prow
        nz = [c for c, a in enumerate(prow) if a]
        for row in self.rows + objectives:
            if row is prow:
                continue
            f = row[s]
            if f:
                for c in nz:
                    row[c] -= f * prow[c]
        self.basis[r] = s
        self.pivots += 1

    def _leaving(self, s):
        ratios = [(row[-1] / row[s], i) for i, row in enumerate(self.rows) if row[s] > 0]
        if not ratios:
            return None
        best = min(ratios)[0]
        tied = [i for q, i in ratios if q == best]
        if len(tied) == 1:
            return tied[0]
        if self.rule == "bland":
            return min(tied, key=lambda i: self.basis[i])

        def lex(i):
            row = self.rows[i]
            return [row[c] / row[s] for c in self.initial]

        return min(tied, key=lex)

    def run(self, obj, allowed, others):
        """Minimize with reduced-cost row ``obj`` (last entry is -objective)."""
        while True:
            cand = [c for c in allowed if obj[c] < 0]
            if not cand:
                return "optimal"
            if self.rule == "bland":
                s = cand[0]
            else:
                s = min(cand, key=lambda c: (obj[c], c))
            r = self._leaving(s)
            if r is None:
                return "unbounded"
            self.pivot(r, s, [obj] + others)


def simplex_solve(p, rule="lex", pivot_cap=None):
    """Solve ``p`` exactly; infeasible and unbounded are statuses, not errors.

    ``rule="lex"`` enters the most negative reduced cost and breaks ratio ties
    lexicographically; ``rule="bland"`` uses smallest indices for both.  Both
    are cycle-free.
    """
    if rule not in ("lex", "bland"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    # expand free variables into differences of nonnegative parts
    cols = []  # (original variable, sign)
    for v, is_free in enumerate(p.free):
        cols.append((v, 1))
        if is_free:
            cols.append((v, -1))
    sign_obj = 1 if p.sense == "min" else -1
    cost = [sign_obj * s * p.objective[v] for v, s in cols]
    nstruct = len(cols)

    nrows = len(p.rows)
    flips, rels = [], []
    for co, rel, b in p.rows:
        flip = -1 if b < 0 else 1
        flips.append(flip)
        if flip < 0 and rel != EQ:
            rel = GE if rel == LE else LE
        rels.append(rel)
    # every row gets an identity column: slack for <=, artificial otherwise
    extra = []  # (row, coefficient, is_artificial)
    for r, rel in enumerate(rels):
        if rel == GE:
            extra.append((r, -1, False))
    ident = {}
    for r, rel in enumerate(rels):
        ident[r] = nstruct + len(extra)
        extra.append((r, 1, rel != LE))
    width = nstruct + len(extra)
    artificial = [nstruct + e for e, (_, _, art) in enumerate(extra) if art]

    rows = []
    for r, (co, _, b) in enumerate(p.rows):
        f = flips[r]
        row = [f * s * co[v] for v, s in cols] + [_ZERO] * len(extra) + [f * b]
        rows.append(row)
    for e, (r, coef, _) in enumerate(extra):
        rows[r][nstruct + e] = Fraction(coef)
    cap = pivot_cap or 50 * (nrows + width) + 1000
    tab = _Tableau(rows, [ident[r] for r in range(nrows)], rule, cap)
    rows = tab.rows

    phase2 = [_q(a) for a in cost] + [mpq(0)] * (len(extra) + 1)
    is_art = set(artificial)
    if artificial:
        phase1 = [mpq(0)] * (width + 1)
        for c in artificial:
            phase1[c] = mpq(1)
        for r in range(nrows):
            if tab.basis[r] in is_art:
                phase1 = [a - b for a, b in zip(phase1, rows[r])]
        allowed = [c for c in range(width)]
        tab.run(phase1, allowed, [phase2])
        if phase1[-1] != 0:
            return LpSolution("infeasible", pivots=tab.pivots)
        # drive zero-level artificials out of the basis where possible
        for r in range(nrows):
            if tab.basis[r] in is_art:
                s = next(
                    (c for c in range(width) if c not in is_art and tab.rows[r][c]), None
                )
                if s is not None:
                    tab.pivot(r, s, [phase2])
    allowed = [c for c in range(width) if c not in is_art]
    status = tab.run(phase2, allowed, [])
    if status == "unbounded":
        return LpSolution("unbounded", pivots=tab.pivots)

    values = [_ZERO] * width
    for r, b in enumerate(tab.basis):
        values[b] = _frac(tab.rows[r][-1])
    x = [_ZERO] * len(p.objective)
    for c, (v, s) in enumerate(cols):
        x[v] += s * values[c]
    # reduced cost of row r's identity column is -y_r (its cost is zero)
    duals = tuple(-sign_obj * flips[r] * _frac(phase2[ident[r]]) for r in range(nrows))
    objective = sum((c * xv for c, xv in zip(p.objective, x)), _ZERO)
    return LpSolution("optimal", tuple(x), duals, objective, tab.pivots)


def check_duality(p, sol):
    """Independent substitution check of primal/dual feasibility and equal objectives."""
    x, y = sol.x, sol.duals
    for (co, rel, b), yi in zip(p.rows, y):
        lhs = sum((a * xv for a, xv in zip(co, x)), _ZERO)
        if (rel == LE and lhs > b) or (rel == GE and lhs < b) or (rel == EQ and lhs != b):
            return False
        sgn = yi if p.sense == "max" else -yi
        if (rel == LE and sgn < 0) or (rel == GE and sgn > 0):
            return False
    for v, is_free in enumerate(p.free):
        if not is_free and x[v] < 0:
            return False
        aty = sum((co[v] * yi for (co, _, _), yi in zip(p.rows, y)), _ZERO)
        gap = aty - p.objective[v] if p.sense == "max" else p.objective[v] - aty
        if (is_free and gap != 0) or gap < 0:
            return False
    dual_obj = sum((b * yi for (_, _, b), yi in zip(p.rows, y)), _ZERO)
    return dual_obj == sol.objective
