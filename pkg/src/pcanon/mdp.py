"""Discounted-MDP matrices: recognition, augmentation and seeded generation."""

from dataclasses import dataclass
from fractions import Fraction

from .blockmat import BlockMatrix, fstr, identity, matmul, vecmat

_MASK = (1 << 64) - 1


class SplitMix64:
    """Steele, Lea and Flood's SplitMix64; portable and fully specified."""

    def __init__(self, seed):
        self.state = seed & _MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, bound):
        """Uniform integer in ``[0, bound)`` by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next()
            if r < limit:
                return r % bound

    def between(self, lo, hi):
        return lo + self.below(hi - lo + 1)


@dataclass(frozen=True)
class MdpDecomposition:
    gamma: Fraction
    P_columns: dict  # (j, k) -> tuple; empty when gamma == 0


def mdp_recognize(A):
    """Recover ``gamma`` and the transition columns, or None if ``A`` is not MDP form."""
    sums = vecmat((Fraction(1),) * A.m, A.rows)
    s = sums[0]
    if any(x != s for x in sums) or not (0 < s <= 1):
        return None
    gamma = 1 - s
    P = {}
    for j, k in A.column_ids():
        col = A.column(j, k)
        for i, a in enumerate(col):
            if i == j:
                if not (s <= a <= 1):
                    return None
            elif not (-gamma <= a <= 0):
                return None
        if gamma:
            P[(j, k)] = tuple(
                (Fraction(int(i == j)) - a) / gamma for i, a in enumerate(col)
            )
    return MdpDecomposition(gamma, P)


def mdp_augment(XA):
    """Append a zero column block and a balancing row so every column sums to ``d``.

    Returns ``(augmented matrix, d)``.
    """
    sums = vecmat((Fraction(1),) * XA.m, XA.rows)
    d = min(sums)
    if d <= 0:
        raise ValueError(f"minimum column sum {d} is not positive")
    rows = [list(row) + [Fraction(0)] for row in XA.rows]
    rows.append([d - s for s in sums] + [d])
    return BlockMatrix(rows, XA.blocks + (1,)), d


def _stochastic(rng, m, max_den):
    per = max(1, max_den // m)
    while True:
        weights = [rng.between(0, per) for _ in range(m)]
        total = sum(weights)
        if total:
            return [Fraction(w, total) for w in weights]


def _disguise(rng, m):
    M = [list(r) for r in identity(m)]
    for i in range(m):
        for j in range(i):
            M[i][j] = Fraction(rng.between(-4, 4), rng.between(1, 4))
    perm = list(range(m))
    for i in range(m - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    P = [[Fraction(int(perm[i] == j)) for j in range(m)] for i in range(m)]
    return matmul(M, P)


@dataclass(frozen=True)
class Instance:
    A: BlockMatrix
    M: tuple
    gamma: Fraction
    A0: BlockMatrix
    seed: int
    disguised: bool

    def meta(self):
        return {"gamma": fstr(self.gamma), "disguised": self.disguised, "seed": self.seed}


def gen_instance(m, blocks, gamma, seed, disguise=False, max_den=100):
    """Random discounted-MDP matrix, optionally hidden behind ``M @ A0``."""
    gamma = Fraction(gamma)
    if not 0 <= gamma < 1:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    blocks = tuple(blocks)
    if len(blocks) != m:
        raise ValueError(f"need {m} block sizes, got {len(blocks)}")
    rng = SplitMix64(seed)
    cols = []
    for j, nj in enumerate(blocks):
        for _ in range(nj):
            p = _stochastic(rng, m, max_den)
            cols.append([Fraction(int(i == j)) - gamma * p[i] for i in range(m)])
    A0 = BlockMatrix([list(r) for r in zip(*cols)], blocks)
    M = _disguise(rng, m) if disguise else identity(m)
    A = A0.left_multiply(M) if disguise else A0
    return Instance(A, M, gamma, A0, seed, bool(disguise))


def random_blocks(m, seed, max_block=4):
    """Seeded block sizes in ``1..max_block`` with at least one block of size > 1."""
    rng = SplitMix64(seed ^ 0x5DEECE66D)
    while True:
        sizes = tuple(rng.between(1, max_block) for _ in range(m))
        if sum(sizes) > m or max_block == 1:
            return sizes
