from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pcanon.blockmat import BlockMatrix, representative_submatrix, solve_linear, vecmat
from pcanon.certify import is_z_matrix, k_matrix_check
from pcanon.mdp import gen_instance, random_blocks
from pcanon.zform import compute_zform, lemma1_reduce, nstep_cone_sample, verify_zform, zform_row

from reference import D_OPT, SOLVER_X, XBAR, eye, sample_a, sample_abar, sample_scaled


def test_rows_of_sample():
    A = sample_a()
    assert zform_row(A, 0) == tuple(XBAR[0])
    assert zform_row(A, 2) == tuple(XBAR[2])
    assert zform_row(eye(3), 1) == (0, 1, 0)


def test_compute_zform_sample():
    zf = compute_zform(sample_a())
    assert zf.Xbar == tuple(tuple(r) for r in XBAR)
    assert zf.Abar == sample_abar()
    js = zf.to_json()
    assert js["Xbar"][1] == ["3/19", "7/19", "5/38"]
    assert js["Abar"]["rows"][1][0] == "-9/38"


def test_compute_zform_identity():
    zf = compute_zform(eye(3))
    assert zf.Xbar == eye(3).rows and zf.Abar == eye(3)


def test_verify_zform():
    A = sample_a()
    bad = verify_zform(SOLVER_X, A)
    assert [(v.condition, v.row, v.block) for v in bad] == [(3, 1, 0)]
    assert verify_zform(XBAR, A) == []
    zero = [[0] * 3 for _ in range(3)]
    assert any(v.condition == 1 for v in verify_zform(zero, A))


def test_solver_optimum_is_not_canonical():
    # same LP(A) value, but the Z-form needs a zero in every cross block
    XA = sample_a().left_multiply(SOLVER_X)
    assert 0 not in XA.block_of(XA.rows[1], 0)


def test_lemma1_reduce_keeps_column_sums():
    reduced = lemma1_reduce(sample_scaled(), 2)
    assert (reduced.m, reduced.n) == (2, 4)
    sums = vecmat((1, 1), reduced.rows)
    assert all(s >= D_OPT for s in sums)


def test_lemma1_reduce_trivial_cases():
    assert lemma1_reduce(eye(3), 1) == eye(2)
    A = BlockMatrix([[2, 1, 0], [-1, 0, 3]], [2, 1])
    assert lemma1_reduce(A, 1) == BlockMatrix([[2, 1]], [2])
    with pytest.raises(ZeroDivisionError):
        lemma1_reduce(BlockMatrix([[1, 0], [0, 0]], [1, 1]), 1)


def test_nstep_sample():
    assert nstep_cone_sample(eye(3).rows, (1, 1, 1)) == (1, 1, 1)
    A = sample_a()
    b = nstep_cone_sample(XBAR, (1, 1, 1))
    for sel in A.selections():
        assert all(x > 0 for x in solve_linear(representative_submatrix(A, sel), b))
    with pytest.raises(ValueError):
        nstep_cone_sample(XBAR, (1, 0, 1))


def test_representatives_of_sample_zform_are_k():
    Abar = sample_abar()
    for sel in Abar.selections():
        C = representative_submatrix(Abar, sel)
        assert is_z_matrix(C) and k_matrix_check(C).is_k


def _instance(m, seed, gamma, disguise):
    return gen_instance(m, random_blocks(m, seed, 3), gamma, seed, disguise)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6),
       st.sampled_from([0, Fraction(1, 2), Fraction(9, 10)]))
def test_canonical_under_left_multiplication(m, seed, gamma):
    inst = _instance(m, seed, gamma, True)
    assert compute_zform(inst.A).Abar == compute_zform(inst.A0).Abar


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6), st.permutations(range(4)))
def test_row_permutation(m, seed, perm):
    perm = [p for p in perm if p < m]
    inst = _instance(m, seed, Fraction(1, 3), False)
    A = inst.A
    P = BlockMatrix([A.rows[p] for p in perm], A.blocks)
    zf, zp = compute_zform(A), compute_zform(P)
    assert zp.Abar == zf.Abar
    # Xbar_P = Xbar with columns permuted along with the rows of A
    assert zp.Xbar == tuple(tuple(row[p] for p in perm) for row in zf.Xbar)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6), st.booleans())
def test_generated_zforms_are_valid(m, seed, disguise):
    inst = _instance(m, seed, Fraction(3, 4), disguise)
    zf = compute_zform(inst.A)
    assert verify_zform(zf.Xbar, inst.A) == []
    for j, nj in enumerate(inst.A.blocks):
        assert zf.Abar.entry(j, j, nj - 1) == 1
    for sel in zf.Abar.selections():
        assert k_matrix_check(representative_submatrix(zf.Abar, sel)).is_k
    b = nstep_cone_sample(zf.Xbar, (1,) * m)
    for sel in inst.A.selections():
        assert all(x > 0 for x in solve_linear(representative_submatrix(inst.A, sel), b))
