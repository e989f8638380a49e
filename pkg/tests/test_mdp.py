from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pcanon.blockmat import BlockMatrix, determinant, p_property, vecmat
from pcanon.mdp import SplitMix64, gen_instance, mdp_augment, mdp_recognize, random_blocks
from pcanon.scaling import two_step

from reference import D_OPT, eye, sample_a, sample_scaled

gammas = st.sampled_from([0, Fraction(1, 4), Fraction(1, 2), Fraction(9, 10), Fraction(2, 7)])


def test_splitmix_reference_values():
    # first outputs for seed 0 of the published generator
    rng = SplitMix64(0)
    assert [rng.next() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F,
    ]


def test_splitmix_bounds():
    rng = SplitMix64(42)
    draws = [rng.between(-2, 3) for _ in range(500)]
    assert min(draws) == -2 and max(draws) == 3
    with pytest.raises(ValueError):
        rng.below(0)


def test_recognize_identity():
    dec = mdp_recognize(eye(3))
    assert dec.gamma == 0 and dec.P_columns == {}


def test_recognize_by_hand():
    g = Fraction(1, 2)
    A = BlockMatrix([[1 - g / 2, -g], [-g / 2, 1]], [1, 1])
    dec = mdp_recognize(A)
    assert dec.gamma == g
    assert dec.P_columns == {(0, 0): (Fraction(1, 2), Fraction(1, 2)), (1, 0): (1, 0)}


def test_recognize_rejects_sample():
    assert mdp_recognize(sample_a()) is None
    assert mdp_recognize(BlockMatrix([[2, 0], [-1, 1]], [1, 1])) is None


def test_augment_scaled_sample():
    aug, d = mdp_augment(sample_scaled())
    assert d == D_OPT
    assert aug.blocks == (2, 2, 2, 1)
    assert aug.rows[3] == (0, 0, -D_OPT, 0, 0, -D_OPT, D_OPT)
    assert vecmat((1,) * 4, aug.rows) == (D_OPT,) * 7
    assert mdp_recognize(aug).gamma == 1 - D_OPT
    assert p_property(aug).holds


def test_augment_identity():
    aug, d = mdp_augment(eye(2))
    assert d == 1 and aug == eye(3)


def test_augment_rejects_nonpositive_sum():
    with pytest.raises(ValueError):
        mdp_augment(BlockMatrix([[1, -1], [-1, 1]], [1, 1]))


def test_gamma_zero_gives_basis_columns():
    inst = gen_instance(3, (2, 1, 3), 0, 11)
    for j, k in inst.A.column_ids():
        assert inst.A.column(j, k) == tuple(int(i == j) for i in range(3))


def test_generator_validation():
    with pytest.raises(ValueError):
        gen_instance(2, (1, 1), 1, 0)
    with pytest.raises(ValueError):
        gen_instance(2, (1,), Fraction(1, 2), 0)


def test_generator_is_deterministic():
    a = gen_instance(4, (2, 3, 1, 2), Fraction(1, 3), 99, disguise=True)
    b = gen_instance(4, (2, 3, 1, 2), Fraction(1, 3), 99, disguise=True)
    assert a == b
    assert a.meta() == {"gamma": "1/3", "disguised": True, "seed": 99}


def test_random_blocks():
    for seed in range(30):
        sizes = random_blocks(3, seed)
        assert len(sizes) == 3 and sum(sizes) > 3 and max(sizes) <= 4


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**64 - 1), gammas)
def test_recognize_inverts_generator(m, seed, gamma):
    inst = gen_instance(m, random_blocks(m, seed), gamma, seed)
    dec = mdp_recognize(inst.A)
    assert dec is not None and dec.gamma == gamma
    for (j, k), p in dec.P_columns.items():
        assert all(x >= 0 for x in p) and sum(p) == 1
        assert inst.A.column(j, k) == tuple(int(i == j) - gamma * x for i, x in enumerate(p))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6), gammas)
def test_disguise_hides_structure(m, seed, gamma):
    inst = gen_instance(m, random_blocks(m, seed), gamma, seed, disguise=True)
    assert determinant(inst.M) != 0
    assert inst.A == inst.A0.left_multiply(inst.M)
    # LP(A) is invariant under X -> X M^{-1}, so X = M^{-1} still certifies 1 - gamma
    assert two_step(inst.A).d >= 1 - gamma


def test_disguise_defeats_recognition():
    inst = gen_instance(3, (2, 2, 2), Fraction(1, 2), 7, disguise=True)
    assert mdp_recognize(inst.A) is None
    assert two_step(inst.A).d == two_step(inst.A0).d


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6), gammas, st.booleans())
def test_augment_of_two_step_output(m, seed, gamma, disguise):
    inst = gen_instance(m, random_blocks(m, seed, 3), gamma, seed, disguise)
    res = two_step(inst.A)
    aug, d = mdp_augment(res.scaling.XA_opt)
    assert d == res.d
    assert set(vecmat((1,) * (m + 1), aug.rows)) == {d}
    assert mdp_recognize(aug).gamma == 1 - d
    assert p_property(aug).holds
