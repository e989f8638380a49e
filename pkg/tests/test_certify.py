import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pcanon.blockmat import BlockMatrix, p_property, representative_submatrix, solve_linear, vecmat
from pcanon.certify import (
    FailureCertificate,
    check_failure_certificate,
    check_lp_dual,
    check_scaling_dual,
    failure_certificate,
    glcp_by_enumeration,
    k_matrix_check,
    theorem2_verdict,
    zform_verdict,
)
from pcanon.errors import PcanonError
from pcanon.mdp import gen_instance, random_blocks
from pcanon.scaling import DualCertificate, two_step

from reference import D_OPT, X_SCALE, eye, non_mdp, sample_a, sample_abar

BAD_Z = BlockMatrix([[1, -2], [-2, 1]], [1, 1])


def test_k_matrix_examples():
    ok = k_matrix_check(eye(3).rows)
    assert ok.is_k and ok.witness == (1, 1, 1)
    assert not k_matrix_check([[1, -2], [-2, 1]]).is_k
    assert not k_matrix_check([[1, -1], [-1, 1]]).is_k  # singular
    with pytest.raises(ValueError):
        k_matrix_check([[1, 2], [0, 1]])


def test_k_witness_is_positive_image():
    M = [[3, -1, 0], [-1, 3, -1], [0, -1, 3]]
    v = k_matrix_check(M)
    assert all(x > 0 for x in v.witness)
    assert all(sum(a * x for a, x in zip(row, v.witness)) == 1 for row in M)


def test_failure_certificate_for_bad_z():
    cert = failure_certificate(BAD_Z)
    assert cert is not None and check_failure_certificate(BAD_Z, cert)
    assert all(x <= 0 for x in cert.residual(BAD_Z))
    hand = FailureCertificate((0, 0), (Fraction(1, 2), Fraction(1, 2)))
    assert hand.residual(BAD_Z) == (Fraction(-1, 2), Fraction(-1, 2))
    assert check_failure_certificate(BAD_Z, hand)


def test_failure_certificate_rejections():
    assert not check_failure_certificate(BAD_Z, FailureCertificate((0, 0), (0, 0)))
    assert not check_failure_certificate(BAD_Z, FailureCertificate((0, 0), (-1, 1)))
    assert not check_failure_certificate(BAD_Z, FailureCertificate((0, 0), (1, 0)))


def test_failure_certificate_with_wider_blocks():
    Abar = BlockMatrix([[1, 2, -3, 0], [-3, 0, 1, 1]], [2, 2])
    verdict = zform_verdict(Abar)
    assert not verdict.holds and check_failure_certificate(Abar, verdict.cert)
    assert verdict.to_json()["certificate"]["selection"] == [1, 1]


def test_no_certificate_for_valid_zform():
    assert failure_certificate(sample_abar()) is None
    assert zform_verdict(sample_abar()).holds


def test_verdict_on_sample():
    v = theorem2_verdict(sample_a())
    assert v.holds and v.p == X_SCALE and not v.degraded
    assert all(s > 0 for s in vecmat(v.p, v.Abar.rows))
    A = sample_a()
    for sel in A.selections():
        assert all(x > 0 for x in solve_linear(representative_submatrix(A, sel), v.b))


def test_verdict_on_identity():
    v = theorem2_verdict(eye(2))
    assert v.holds and v.p == (1, 1) and v.b == (1, 1)


def test_verdict_degraded_mode():
    A = non_mdp()
    assert p_property(A).holds
    v = theorem2_verdict(A)
    assert not v.holds and v.degraded and v.stage == "optimal_scaling"
    assert check_failure_certificate(v.Abar, v.cert)
    js = v.to_json()
    assert "p" not in js and js["certificate"]["Cx"]
    with pytest.raises(PcanonError):
        two_step(A)


def test_random_p_matrices_get_exactly_one_verdict():
    rng = random.Random(20240601)
    seen = {True: 0, False: 0}
    for _ in range(400):
        rows = [[rng.randint(-4, 4) for _ in range(6)] for _ in range(3)]
        A = BlockMatrix(rows, (2, 2, 2))
        if not p_property(A).holds:
            continue
        v = theorem2_verdict(A)
        seen[v.holds] += 1
        if v.holds:
            assert v.cert is None
            assert all(p > 0 for p in v.p)
            assert all(s > 0 for s in vecmat(v.p, v.Abar.rows))
        else:
            assert v.p is None and check_failure_certificate(v.Abar, v.cert)
    assert seen[True] and seen[False]


def test_enumeration_rejects_non_p():
    with pytest.raises(PcanonError):
        glcp_by_enumeration(BlockMatrix([[1, -1]], [2]), (-1, -1))


def test_dual_checks_reject_tampering():
    res = two_step(sample_a())
    Abar, good = res.zform.Abar, res.lp_dual
    assert check_lp_dual(Abar, good, D_OPT)
    assert not check_lp_dual(Abar, good, D_OPT + 1)
    shifted = tuple(w + (1 if i == 0 else -1 if i == 3 else 0) for i, w in enumerate(good.w))
    assert not check_lp_dual(Abar, DualCertificate(good.y, shifted, good.objective))
    scaled = DualCertificate({k: 2 * v for k, v in good.y.items()}, good.w, 2 * good.objective)
    assert not check_lp_dual(Abar, scaled)
    # the lifted dual uses cross-block y, which the scaling dual forbids
    assert not check_scaling_dual(Abar, good)
    assert check_scaling_dual(Abar, res.scaling_dual, D_OPT)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6), st.booleans())
def test_verdict_holds_on_generated(m, seed, disguise):
    inst = gen_instance(m, random_blocks(m, seed, 3), Fraction(4, 5), seed, disguise)
    v = theorem2_verdict(inst.A)
    assert v.holds
    assert all(s > 0 for s in vecmat(v.p, v.Abar.rows))
