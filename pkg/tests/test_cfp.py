import math

import numpy as np
import pytest

from conftest import random_tuple
from nccf.cfp import (
    INFEASIBLE,
    NOT_REFUTED,
    OptimizerConfig,
    Pencil,
    circled_lmi_sweep,
    classical_problem,
    feasibility,
    lmi_check,
    nilpotent_norm,
    oracle_certificate,
    phi_series,
    phi_transform,
    schur_matrix,
    shift_candidate,
    spectral_radius,
    toeplitz_norm,
    verify_witness,
)
from nccf.domains import gauge, mixedball, polydisc, rowball
from nccf.errors import DimensionMismatch, SingularResolvent, UnsupportedSupport
from nccf.freewords import InitialSegment, ball_segment
from nccf.ncpoly import MatPoly, MatTuple, evaluate, opnorm
from nccf.nilpotent import is_lambda_nilpotent

SMALL = OptimizerConfig(restarts=4, max_iter=100)


def test_schur_matrix_layout():
    T = schur_matrix([1, 2, 3])
    assert np.array_equal(T, [[1, 0, 0], [2, 1, 0], [3, 2, 1]])
    B = schur_matrix([np.eye(2), np.ones((2, 2))])
    assert B.shape == (4, 4) and np.array_equal(B[2:, :2], np.ones((2, 2)))


def test_toeplitz_closed_form():
    # all-ones lower triangular matrix of size m has norm 1/(2 sin(π/(2(2m+1))))
    for m in range(1, 6):
        expect = 1 / (2 * math.sin(math.pi / (2 * (2 * m + 1))))
        assert toeplitz_norm(np.ones(m)) == pytest.approx(expect, rel=1e-12)
    assert oracle_certificate([1, 1, 1]).value == pytest.approx(2.246979603717467, abs=1e-12)


def test_classical_problem_shape():
    p, seg, D = classical_problem([0.5, 0.25])
    assert p.d == 1 and seg == ball_segment(1, 1) and D == polydisc(1)


@pytest.mark.parametrize("c", [[1, 1, 1], [0.5], [0, 2], [1, -0.5j, 0.25]])
def test_optimizer_matches_oracle(c):
    p, seg, D = classical_problem(c)
    cert = nilpotent_norm(p, seg, D, SMALL)
    assert cert.value == pytest.approx(toeplitz_norm(c), rel=1e-6)
    assert cert.value <= toeplitz_norm(c) * (1 + 1e-12)
    assert verify_witness(p, seg, D, cert)


def test_block_oracle():
    rng = np.random.default_rng(7)
    c = [rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)) for _ in range(3)]
    p, seg, D = classical_problem(c)
    cert = nilpotent_norm(p, seg, D, SMALL)
    assert cert.value == pytest.approx(toeplitz_norm(c), rel=1e-6)


def test_free_benchmark():
    p = MatPoly.from_scalars(2, {(1,): 1, (2,): 1})
    cert = nilpotent_norm(p, ball_segment(2, 1), polydisc(2), OptimizerConfig(restarts=8))
    assert 2 - 1e-3 <= cert.value < 2
    assert verify_witness(p, ball_segment(2, 1), polydisc(2), cert)


def test_shift_candidate():
    p = MatPoly.from_scalars(2, {(1,): 1, (2,): 1})
    val, X = shift_candidate(p, ball_segment(2, 1), rowball(1.0, 2))
    assert val == pytest.approx(math.sqrt(2), rel=1e-8)
    assert gauge(rowball(1.0, 2), X) < 1


def test_constant_polynomial():
    p = MatPoly.constant(2, 2.0)
    cert = nilpotent_norm(p, ball_segment(2, 0), polydisc(2), SMALL)
    assert cert.value == 2.0


def test_witness_contract():
    rng = np.random.default_rng(1)
    seg = InitialSegment(2, {(), (1,), (2,), (2, 1)})
    for D in (polydisc(2), mixedball(1, 2), rowball(0.6, 2)):
        p = MatPoly(2, 1, 2, {w: rng.standard_normal((1, 2)) for w in seg.words})
        cert = nilpotent_norm(p, seg, D, SMALL)
        W = cert.witness
        assert gauge(D, W) < 1
        assert is_lambda_nilpotent(W, seg)
        assert cert.residual <= 1e-12
        assert opnorm(evaluate(p, W)) == pytest.approx(cert.value, rel=1e-12)
        assert cert.value >= cert.diagnostics["shift_value"] - 1e-9


def test_scaling_homogeneity():
    rng = np.random.default_rng(2)
    p = MatPoly.random(rng, 2, 2, 1, 1)
    seg, D = ball_segment(2, 2), polydisc(2)
    a = nilpotent_norm(p, seg, D, SMALL).value
    b = nilpotent_norm(3.0 * p, seg, D, SMALL).value
    assert b == pytest.approx(3 * a, rel=1e-6)


def test_monotone_in_segment():
    # a Λ-nilpotent witness is Λ'-nilpotent for Λ ⊆ Λ'
    p = MatPoly.from_scalars(2, {(): 0.2, (1,): 1, (2,): 1})
    small, big = ball_segment(2, 1), ball_segment(2, 2)
    cert = nilpotent_norm(p, small, polydisc(2), SMALL)
    assert is_lambda_nilpotent(cert.witness, big)
    assert nilpotent_norm(p, big, polydisc(2), SMALL).value >= cert.value - 1e-9


def test_determinism_and_jobs():
    rng = np.random.default_rng(3)
    p = MatPoly.random(rng, 2, 2, 1, 1)
    seg, D = ball_segment(2, 2), mixedball(2, 1)
    a = nilpotent_norm(p, seg, D, SMALL)
    b = nilpotent_norm(p, seg, D, SMALL)
    c = nilpotent_norm(p, seg, D, OptimizerConfig(restarts=4, max_iter=100, jobs=2))
    assert a.to_json() == b.to_json() == c.to_json()


def test_problem_errors():
    seg = ball_segment(2, 1)
    with pytest.raises(UnsupportedSupport):
        nilpotent_norm(MatPoly.monomial(2, "g1g2"), seg, polydisc(2))
    with pytest.raises(DimensionMismatch):
        nilpotent_norm(MatPoly.monomial(2, "g1"), seg, polydisc(3))


def test_feasibility_verdicts():
    p, seg, D = classical_problem([0.5])
    assert feasibility(p, seg, D, 1.0, SMALL).verdict == NOT_REFUTED
    p, seg, D = classical_problem([0, 2])
    v = feasibility(p, seg, D, 1.0, SMALL)
    assert v.verdict == INFEASIBLE and v.infeasible
    assert v.to_json()["verdict"] == INFEASIBLE
    # value just above the bound but inside the tolerance is not a refutation
    p, seg, D = classical_problem([1.0])
    assert feasibility(p, seg, D, 1.0 - 1e-12, SMALL, tol=1e-9).verdict == NOT_REFUTED
    with pytest.raises(ValueError):
        feasibility(p, seg, D, 0.0)


# -- pencils ------------------------------------------------------------------


def random_pencil(rng, d=2, k=2, scale=0.5):
    return Pencil(scale * (rng.standard_normal((d, k, k)) + 1j * rng.standard_normal((d, k, k))))


def test_pencil_matches_polynomial(rng):
    L = random_pencil(rng)
    X = random_tuple(rng, 2, 3)
    assert np.allclose(L(X), evaluate(L.as_poly(), X))


def test_phi_against_series(rng):
    L = random_pencil(rng, scale=0.2)
    X = random_tuple(rng, 2, 2, 0.5)
    assert spectral_radius(L, X) < 1
    assert np.allclose(phi_transform(L, X), phi_series(L, X, 200), atol=1e-12)


def test_phi_lmi_equivalence(rng):
    checked = 0
    for _ in range(200):
        L = random_pencil(rng, scale=rng.uniform(0.1, 1.0))
        X = random_tuple(rng, 2, 2, rng.uniform(0.1, 1.0))
        try:
            phi = phi_transform(L, X)
        except SingularResolvent:
            continue
        lam = lmi_check(L, X)
        if abs(lam) < 1e-8:
            continue
        assert (opnorm(phi) < 1) == (lam > 0)
        checked += 1
    assert checked > 150


def test_singular_resolvent():
    L = Pencil([[[2.0]]])
    with pytest.raises(SingularResolvent):
        phi_transform(L, MatTuple([[[1.0]]]))


def test_circled_sweep(rng):
    L = Pencil([[[1.0]]])
    assert circled_lmi_sweep(L, MatTuple([[[0.5]]])) == pytest.approx(1.0, abs=1e-9)
    assert circled_lmi_sweep(L, MatTuple([[[1.5]]])) < 0
    for _ in range(30):
        L = random_pencil(rng)
        X = random_tuple(rng, 2, 2, rng.uniform(0.1, 1.0))
        if circled_lmi_sweep(L, X) > 0:
            assert spectral_radius(L, X) < 1
    with pytest.raises(ValueError):
        circled_lmi_sweep(L, X, grid=4)


def test_shift_does_not_attain_polydisc_value():
    # both X_j = E21 is Λ(1)-nilpotent with ||X_1 + X_2|| = 2, the shift only reaches sqrt(2)
    p = MatPoly.from_scalars(2, {(1,): 1, (2,): 1})
    cert = nilpotent_norm(p, ball_segment(2, 1), polydisc(2), OptimizerConfig(restarts=8))
    assert cert.diagnostics["shift_value"] == pytest.approx(math.sqrt(2), rel=1e-8)
    assert cert.value > 1.99 and cert.method == "optimizer"


def test_circled_sweep_scalar_example():
    L = Pencil([[[1.0]]])
    assert circled_lmi_sweep(L, MatTuple([[[0.9]]])) == pytest.approx(0.2, abs=1e-10)
    assert spectral_radius(L, MatTuple([[[0.9]]])) < 1


def test_value_below_sampled_sup():
    # the nilpotent points are a subset of D: padding the witness with a
    # non-nilpotent point Y gives a point of D whose value dominates
    from nccf.domains import direct_sum, member, sample

    rng = np.random.default_rng(12)
    p = MatPoly.random(rng, 2, 2, 1, 1)
    seg, D = ball_segment(2, 2), rowball(0.8, 2)
    cert = nilpotent_norm(p, seg, D, SMALL)
    sup = 0.0
    for _ in range(20):
        Y = sample(D, 2, rng, 0.1)
        Z = direct_sum(cert.witness, Y)
        assert member(D, Z) and not is_lambda_nilpotent(Z, seg)
        sup = max(sup, opnorm(evaluate(p, Z)))
    assert cert.value <= sup + 1e-9
