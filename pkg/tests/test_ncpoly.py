import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_tuple
from nccf.errors import DimensionMismatch, ShapeMismatch, ViolationError
from nccf.freewords import iter_words
from nccf.ncpoly import (
    MatPoly,
    MatTuple,
    cauchy_bound_check,
    circle_sup,
    convolve,
    evaluate,
    fourier_coefficient,
    homogeneous_part,
    homogeneous_parts,
    opnorm,
    word_eval,
)


def naive_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


def brute_evaluate(f, X):
    """Unmemoized re-summation over every word, one fresh product per word."""
    out = 0
    for w in iter_words(f.d, max(f.degree, 0)):
        m = np.eye(X.n, dtype=complex)
        for k in w:
            m = naive_matmul(m, X[k - 1])
        out = out + np.kron(f.coeff(w), m)
    return out


def E(i, j, n=2):
    m = np.zeros((n, n))
    m[i - 1, j - 1] = 1
    return m


def test_word_eval_empty_is_identity(rng):
    X = random_tuple(rng, 2, 3)
    assert np.array_equal(word_eval(X, ()), np.eye(3))


def test_word_eval_jordan_square():
    X = MatTuple([E(2, 1)])
    assert np.array_equal(word_eval(X, (1, 1)), np.zeros((2, 2)))


def test_word_eval_matches_naive_product(rng):
    X = random_tuple(rng, 2, 4)
    assert np.allclose(word_eval(X, (1, 2)), naive_matmul(X[0], X[1]), atol=1e-14)
    assert np.allclose(
        word_eval(X, (2, 1, 2)), naive_matmul(naive_matmul(X[1], X[0]), X[1]), atol=1e-13
    )


def test_evaluate_constant(rng):
    c = np.array([[1 + 2j, 0.5], [0, -1]])
    X = random_tuple(rng, 3, 3)
    assert np.allclose(evaluate(MatPoly.constant(3, c), X), np.kron(c, np.eye(3)))


def test_evaluate_hand_example():
    r = 0.3
    f = MatPoly.from_scalars(2, {(1,): 1, (2,): 1})
    X = MatTuple([r * E(2, 1), r * E(2, 1)])
    F = evaluate(f, X)
    assert np.allclose(F, 2 * r * E(2, 1))
    assert opnorm(F) == pytest.approx(2 * r)


@pytest.mark.parametrize("seed", range(5))
def test_evaluate_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    f = MatPoly.random(rng, d, 3, 2, 3, density=0.6)
    X = random_tuple(rng, d, 3, 0.7)
    assert np.allclose(evaluate(f, X), brute_evaluate(f, X), atol=1e-12)


def test_zero_coefficients_are_pruned():
    f = MatPoly(2, 1, 1, {(1,): [[0.0]], (2,): [[1e-300]]})
    assert f.support == [(2,)]
    assert (f - f).support == []
    assert (f - f).degree == -1


def test_shape_checks():
    with pytest.raises(ShapeMismatch):
        MatPoly(1, 2, 2, {(): np.eye(3)})
    f = MatPoly.random(np.random.default_rng(0), 2, 1, 2, 3)
    with pytest.raises(ShapeMismatch):
        convolve(f, f)
    with pytest.raises(DimensionMismatch):
        evaluate(f, MatTuple.zeros(3, 2))


def test_convolve_unit_and_monomials(rng):
    g = MatPoly.random(rng, 2, 2, 2, 2)
    one = MatPoly.constant(2, np.eye(2))
    assert convolve(one, g).allclose(g)
    prod = convolve(MatPoly.monomial(2, "g1"), MatPoly.monomial(2, "g2"))
    assert prod.support == [(1, 2)]
    assert prod.coeff((1, 2))[0, 0] == 1


@pytest.mark.parametrize("seed", range(4))
def test_product_homomorphism(seed):
    rng = np.random.default_rng(100 + seed)
    f = MatPoly.random(rng, 2, 3, 2, 2)
    g = MatPoly.random(rng, 2, 3, 2, 1)
    fg = convolve(f, g)
    assert fg.degree <= f.degree + g.degree
    for _ in range(20):
        X = random_tuple(rng, 2, int(rng.integers(1, 5)), 0.5)
        lhs, rhs = evaluate(fg, X), evaluate(f, X) @ evaluate(g, X)
        assert opnorm(lhs - rhs) <= 1e-9 * max(1.0, opnorm(rhs))


def test_homogeneous_parts(rng):
    f = MatPoly.random(rng, 2, 3, 2, 2)
    X = random_tuple(rng, 2, 3, 0.6)
    assert np.allclose(homogeneous_part(f, X, 7), 0)
    c = MatPoly.constant(2, np.eye(2) * 3)
    assert np.allclose(homogeneous_part(c, X, 0), 3 * np.eye(6))
    assert np.allclose(sum(homogeneous_part(f, X, j) for j in range(4)), evaluate(f, X))
    assert all(np.allclose(a, b) for a, b in zip(homogeneous_parts(f, X), (homogeneous_part(f, X, j) for j in range(4))))


def test_homogeneous_part_is_fourier_coefficient(rng):
    f = MatPoly.random(rng, 2, 3, 1, 2)
    X = random_tuple(rng, 2, 2, 0.6)
    for j in range(4):
        assert np.allclose(fourier_coefficient(f, X, j, 16), homogeneous_part(f, X, j), atol=1e-12)


def test_circle_sup_examples(rng):
    c = np.array([[1, 2], [0, 1j]])
    X = random_tuple(rng, 2, 3)
    assert circle_sup(MatPoly.constant(2, c), X, 8) == pytest.approx(opnorm(c))
    X1 = MatTuple([0.7 * E(1, 2)])
    assert circle_sup(MatPoly.monomial(1, "g1"), X1, 64) == pytest.approx(0.7)


def test_circle_sup_dominates_samples_and_refines(rng):
    f = MatPoly.random(rng, 2, 3, 2, 2)
    X = random_tuple(rng, 2, 3, 0.5)
    sup = circle_sup(f, X, 256)
    for th in rng.uniform(0, 2 * np.pi, 10):
        assert sup >= opnorm(evaluate(f, X.scale(np.exp(1j * th)))) - 1e-3
    coarse = [circle_sup(f, X, g) for g in (8, 16, 32, 64, 128, 256)]
    assert all(b >= a - 1e-14 for a, b in zip(coarse, coarse[1:]))
    with pytest.raises(ValueError):
        circle_sup(f, X, 4)


def test_cauchy_examples():
    rep = cauchy_bound_check(MatPoly.constant(1, 2.0), MatTuple([[[0.3]]]), 0.5)
    assert rep.margins[0] == pytest.approx(0.0, abs=1e-15)
    rep = cauchy_bound_check(MatPoly.monomial(1, "g1"), MatTuple([[[1.0]]]), 0.9)
    assert rep.margins == [pytest.approx(0.9), pytest.approx(0.0, abs=1e-12)]


@pytest.mark.parametrize("seed", range(5))
def test_cauchy_random_degree_four(seed):
    rng = np.random.default_rng(seed)
    f = MatPoly.random(rng, 2, 4, 2, 2)
    X = random_tuple(rng, 2, 3)
    r = 0.8 / max(opnorm(x) for x in X)
    rep = cauchy_bound_check(f, X, r, 512, 1e-8)
    assert rep.ok and min(rep.margins) >= -1e-8


def test_cauchy_violation_is_reported(monkeypatch):
    import nccf.ncpoly as ncpoly

    monkeypatch.setattr(ncpoly, "circle_sup", lambda f, X, grid: 0.0)
    with pytest.raises(ViolationError) as info:
        ncpoly.cauchy_bound_check(MatPoly.constant(1, 1.0), MatTuple([[[0.5]]]), 0.5)
    assert not info.value.report.ok


def test_operator_space_axioms(rng):
    for _ in range(10):
        f = MatPoly.random(rng, 2, 2, 2, 1)
        g = MatPoly.random(rng, 2, 2, 1, 3)
        X = random_tuple(rng, 2, 3, 0.5)
        fg = opnorm(evaluate(f.direct_sum(g), X))
        assert fg == pytest.approx(max(opnorm(evaluate(f, X)), opnorm(evaluate(g, X))), rel=1e-12)
        A, B = rng.standard_normal((3, 2)), rng.standard_normal((1, 2))
        lhs = opnorm(evaluate(f.sandwich(A, B), X))
        assert lhs <= opnorm(A) * opnorm(evaluate(f, X)) * opnorm(B) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity(seed, alpha):
    rng = np.random.default_rng(seed)
    f = MatPoly.random(rng, 2, 2, 2, 2, density=0.5)
    g = MatPoly.random(rng, 2, 2, 2, 2, density=0.5)
    X = random_tuple(rng, 2, 2, 0.5)
    assert np.allclose(evaluate(f + g, X), evaluate(f, X) + evaluate(g, X), atol=1e-10)
    assert np.allclose(evaluate(alpha * f, X), alpha * evaluate(f, X), atol=1e-9)


def test_json_roundtrip(rng):
    f = MatPoly.random(rng, 3, 2, 2, 1, density=0.5)
    assert MatPoly.from_json(f.to_json()).allclose(f, atol=0)
    obj = {"d": 2, "p": 1, "q": 1, "terms": [{"word": "g1g2", "re": [[1.0]], "im": [[2.0]]}]}
    assert MatPoly.from_json(obj).coeff((1, 2))[0, 0] == 1 + 2j


def test_immutability(rng):
    f = MatPoly.random(rng, 1, 1)
    with pytest.raises(TypeError):
        f.coeffs[(1,)] = np.eye(1)
    with pytest.raises(ValueError):
        f.coeffs[()][0, 0] = 3
    X = random_tuple(rng, 1, 2)
    with pytest.raises(ValueError):
        X.matrices[0, 0, 0] = 1


def test_pickle_roundtrip(rng):
    import pickle

    f = MatPoly.random(rng, 2, 2)
    X = random_tuple(rng, 2, 2)
    assert pickle.loads(pickle.dumps(f)).allclose(f, atol=0)
    assert np.array_equal(pickle.loads(pickle.dumps(X)).matrices, X.matrices)


def test_numpy_scalar_multiplication(rng):
    X = random_tuple(rng, 2, 2)
    Y = np.float64(0.5) * X
    assert isinstance(Y, MatTuple) and np.allclose(Y.matrices, 0.5 * X.matrices)
    f = MatPoly.random(rng, 2, 1)
    assert isinstance(np.complex128(2j) * f, MatPoly)
