import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from histent import entanglement as ent
from histent import histories

R5 = math.sqrt(5)
HARDY_A6B6 = np.array([[-1, 1], [1, 0]]) / 4


def test_hardy_gram_is_thirds():
    assert np.allclose(ent.normalized_gram(HARDY_A6B6), np.array([[2, -1], [-1, 1]]) / 3, atol=1e-15)


def test_hardy_spectrum_against_sympy():
    c = sympy.Matrix([[-1, 1], [1, 0]]) / 4
    gram = c * c.H / (c * c.H).trace()
    exact = sorted((sympy.N(v, 30) for v in gram.eigenvals()), reverse=True)
    got = ent.schmidt_spectrum(HARDY_A6B6).squared
    assert all(abs(float(e) - g) < 1e-14 for e, g in zip(exact, got))
    assert abs(got[0] - (3 + R5) / 6) < 1e-14


def test_hardy_entropy_high_precision():
    mpmath.mp.dps = 30
    p1 = (3 + mpmath.sqrt(5)) / 6
    p2 = (3 - mpmath.sqrt(5)) / 6
    exact = -(p1 * mpmath.log(p1) + p2 * mpmath.log(p2))
    got = ent.entanglement_entropy(ent.schmidt_spectrum(HARDY_A6B6))
    assert abs(got - float(exact)) < 1e-14
    assert abs(got - 0.381264053728103) < 1e-14


def test_hardy_robustness_and_rank():
    r = ent.report(HARDY_A6B6)
    lam = np.sqrt([(3 + R5) / 6, (3 - R5) / 6])
    assert abs(r.robustness - (lam.sum() ** 2 - 1)) < 1e-14
    assert abs(r.robustness - 2 / 3) < 1e-14
    assert r.rank == 2 and r.entangled


def test_combined_purity_is_seven_ninths(hardy_circuit):
    combined = histories.combined_matrix(hardy_circuit, list(hardy_circuit.postselections))
    exact = sympy.Matrix(4, 4, [sympy.nsimplify(complex(z).real) + sympy.I * sympy.nsimplify(complex(z).imag)
                                for z in (4 * combined.entries).ravel()])
    gram = exact * exact.H
    gram = gram / gram.trace()
    assert sympy.simplify((gram * gram).trace()) == sympy.Rational(7, 9)
    assert abs(ent.purity(combined) - 7 / 9) < 1e-14


def test_zero_matrix_rejected():
    with pytest.raises(ent.ZeroPropagatorError):
        ent.schmidt_spectrum(np.zeros((2, 2)))
    with pytest.raises(ent.ZeroPropagatorError):
        ent.concurrence(np.zeros((3, 2)))


def test_rank_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        ent.schmidt_rank(ent.schmidt_spectrum(HARDY_A6B6), 0.0)


def test_rank_tolerance_is_respected():
    c = np.diag([1.0, 1e-6])
    spectrum = ent.schmidt_spectrum(c)
    assert ent.schmidt_rank(spectrum) == 2
    assert ent.schmidt_rank(spectrum, 1e-4) == 1


def test_non_square_matrix():
    c = np.array([[1, 0, 0], [0, 1, 0]], dtype=complex)
    r = ent.report(c)
    assert len(r.spectrum) == 2 and r.rank == 2
    assert abs(r.concurrence - 1) < 1e-14
    assert abs(r.entropy - math.log(2)) < 1e-14


def test_maximally_entangled_bounds():
    for d in (2, 3, 4):
        r = ent.report(np.eye(d))
        assert abs(r.entropy - math.log(d)) < 1e-12
        assert abs(r.concurrence - math.sqrt(2 * (1 - 1 / d))) < 1e-12
        assert abs(r.robustness - (d - 1)) < 1e-12


def test_concurrence_keeps_precision_near_separable():
    eps = 1e-9
    c = np.array([[1, 0], [0, eps]])
    p2 = eps**2 / (1 + eps**2)
    expected = 2 * math.sqrt(p2 * (1 - p2))
    assert abs(ent.concurrence(c) - expected) < 1e-6 * expected


matrices = st.tuples(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1)).map(
    lambda t: np.random.default_rng(t[2]).normal(size=(t[0], t[1], 2)) @ np.array([1, 1j])
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_spectrum_invariants(c):
    s = ent.schmidt_spectrum(c)
    p = np.array(s.squared)
    assert abs(p.sum() - 1) < 1e-12
    assert np.all(np.diff(s.lambdas) <= 1e-15)
    assert np.all(p >= 0)
    r = ent.report(c)
    d = min(c.shape)
    assert 0 <= r.entropy <= math.log(d) + 1e-12
    assert 0 <= r.concurrence <= math.sqrt(2 * (1 - 1 / d)) + 1e-12
    assert abs(r.concurrence - ent.concurrence_from_spectrum(s)) < 1e-8
    assert abs(r.robustness - (sum(s.lambdas) ** 2 - 1)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(matrices, st.floats(0, 2 * math.pi), st.floats(0.01, 100))
def test_phase_and_scale_invariance(c, phase, scale):
    before = ent.report(c)
    after = ent.report(scale * np.exp(1j * phase) * c)
    assert np.allclose(before.spectrum.squared, after.spectrum.squared, atol=1e-10)
    assert abs(before.concurrence - after.concurrence) < 1e-10


def test_local_unitary_invariance():
    rng = np.random.default_rng(5)
    for _ in range(30):
        c = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
        u = unitary_group.rvs(3, random_state=rng)
        v = unitary_group.rvs(4, random_state=rng)
        a, b = ent.report(c), ent.report(u @ c @ v)
        assert np.allclose(a.spectrum.squared, b.spectrum.squared, atol=1e-10)
        assert abs(a.entropy - b.entropy) < 1e-10


def test_transpose_symmetry():
    rng = np.random.default_rng(6)
    c = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    assert np.allclose(ent.schmidt_spectrum(c).squared, ent.schmidt_spectrum(c.T).squared)


def test_rank_one_iff_measures_vanish():
    rng = np.random.default_rng(7)
    for _ in range(25):
        u, v = rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=2) + 0j
        r = ent.report(np.outer(u, v))
        assert r.rank == 1 and not r.entangled
        assert max(r.concurrence, r.entropy, r.robustness) < 1e-8
