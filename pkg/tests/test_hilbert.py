import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from histent.hilbert import (
    DimensionMismatchError,
    Mode,
    ModeIndexError,
    Particle,
    TwoParticleState,
    from_terms,
    inner_product,
    project,
    squared_norm,
)

amp = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
states = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 2)), amp, max_size=12).map(
    lambda d: TwoParticleState(4, 3, d)
)


def test_basis_state_has_single_entry():
    s = TwoParticleState.basis(7, 7, 0, 0)
    assert len(s) == 1 and s[(0, 0)] == 1 and s[(1, 0)] == 0
    assert squared_norm(s) == 1.0


def test_tiny_amplitudes_pruned():
    s = TwoParticleState(2, 2, {(0, 0): 1e-13, (1, 1): 0.5})
    assert list(s) == [((1, 1), 0.5 + 0j)]


def test_out_of_range_pair_rejected():
    with pytest.raises(ModeIndexError, match="outside mode space"):
        TwoParticleState(2, 2, {(2, 0): 1})
    with pytest.raises(ModeIndexError):
        project(TwoParticleState.empty(2, 2), (0, 5))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner_product(TwoParticleState.empty(2, 2), TwoParticleState.empty(2, 3))
    with pytest.raises(DimensionMismatchError):
        TwoParticleState.empty(2, 2) + TwoParticleState.empty(3, 2)


def test_from_terms_sums_repeats():
    s = from_terms(3, 3, [(0, 1, 0.5), (0, 1, 0.25j), (2, 2, 1)])
    assert s[(0, 1)] == 0.5 + 0.25j and len(s) == 2


def test_inner_product_conjugates_bra():
    bra = TwoParticleState(2, 2, {(0, 0): 1j})
    ket = TwoParticleState(2, 2, {(0, 0): 1})
    assert inner_product(bra, ket) == -1j
    assert inner_product(ket, bra) == 1j


def test_mode_labels():
    assert str(Mode("A", 6)) == "a6" and str(Mode(Particle.B, 3)) == "b3"
    with pytest.raises(ValueError):
        Mode("A", -1)
    with pytest.raises(ValueError):
        Mode("C", 1)


def test_state_is_immutable():
    s = TwoParticleState.basis(2, 2, 1, 1)
    with pytest.raises(TypeError):
        s.amplitudes[(0, 0)] = 1


@given(states, states)
def test_inner_product_hermitian(x, y):
    assert abs(inner_product(x, y) - np.conj(inner_product(y, x))) <= 1e-9


@given(states)
def test_norm_matches_self_inner_product(x):
    assert abs(inner_product(x, x).real - squared_norm(x)) <= 1e-9 * max(1, squared_norm(x))
    assert abs(inner_product(x, x).imag) <= 1e-9 * max(1, squared_norm(x))


@given(states, st.tuples(st.integers(0, 3), st.integers(0, 2)))
def test_projection_idempotent(x, pair):
    once = project(x, pair)
    assert project(once, pair).allclose(once)
    assert len(once) <= 1 and once[pair] == x[pair]


@given(states, states, amp)
def test_linear_combination(x, y, c):
    z = x + c * y
    for pair in set(p for p, _ in x) | set(p for p, _ in y):
        assert abs(z[pair] - (x[pair] + c * y[pair])) <= 1e-9 * (1 + abs(c)) * 10
