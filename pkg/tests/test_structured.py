import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphacirc.core import MultiIndex, make_rng, random_complex
from alphacirc.errors import ConfigurationError, DomainError
from alphacirc.models import MatrixKind
from alphacirc.spectra import svd_oracle
from alphacirc.structured import (
    ShiftPattern,
    ShiftVariant,
    alpha_circulant,
    alpha_toeplitz,
    circulant,
    circulant_factorization_residual,
    circulant_via_fourier,
    dumps_matrix,
    flip_residual,
    fourier_matrix,
    gcd_data,
    gcd_factorization_residual,
    loads_matrix,
    permute_levels,
    reduce_alpha,
    shift_matrix,
    tail_embedding,
    toeplitz_tail_split,
    verify_alpha_reduction,
    verify_block_repetition,
    verify_fourier_shift_identity,
)
from alphacirc.symbols import SymbolSpec, random_symbol


def full_shift(n, alpha):
    return shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha)))


def test_reduce_alpha():
    """alpha is reduced modulo n."""
    assert reduce_alpha(7, 5) == 2
    assert reduce_alpha(3, 5) == 3
    with pytest.raises(DomainError):
        reduce_alpha(-1, 5)


def test_gcd_data_examples():
    """Fold geometry for the worked sizes."""
    d = gcd_data(5, 3)
    assert (d.g, d.n_alpha, d.alpha_check, d.mu_alpha) == (1, 5, 3, 2)
    d = gcd_data(4, 2)
    assert (d.g, d.n_alpha, d.alpha_check, d.mu_alpha) == (2, 2, 1, 2)
    d = gcd_data(6, 4)
    assert (d.g, d.n_alpha, d.alpha_check, d.mu_alpha, d.d_tail) == (2, 3, 2, 2, 24)
    with pytest.raises(DomainError):
        gcd_data(5, 0)


def test_shift_matrix_examples():
    """alpha = 1 is the identity; (5, 3) is the permutation r = 3s mod 5."""
    np.testing.assert_array_equal(full_shift(6, 1), np.eye(6))
    z = full_shift(5, 3)
    assert [int(np.argmax(z[:, s])) for s in range(5)] == [0, 3, 1, 4, 2]


@pytest.mark.property_based
@given(st.integers(1, 12), st.integers(0, 30))
@settings(max_examples=60, deadline=None)
def test_shift_matrix_column_and_row_sums(n, alpha):
    """Every column holds one 1; coprime shifts are permutations."""
    z = full_shift(n, alpha)
    np.testing.assert_array_equal(z.sum(axis=0), np.ones(n))
    if np.gcd(n, alpha) == 1:
        np.testing.assert_array_equal(z.sum(axis=1), np.ones(n))


def test_shift_variant_shapes():
    """Variants have the documented shapes."""
    n, alpha = MultiIndex.of(6), MultiIndex.of(4)
    assert shift_matrix(ShiftPattern(n, alpha, ShiftVariant.FIRST_N_ALPHA)).shape == (6, 3)
    assert shift_matrix(ShiftPattern(n, alpha, ShiftVariant.FIRST_MU)).shape == (6, 2)
    assert shift_matrix(ShiftPattern(n, alpha, ShiftVariant.TAIL_COLS)).shape == (24, 4)


def test_block_repetition_and_reduction():
    """Z_{6,4} repeats Z-tilde twice and Z_{5,8} equals Z_{5,3}."""
    assert verify_block_repetition(6, 4) == 0.0
    assert verify_alpha_reduction(5, 8) == 0.0
    np.testing.assert_array_equal(full_shift(5, 8), full_shift(5, 3))


def test_fourier_matrix():
    """Two-point DFT, Kronecker structure and unitarity."""
    f2 = fourier_matrix(2)
    np.testing.assert_allclose(f2, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(fourier_matrix((2, 2)), np.kron(f2, f2), atol=1e-15)
    np.testing.assert_allclose(fourier_matrix(1), [[1.0]])
    f = fourier_matrix(12)
    np.testing.assert_allclose(f @ f.conj().T, np.eye(12), atol=1e-12)


@pytest.mark.parametrize("n,alpha", [(4, 2), (5, 3), (6, 4), (12, 8), (9, 6)])
def test_fourier_shift_identity(n, alpha):
    """F Z-tilde = (n,alpha)^(-1/2) I F Z, also for conjugated Fourier matrices."""
    assert verify_fourier_shift_identity(n, alpha) < 1e-12
    assert verify_fourier_shift_identity(n, alpha, conjugate=True) < 1e-12
    assert gcd_factorization_residual(n, alpha) == 0.0


def test_fourier_shift_identity_needs_alpha_below_n():
    """alpha >= n falls outside the identity."""
    with pytest.raises(DomainError):
        verify_fourier_shift_identity(4, 4)


def test_circulant_examples():
    """e_0 gives the identity and e_1 the cyclic forward shift."""
    np.testing.assert_array_equal(circulant([1, 0, 0], 3).matrix, np.eye(3))
    shift = circulant([0, 1, 0], 3).matrix
    np.testing.assert_array_equal(shift, np.roll(np.eye(3), 1, axis=0))


def test_circulant_matches_fourier_form(rng):
    """Direct entries agree with F diag(sqrt(n) F* a) F*."""
    a = random_complex(rng, 8)
    np.testing.assert_allclose(circulant(a, 8).matrix, circulant_via_fourier(a, 8), atol=1e-10)
    a2 = random_complex(rng, 6)
    np.testing.assert_allclose(circulant(a2, (2, 3)).matrix, circulant_via_fourier(a2, (2, 3)), atol=1e-10)


def test_alpha_circulant_example():
    """For n=5, alpha=3 column 1 reads (a2, a3, a4, a0, a1)."""
    a = np.arange(5) + 1.0
    m = alpha_circulant(a, 5, 3).matrix
    np.testing.assert_array_equal(m[:, 1].real, [3, 4, 5, 1, 2])
    assert alpha_circulant(a, 5, 3).kind is MatrixKind.ALPHA_CIRCULANT


def test_alpha_circulant_zero_shift_repeats_columns(rng):
    """alpha = 0 makes every column equal to a."""
    a = random_complex(rng, 4)
    m = alpha_circulant(a, 4, 0).matrix
    for s in range(4):
        np.testing.assert_array_equal(m[:, s], a)


@pytest.mark.property_based
@given(st.integers(1, 12), st.integers(0, 24), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60, deadline=None)
def test_circulant_factorization_is_exact(n, alpha, seed):
    """C_{n,alpha} = C_n Z_{n,alpha} holds exactly."""
    a = random_complex(make_rng(seed), n)
    assert circulant_factorization_residual(a, n, alpha) == 0.0


def test_multilevel_circulant_factorization(rng):
    """The multilevel shift is the Kronecker product of level shifts."""
    a = random_complex(rng, 24)
    assert circulant_factorization_residual(a, (2, 3, 4), (1, 2, 0)) == 0.0


def test_alpha_toeplitz_example():
    """n=5, alpha=3: column 1 is (a_-3, a_-2, a_-1, a_0, a_1)."""
    s = SymbolSpec.of({j: float(j) + 100.0 for j in range(-12, 5)})
    m = alpha_toeplitz(s, 5, 3).matrix
    np.testing.assert_array_equal(m[:, 0].real, [100, 101, 102, 103, 104])
    np.testing.assert_array_equal(m[:, 1].real, [97, 98, 99, 100, 101])
    assert alpha_toeplitz(s, 5, 1).kind is MatrixKind.TOEPLITZ


def test_alpha_toeplitz_zero_shift_is_constant_columns():
    """alpha = 0 gives [a_r] in every column."""
    s = SymbolSpec.of({0: 1.0, 1: 2.0, 2: 3.0, -1: 9.0})
    m = alpha_toeplitz(s, 3, 0).matrix
    for c in range(3):
        np.testing.assert_array_equal(m[:, c].real, [1, 2, 3])


def test_alpha_toeplitz_huge_alpha_reads_coefficients_sparsely():
    """Only column 0 meets the support of 1 + e^{ix} when alpha = 10^12."""
    s = SymbolSpec.of({0: 1.0, 1: 1.0})
    m = alpha_toeplitz(s, 5, 10 ** 12).matrix
    expected = np.zeros((5, 5))
    expected[[0, 1], [0, 0]] = 1.0
    np.testing.assert_array_equal(m, expected)
    two_level = alpha_toeplitz(SymbolSpec.of({(0, 0): 2.0}), (2, 3), (10 ** 9, 1)).matrix
    np.testing.assert_array_equal(two_level, np.diag([2.0, 2.0, 2.0, 0.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        alpha_toeplitz(s, 5, 10 ** 20)


def test_toeplitz_tail_split_examples():
    """Head is T_n Z-hat; the first tail column starts with a_-6 for (5, 3)."""
    s = SymbolSpec.of({j: float(j) + 100.0 for j in range(-12, 5)})
    head, tail = toeplitz_tail_split(s, 5, 3)
    assert head.shape == (5, 2) and tail.shape == (5, 3)
    assert tail[0, 0] == 94.0
    full = alpha_toeplitz(s, 5, 3).matrix
    np.testing.assert_array_equal(np.hstack([head, tail]), full)
    head1, tail1 = toeplitz_tail_split(s, 5, 1)
    assert head1.shape == (5, 5) and tail1.shape == (5, 0)


def test_toeplitz_split_random(rng):
    """Concatenation reproduces T_{12,5} for random coefficients."""
    s = random_symbol(rng, [-55], [11])
    head, tail = toeplitz_tail_split(s, 12, 5)
    np.testing.assert_array_equal(np.hstack([head, tail]), alpha_toeplitz(s, 12, 5).matrix)


@pytest.mark.parametrize("n,alpha,d_tail", [(5, 3, 15), (10, 4, 40), (6, 2, 12)])
def test_tail_embedding_exact(rng, n, alpha, d_tail):
    """The tail block is a selection of T_d times the tail shift, with T_d = J H_d."""
    s = random_symbol(rng, [-alpha * (n - 1)], [n - 1])
    assert tail_embedding(s, n, alpha, d_tail) == 0.0
    assert flip_residual(s, d_tail) == 0.0


def test_tail_embedding_alpha_one_has_empty_tail(laplace):
    """For alpha = 1 the head is all of T_n and the embedding is trivially exact."""
    head, tail = toeplitz_tail_split(laplace, 5, 1)
    assert head.shape == (5, 5)
    assert tail.shape == (5, 0)
    assert tail_embedding(laplace, 5, 1) == 0.0
    assert tail_embedding(laplace, 2, 1) == 0.0


def test_tail_embedding_rejects_small_tail(rng):
    """d_tail must exceed (alpha - 1)(n - 1) + 2."""
    s = random_symbol(rng, [-12], [4])
    with pytest.raises(DomainError):
        tail_embedding(s, 5, 3, 10)


def test_permute_levels_example():
    """Swapping the levels of a (2, 3) Toeplitz relabels its blocks."""
    coeffs = {(i, j): 10 * i + j + 50 for i in range(-1, 2) for j in range(-2, 3)}
    a = alpha_toeplitz(SymbolSpec.of(coeffs), (2, 3), (1, 1))
    b = permute_levels(a, [1, 0])
    assert b.n == MultiIndex.of(3, 2)
    assert b.matrix[1, 0] == coeffs[(1, 0)]
    assert b.matrix[2, 0] == coeffs[(0, 1)]
    assert b.matrix[3, 0] == coeffs[(1, 1)]
    np.testing.assert_array_equal(permute_levels(a, [0, 1]).matrix, a.matrix)
    with pytest.raises(DomainError):
        permute_levels(a, [0, 0])


def test_permute_levels_keeps_singular_values(rng):
    """Level permutation is a unitary similarity."""
    s = random_symbol(rng, [-2, -3], [2, 3])
    a = alpha_toeplitz(s, (3, 4), (1, 1))
    b = permute_levels(a, [1, 0])
    np.testing.assert_allclose(svd_oracle(a).values, svd_oracle(b).values, atol=1e-10)


def test_matrix_text_codec(rng):
    """The matrix text format stores real and imaginary parts exactly."""
    m = random_complex(rng, (3, 2))
    back = loads_matrix(dumps_matrix(m))
    np.testing.assert_array_equal(back, m)
    assert dumps_matrix(np.eye(1, dtype=complex)).splitlines()[0] == "1 1"
    with pytest.raises(ConfigurationError):
        loads_matrix("2 2\n1 0")
