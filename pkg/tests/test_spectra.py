import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thspeff.ensembles import EnsembleSpec, SpreadingMatrix, sample
from thspeff.errors import EigenSolverError
from thspeff.linalg import symmetric_eigh, symmetric_eigvalsh
from thspeff.spectra import (chip_counts, eigen_capacity, esd_moment, gram_eigenvalues,
                             logdet_capacity, normalized_rank, summarize)


def dense(columns, Ns=1):
    return SpreadingMatrix.from_dense(np.array(columns, dtype=float).T, Ns)


E1, E2 = [1.0, 0.0], [0.0, 1.0]


def test_shared_chip_spectrum():
    m = dense([E1, E1])
    assert list(gram_eigenvalues(m)) == [0.0, 2.0]
    s = summarize(m)
    assert esd_moment(s, 2) == 2.0
    assert normalized_rank(m) == 0.5
    assert logdet_capacity(m, 1.0) == pytest.approx(0.5 * math.log2(3), abs=1e-14)


def test_orthogonal_ds_pair():
    r = 1 / math.sqrt(2)
    m = dense([[r, r], [r, -r]], Ns=2)
    assert np.allclose(gram_eigenvalues(m), [1.0, 1.0], atol=1e-14)
    s = summarize(m)
    assert all(abs(esd_moment(s, L) - 1.0) < 1e-12 for L in range(1, 6))
    assert normalized_rank(m) == 1.0


def test_distinct_chips_full_rank():
    assert normalized_rank(dense([E1, E2])) == 1.0


@pytest.mark.parametrize("spec", [EnsembleSpec.th(12, 1, 3, 4), EnsembleSpec.ds(9, 1, 4)])
def test_single_user_spectrum(spec):
    m = sample(spec)
    eig = gram_eigenvalues(m)
    assert np.allclose(eig, [0.0] * (spec.N - 1) + [1.0], atol=1e-13)
    assert logdet_capacity(m, 1.0) == pytest.approx(1.0 / spec.N, abs=1e-13)
    assert normalized_rank(m) == pytest.approx(1.0 / spec.N)


def test_orthogonal_columns_rank_is_load():
    S = np.zeros((8, 3))
    S[[0, 3, 6], [0, 1, 2]] = 1.0
    assert normalized_rank(SpreadingMatrix.from_dense(S, 1)) == pytest.approx(3 / 8)


@st.composite
def matrices(draw):
    Ns = draw(st.sampled_from([1, 2, 4]))
    Nh = draw(st.integers(1, 16))
    K = draw(st.integers(1, 40))
    return sample(EnsembleSpec.th(Ns * Nh, K, Ns, draw(st.integers(0, 2**32))))


@settings(max_examples=60, deadline=None)
@given(matrices(), st.floats(1e-3, 1e3))
def test_eigen_and_cholesky_routes_agree(m, gamma):
    eig = gram_eigenvalues(m)
    assert abs(eigen_capacity(eig, gamma, m.N) - logdet_capacity(m, gamma)) < 1e-8
    assert abs(eig.sum() - m.K) < 1e-9
    assert summarize(m).moments[0] == pytest.approx(m.beta, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 60), st.integers(0, 2**32))
def test_one_pulse_eigenvalues_are_chip_counts(N, K, seed):
    m = sample(EnsembleSpec.th(N, K, 1, seed))
    counts = np.sort(chip_counts(m))
    assert np.array_equal(gram_eigenvalues(m), counts.astype(float))
    # The count shortcut agrees with the general dense path.
    dense_eig = np.sort(np.linalg.eigvalsh(m.entries @ m.entries.T))
    assert np.allclose(dense_eig, counts, atol=1e-10)


def test_one_pulse_moments_are_exact_integers_over_N():
    m = sample(EnsembleSpec.th(50, 120, 1, 3))
    counts = chip_counts(m).astype(object)
    s = summarize(m)
    for L in range(1, 9):
        assert s.moments[L - 1] == sum(int(c) ** L for c in counts) / 50


def test_low_snr_slope_of_logdet():
    m = sample(EnsembleSpec.th(40, 30, 2, 8))
    g = 1e-7
    assert logdet_capacity(m, g) / g == pytest.approx(m.beta / math.log(2), rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32))
def test_qlsolver_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A + A.T
    ours = symmetric_eigvalsh(A)
    ref = np.linalg.eigvalsh(A)
    assert np.allclose(ours, ref, atol=1e-10 * max(1.0, np.abs(ref).max()))


def test_eigenvectors_diagonalize():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((12, 12))
    A = A @ A.T
    w, V = symmetric_eigh(A, vectors=True)
    assert np.allclose(V.T @ V, np.eye(12), atol=1e-12)
    assert np.allclose(A @ V, V * w, atol=1e-10)


def test_solver_rejects_bad_input():
    with pytest.raises(ValueError):
        symmetric_eigvalsh(np.ones((2, 3)))
    with pytest.raises(EigenSolverError):
        symmetric_eigvalsh(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_logdet_requires_positive_snr():
    with pytest.raises(ValueError):
        logdet_capacity(sample(EnsembleSpec.th(4, 2)), 0.0)


def test_esd_is_a_step_distribution():
    s = summarize(dense([E1, E1]))
    assert s.esd(-0.1) == 0.0
    assert s.esd(0.0) == 0.5
    assert s.esd(2.0) == 1.0
    with pytest.raises(ValueError):
        esd_moment(s, 9)
