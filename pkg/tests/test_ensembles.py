import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thspeff.ensembles import (EnsembleSpec, SpreadingMatrix, derive_seed, from_positions,
                               make_rng, nonzero_positions, sample)


@st.composite
def th_specs(draw):
    Ns = draw(st.integers(1, 6))
    Nh = draw(st.integers(1, 8))
    K = draw(st.integers(1, 20))
    seed = draw(st.integers(0, 2**64 - 1))
    return EnsembleSpec.th(Ns * Nh, K, Ns, seed)


@settings(max_examples=60, deadline=None)
@given(th_specs(), st.integers(0, 1000))
def test_columns_have_unit_norm_and_one_pulse_per_block(spec, index):
    m = sample(spec, index)
    S = m.entries
    norms = np.linalg.norm(S, axis=0)
    assert np.all(np.abs(norms - 1.0) <= 4 * np.finfo(float).eps)
    blocks = S.T.reshape(spec.K, spec.Ns, spec.Nh)
    assert np.all(np.count_nonzero(blocks, axis=2) == 1)
    nz = blocks[blocks != 0]
    assert np.allclose(np.abs(nz), 1 / math.sqrt(spec.Ns), rtol=0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(th_specs(), st.integers(0, 50))
def test_sampling_is_deterministic_and_round_trips(spec, index):
    a, b = sample(spec, index), sample(spec, index)
    assert np.array_equal(a.entries, b.entries)
    back = SpreadingMatrix.from_dense(a.entries, spec.Ns, seed=spec.seed)
    assert np.array_equal(back.slots, a.slots) and np.array_equal(back.signs, a.signs)
    again = from_positions(spec, nonzero_positions(a))
    assert np.array_equal(again.entries, a.entries)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**63))
def test_ds_matches_th_with_one_chip_per_block(N, K, seed):
    ds = sample(EnsembleSpec.ds(N, K, seed), 3, 7)
    th = sample(EnsembleSpec.th(N, K, N, seed), 3, 7)
    assert np.array_equal(ds.entries, th.entries)
    assert np.all(np.abs(ds.entries) == 1 / math.sqrt(N))


def test_different_indices_give_different_matrices():
    spec = EnsembleSpec.th(64, 64, 1, 5)
    assert not np.array_equal(sample(spec, 0).slots, sample(spec, 1).slots)
    assert derive_seed(5, 0, 1) != derive_seed(5, 1, 0)


def test_eight_chip_four_pulse_column():
    m = sample(EnsembleSpec.th(8, 1, 4, 11))
    col = m.entries[:, 0]
    assert np.count_nonzero(col) == 4
    assert np.all(np.abs(col[col != 0]) == 0.5)
    assert [np.count_nonzero(col[2 * b:2 * b + 2]) for b in range(4)] == [1, 1, 1, 1]


def test_single_chip_matrix_is_plus_or_minus_one():
    seen = {float(sample(EnsembleSpec.th(1, 1, 1, 0), i).entries[0, 0]) for i in range(64)}
    assert seen == {1.0, -1.0}


def test_two_by_two_support_has_sixteen_equiprobable_matrices():
    spec = EnsembleSpec.th(2, 2, 1, 123)
    draws = 32000
    counts = {}
    for i in range(draws):
        key = sample(spec, i).entries.tobytes()
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 16
    p = 1 / 16
    sigma = math.sqrt(draws * p * (1 - p))
    assert all(abs(c - draws * p) <= 4 * sigma for c in counts.values())
    for key in counts:
        S = np.frombuffer(key).reshape(2, 2)
        for col in S.T:
            assert sorted(np.abs(col)) == [0.0, 1.0]


def test_sign_and_slot_frequencies():
    spec = EnsembleSpec.th(20, 200, 4, 77)
    slots, signs = [], []
    for i in range(150):
        m = sample(spec, i)
        slots.append(m.slots.ravel())
        signs.append(m.signs.ravel())
    slots, signs = np.concatenate(slots), np.concatenate(signs)
    n = slots.size
    assert n >= 10**5
    plus = np.count_nonzero(signs == 1)
    assert abs(plus - n / 2) <= 4 * math.sqrt(n / 4)
    p = 1 / spec.Nh
    for c in np.bincount(slots, minlength=spec.Nh):
        assert abs(c - n * p) <= 4 * math.sqrt(n * p * (1 - p))


@pytest.mark.parametrize("column, Ns, expected", [
    ([0.0, 1.0], 1, [(0, 1, 1)]),
    ([1.0, 0.0], 1, [(0, 0, 1)]),
    (np.array([1, 0, 0, 1, -1, 0, 0, 1]) / 2, 4, [(0, 0, 1), (1, 1, 1), (2, 0, -1), (3, 1, 1)]),
])
def test_nonzero_positions_read_off(column, Ns, expected):
    m = SpreadingMatrix.from_dense(np.array(column, dtype=float)[:, None], Ns)
    assert nonzero_positions(m) == [expected]


def test_from_dense_rejects_bad_structure():
    with pytest.raises(ValueError):
        SpreadingMatrix.from_dense(np.array([[1.0], [1.0]]), 1)
    with pytest.raises(ValueError):
        SpreadingMatrix.from_dense(np.array([[0.5], [0.0]]), 1)


@pytest.mark.parametrize("kwargs", [
    dict(kind="TH", N=6, K=2, Ns=4),
    dict(kind="TH", N=0, K=1),
    dict(kind="XX", N=4, K=1),
    dict(kind="TH", N=4, K=1, seed=-1),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        EnsembleSpec(**kwargs)


def test_rng_streams_are_reproducible():
    a = make_rng(9, 1, 2).integers(0, 2**32, 8)
    b = make_rng(9, 1, 2).integers(0, 2**32, 8)
    assert np.array_equal(a, b)
    seeds = {derive_seed(0, i, j) for i, j in itertools.product(range(30), range(30))}
    assert len(seeds) == 900
