import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from _oracles import m2_dense
from xorsre import (
    ConsistencyError,
    InvalidInputError,
    NormalizationError,
    ResourceError,
    basis_state,
    haar_random_state,
    pauli_fourth_moment,
    sre2_batch,
    sre2_brute_force,
    sre2_exact,
    t_state,
    tensor_product,
)
from xorsre.engine import check_memory, default_workers, m2_from_fourth_moment, required_bytes

LOG43 = math.log2(4 / 3)


def random_state(n, seed):
    return haar_random_state(n, seed)


# values frozen from the dense-matrix oracle in _oracles.m2_dense
def test_t_state_against_dense_oracle():
    m2, r = m2_dense(t_state())
    assert r == pytest.approx(1.5, abs=1e-14)
    assert m2 == pytest.approx(LOG43, abs=1e-14)
    res = sre2_exact(t_state())
    assert res.m2 == pytest.approx(0.4150374992788438, abs=1e-12)
    assert res.fourth_moment_sum == pytest.approx(1.5, abs=1e-14)
    assert res.method == "xor_fwht"


@pytest.mark.parametrize("n", range(1, 7))
def test_all_zero_state_is_stabilizer(n):
    res = sre2_exact(basis_state(n, 0))
    assert res.m2 == 0.0
    assert res.fourth_moment_sum == 2**n
    assert res.second_moment_sum == 2**n


def test_bell_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert abs(sre2_exact(bell).m2) <= 1e-12


def test_fourth_moment_examples():
    assert pauli_fourth_moment(basis_state(1, 0)) == 2.0
    assert pauli_fourth_moment(t_state()) == pytest.approx(1.5, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_matches_dense_oracle(n):
    psi = random_state(n, 7 * n)
    m2, r = m2_dense(psi)
    res = sre2_exact(psi)
    assert abs(res.m2 - m2) <= 1e-12
    assert res.fourth_moment_sum == pytest.approx(r, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(hst.integers(1, 8), hst.integers(0, 2**63))
def test_matches_brute_force(n, seed):
    psi = random_state(n, seed)
    assert abs(sre2_exact(psi).m2 - sre2_brute_force(psi).m2) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(hst.integers(1, 7), hst.integers(0, 2**63), hst.floats(0, 2 * np.pi))
def test_global_phase_invariance(n, seed, theta):
    psi = random_state(n, seed)
    assert abs(sre2_exact(np.exp(1j * theta) * psi).m2 - sre2_exact(psi).m2) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(hst.integers(1, 7), hst.integers(0, 2**63), hst.data())
def test_pauli_invariance(n, seed, data):
    psi = random_state(n, seed)
    x = data.draw(hst.integers(0, 2**n - 1))
    z = data.draw(hst.integers(0, 2**n - 1))
    t = np.arange(2**n)
    signs = 1.0 - 2.0 * (np.bitwise_count(t & z) % 2)
    moved = (signs * psi)[t ^ x]
    assert abs(sre2_exact(moved).m2 - sre2_exact(psi).m2) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(hst.integers(1, 4), hst.integers(1, 4), hst.integers(0, 2**63))
def test_additivity(na, nb, seed):
    a = random_state(na, seed)
    b = random_state(nb, seed + 1)
    lhs = sre2_exact(tensor_product(a, b)).m2
    assert abs(lhs - sre2_exact(a).m2 - sre2_exact(b).m2) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(hst.integers(1, 9), hst.integers(0, 2**63))
def test_bounds_and_second_moment(n, seed):
    res = sre2_exact(random_state(n, seed))
    assert 0 <= res.m2 <= n
    assert res.fourth_moment_sum >= 1 - 1e-9
    assert abs(res.second_moment_sum - 2**n) <= 1e-6 * 2**n
    assert res.n_qubits == n


@pytest.mark.parametrize("n", [1, 3, 6, 9])
def test_worker_count_bit_identical(n):
    psi = random_state(n, 99)
    ref = sre2_exact(psi, 1)
    for w in (2, 3, 8, 2**n + 5):
        res = sre2_exact(psi, w)
        assert res.m2 == ref.m2
        assert res.fourth_moment_sum == ref.fourth_moment_sum
        assert res.second_moment_sum == ref.second_moment_sum


def test_small_norm_drift_is_renormalized():
    psi = random_state(4, 3)
    res = sre2_exact(psi * (1 + 5e-7))
    assert abs(res.m2 - sre2_exact(psi).m2) <= 1e-12


def test_large_norm_error_rejected():
    with pytest.raises(NormalizationError):
        sre2_exact(random_state(3, 1) * 1.01)
    with pytest.raises(InvalidInputError):
        sre2_exact(np.ones(3) / np.sqrt(3))
    with pytest.raises(InvalidInputError):
        sre2_exact(np.array([1.0]))


def test_input_not_modified():
    psi = random_state(5, 2) * (1 + 1e-7)
    before = psi.copy()
    sre2_exact(psi, 2)
    np.testing.assert_array_equal(psi, before)


def test_memory_guard(monkeypatch):
    assert required_bytes(10, 1) == 3 * 2**10 * 16
    with pytest.raises(ResourceError, match="GiB"):
        check_memory(60)


def test_consistency_guard():
    with pytest.raises(ConsistencyError):
        m2_from_fourth_moment(0.5, 4)


def test_batch():
    assert sre2_batch([]) == []
    out = sre2_batch([basis_state(1, 0), t_state()])
    assert out[0].m2 == 0.0
    assert out[1].m2 == pytest.approx(LOG43, abs=1e-12)
    vals = [r.m2 for r in sre2_batch([random_state(6, s) for s in range(10)])]
    assert len(vals) == 10 and all(0 <= v <= 6 for v in vals)
    with pytest.raises(InvalidInputError):
        sre2_batch([basis_state(1, 0), basis_state(2, 0)])


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("XORSRE_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("XORSRE_WORKERS")
    assert default_workers() >= 1
