"""Brute-force reference: enumerate all 4**n Pauli strings explicitly.

A Pauli string is labelled by two bitmasks, ``P = X^x_mask Z^z_mask``.  The
factor i from Y = iXZ is dropped: only ``|<P>|`` enters M2, so
:func:`pauli_expectation` is *not* a phase-faithful <Y>.

Cost is O(8**n); this module exists to check :mod:`xorsre.engine`.
"""

from __future__ import annotations

import time
from typing import NamedTuple

import numpy as np

from ._validation import RENORM_TOL, check_state
from .engine import BRUTE_FORCE, SreResult, m2_from_fourth_moment
from .errors import InvalidInputError, ResourceError

#: Largest qubit count enumerated without an explicit override.
MAX_ORACLE_QUBITS = 10


class PauliLabel(NamedTuple):
    x_mask: int
    z_mask: int


def _parity(values):
    values = np.asarray(values, dtype=np.uint64)
    return np.bitwise_count(values) & np.uint8(1)


def pauli_expectation(psi, p, *, renorm_tol=RENORM_TOL):
    """``sum_t (-1)^{z.t} conj(psi[t ^ x]) psi[t]`` for the label ``p = (x, z)``."""
    psi = check_state(psi, renorm_tol)
    d = psi.shape[0]
    x_mask, z_mask = (int(m) for m in p)
    if not (0 <= x_mask < d and 0 <= z_mask < d):
        raise InvalidInputError(f"Pauli masks {p!r} out of range for d={d}")
    t = np.arange(d, dtype=np.int64)
    sign = 1.0 - 2.0 * _parity(t & z_mask)
    return complex(np.sum(sign * np.conj(psi[t ^ x_mask]) * psi))


def sign_matrix(n_qubits):
    """Dense ``S[z, t] = (-1)^{popcount(z & t)}``, built entry by entry."""
    d = 2**n_qubits
    t = np.arange(d, dtype=np.int64)
    return 1.0 - 2.0 * _parity(t[:, None] & t[None, :])


def all_pauli_expectations(psi, *, renorm_tol=RENORM_TOL):
    """Matrix ``E[x, z] = <psi| X^x Z^z |psi>`` (phase-reduced) for all labels.

    Row x is the dense product of the sign matrix with the vector
    ``conj(psi[t ^ x]) psi[t]``; nothing here uses a fast transform.
    """
    psi = check_state(psi, renorm_tol)
    d = psi.shape[0]
    n = d.bit_length() - 1
    t = np.arange(d, dtype=np.int64)
    # C[x, t] = conj(psi[t ^ x]) psi[t]; outer x, inner z in ascending order
    corr = np.conj(psi[t[:, None] ^ t[None, :]]) * psi[None, :]
    return corr @ sign_matrix(n).T


def sre2_brute_force(psi, *, max_qubits=MAX_ORACLE_QUBITS, renorm_tol=RENORM_TOL):
    """M2 by direct enumeration of every Pauli expectation.

    Refuses states above ``max_qubits`` qubits with :class:`ResourceError`;
    pass a larger ``max_qubits`` (or None) to override.
    """
    t0 = time.perf_counter()
    psi = check_state(psi, renorm_tol)
    d = psi.shape[0]
    n = d.bit_length() - 1
    if max_qubits is not None and n > max_qubits:
        raise ResourceError(
            f"brute-force enumeration of 4^{n} Pauli strings refused "
            f"(guard is N <= {max_qubits}); cost scales as 8^N"
        )
    sq = np.abs(all_pauli_expectations(psi)) ** 2
    r = float(np.sum(sq * sq))
    s2 = float(np.sum(sq))
    return SreResult(
        m2=m2_from_fourth_moment(r, d),
        fourth_moment_sum=r,
        second_moment_sum=s2,
        n_qubits=n,
        method=BRUTE_FORCE,
        wall_seconds=time.perf_counter() - t0,
        workers=1,
    )
