"""Exact second-order stabilizer Renyi entropy via XOR correlations and FWHT.

For a state psi on n qubits (d = 2**n) and a shift k, the array

    G_k[x] = conj(psi[x ^ k]) * psi[x]

has Walsh-Hadamard transform ``fwht(G_k)[u] = <psi| X^k Z^u |psi>`` up to a
sign, so every Pauli expectation appears exactly once across the d
transforms.  Summing ``|.|**4`` over all of them gives the fourth moment
``r = sum_P |<P>|**4`` and

    M2 = -log2(r / d)

in O(n 4**n) time and O(d) memory per worker.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numba
import numpy as np

from ._validation import RENORM_TOL, check_state, check_states
from .errors import ConsistencyError, ResourceError
from .fwht import _fwht_kernel, _gather_kernel

XOR_FWHT = "xor_fwht"
BRUTE_FORCE = "brute_force"

#: Fraction of available memory a computation may claim.
MEMORY_FRACTION = 0.75

# Slack on the analytic bound r >= 1 before declaring an internal error.
_FOURTH_MOMENT_SLACK = 1e-9


@dataclass(frozen=True)
class SreResult:
    """Outcome of one M2 evaluation.

    ``fourth_moment_sum`` is the raw ``sum_P |<P>|^4`` (not divided by d);
    ``second_moment_sum`` is ``sum_P |<P>|^2``, which equals d for a pure
    normalized state and is kept as a diagnostic.
    """

    m2: float
    fourth_moment_sum: float
    second_moment_sum: float
    n_qubits: int
    method: str
    wall_seconds: float
    workers: int

    def to_dict(self):
        return asdict(self)


def default_workers():
    """Worker count from ``XORSRE_WORKERS`` if set, else the CPU count."""
    env = os.environ.get("XORSRE_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def required_bytes(n_qubits, workers=1):
    """Bytes for the input, its normalized copy and one scratch buffer per worker."""
    return (2 + workers) * (2**n_qubits) * 16


def check_memory(n_qubits, workers=1, fraction=MEMORY_FRACTION):
    """Raise :class:`ResourceError` if the run would exceed ``fraction`` of free memory."""
    import psutil

    need = required_bytes(n_qubits, workers)
    avail = psutil.virtual_memory().available
    if need > fraction * avail:
        raise ResourceError(
            f"N={n_qubits} needs about {need / 2**30:.2f} GiB "
            f"(2^N*16 bytes per buffer, {2 + workers} buffers); "
            f"only {fraction:.0%} of {avail / 2**30:.2f} GiB available may be used"
        )


@numba.njit(cache=True, nogil=True)
def _shift_moments(psi, k_start, k_stop, out4, out2, scratch):
    # scratch is owned by the calling worker and reused across k.
    d = psi.shape[0]
    for k in range(k_start, k_stop):
        _gather_kernel(psi, k, scratch)
        _fwht_kernel(scratch)
        s4 = 0.0
        s2 = 0.0
        for u in range(d):
            p = scratch[u].real * scratch[u].real + scratch[u].imag * scratch[u].imag
            s2 += p
            s4 += p * p
        out4[k] = s4
        out2[k] = s2


def shift_moments(psi, workers=1):
    """Per-shift partial sums ``(sum_u |Ghat_k[u]|^4, sum_u |Ghat_k[u]|^2)``.

    Returns two length-d arrays indexed by k.  Each entry is computed by a
    single sequential loop, so the arrays are identical for any ``workers``.
    """
    d = psi.shape[0]
    out4 = np.empty(d, dtype=np.float64)
    out2 = np.empty(d, dtype=np.float64)
    workers = max(1, min(int(workers), d))
    if workers == 1:
        _shift_moments(psi, 0, d, out4, out2, np.empty(d, dtype=np.complex128))
        return out4, out2

    bounds = np.linspace(0, d, workers + 1).astype(np.int64)

    def run(w):
        scratch = np.empty(d, dtype=np.complex128)
        _shift_moments(psi, bounds[w], bounds[w + 1], out4, out2, scratch)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run, range(workers)))
    return out4, out2


def m2_from_fourth_moment(r, d):
    """``-log2(r/d)`` after checking ``r >= 1`` (the identity string alone gives 1)."""
    if not r >= 1.0 - _FOURTH_MOMENT_SLACK:
        raise ConsistencyError(f"fourth-moment sum {r!r} is below its lower bound 1")
    return -math.log2(r / d)


def sre2_exact(psi, workers=1, *, renorm_tol=RENORM_TOL, memory_check=True):
    """Second stabilizer Renyi entropy M2 (in bits) of a pure state.

    Parameters
    ----------
    psi : array_like of complex, shape (2**n,)
        Amplitudes in the computational basis, qubit 0 on the least
        significant bit.  Norm deviations up to ``renorm_tol`` are corrected.
    workers : int
        Threads sharing the loop over shifts.  The result is bit-for-bit
        independent of this value.

    Returns
    -------
    SreResult
    """
    t0 = time.perf_counter()
    psi = check_state(psi, renorm_tol)
    d = psi.shape[0]
    n = d.bit_length() - 1
    workers = max(1, int(workers))
    if memory_check:
        check_memory(n, workers)
    out4, out2 = shift_moments(psi, workers)
    # np.add.reduce on a contiguous float64 array is a fixed pairwise tree
    r = float(np.sum(out4))
    s2 = float(np.sum(out2))
    m2 = m2_from_fourth_moment(r, d)
    return SreResult(
        m2=m2,
        fourth_moment_sum=r,
        second_moment_sum=s2,
        n_qubits=n,
        method=XOR_FWHT,
        wall_seconds=time.perf_counter() - t0,
        workers=workers,
    )


def pauli_fourth_moment(psi, workers=1, *, renorm_tol=RENORM_TOL):
    """``sum_P |<psi|P|psi>|^4`` over all 4**n Pauli strings (not divided by d)."""
    return sre2_exact(psi, workers, renorm_tol=renorm_tol).fourth_moment_sum


def sre2_batch(states, workers=1, *, renorm_tol=RENORM_TOL):
    """Apply :func:`sre2_exact` to each state, preserving order.

    All states must have the same number of qubits.
    """
    states = check_states(states, renorm_tol)
    return [sre2_exact(s, workers, renorm_tol=renorm_tol) for s in states]


def haar_mean_m2(n_qubits):
    """Closed-form Haar-ensemble value ``log2(2**n + 3) - 2``."""
    return math.log2(2**n_qubits + 3) - 2
