"""Unnormalized fast Walsh-Hadamard transform over Z_2^n.

The transform computed here is

    out[k] = sum_x (-1)**popcount(k & x) * in[x]

i.e. sqrt(2**n) times the unitary WHT.  Applying it twice multiplies by
``2**n``.  The butterfly runs stride-doubling (h = 1, 2, 4, ...) with no
bit-reversal step: unlike the complex FFT, the Hadamard matrix is symmetric
under index reversal, so the output is already in natural order.
"""

import numba
import numpy as np

from ._validation import check_finite, n_qubits_for_length
from .errors import InvalidInputError


@numba.njit(cache=True, nogil=True)
def _fwht_kernel(a):
    n = a.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                x = a[j]
                y = a[j + h]
                a[j] = x + y
                a[j + h] = x - y
        h *= 2


@numba.njit(cache=True, nogil=True)
def _gather_kernel(psi, k, out):
    for x in range(psi.shape[0]):
        out[x] = np.conj(psi[x ^ k]) * psi[x]


def _check_buffer(buf):
    if not isinstance(buf, np.ndarray) or buf.ndim != 1:
        raise InvalidInputError("buffer must be a 1-D numpy array")
    if buf.dtype != np.complex128:
        raise InvalidInputError(f"buffer must be complex128, got {buf.dtype}")
    if not buf.flags.c_contiguous or not buf.flags.writeable:
        raise InvalidInputError("buffer must be contiguous and writeable")
    n_qubits_for_length(buf.shape[0])


def fwht_in_place(buf):
    """Overwrite ``buf`` with its unnormalized Walsh-Hadamard transform.

    ``buf`` must be a writeable, contiguous complex128 array whose length is a
    power of two.  Returns ``buf`` for chaining.
    """
    _check_buffer(buf)
    check_finite(buf, "buffer")
    _fwht_kernel(buf)
    return buf


def fwht(values):
    """Out-of-place convenience wrapper around :func:`fwht_in_place`."""
    buf = np.array(values, dtype=np.complex128, copy=True).reshape(-1)
    return fwht_in_place(buf)


def xor_shift_product(psi, k, out=None):
    """Fill ``out[x] = conj(psi[x ^ k]) * psi[x]`` and return ``out``.

    ``psi`` is read only.  A new buffer is allocated when ``out`` is None.
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    if psi.ndim != 1:
        raise InvalidInputError("psi must be 1-D")
    d = psi.shape[0]
    n_qubits_for_length(d)
    if out is None:
        out = np.empty(d, dtype=np.complex128)
    else:
        _check_buffer(out)
        if out.shape[0] != d:
            raise InvalidInputError(
                f"length mismatch: psi has {d} entries, out has {out.shape[0]}"
            )
    k = int(k)
    if not 0 <= k < d:
        raise InvalidInputError(f"shift index {k} outside [0, {d})")
    _gather_kernel(psi, k, out)
    return out
