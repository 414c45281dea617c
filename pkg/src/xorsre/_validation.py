"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .errors import InvalidInputError, NormalizationError

#: Norm deviations up to this size are silently renormalized.
RENORM_TOL = 1e-6


def n_qubits_for_length(d):
    """Return ``n`` such that ``d == 2**n``; raise if ``d`` is not a power of two."""
    d = int(d)
    if d < 1 or d & (d - 1):
        raise InvalidInputError(f"length {d} is not a power of two")
    return d.bit_length() - 1


def check_finite(a, name="array"):
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains NaN or Inf")


def check_state(psi, renorm_tol=RENORM_TOL, min_qubits=1):
    """Validate a state vector and return it as a contiguous complex128 array.

    Norms within ``renorm_tol`` of 1 are rescaled to unit norm (on a copy);
    anything further away raises :class:`NormalizationError`.
    The input array is never modified.
    """
    arr = np.asarray(psi)
    if arr.ndim != 1:
        raise InvalidInputError(f"state must be 1-D, got shape {arr.shape}")
    n = n_qubits_for_length(arr.shape[0])
    if n < min_qubits:
        raise InvalidInputError(f"state needs at least {min_qubits} qubit(s), got {n}")
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    check_finite(arr, "state")
    norm = float(np.sqrt(np.vdot(arr, arr).real))
    if abs(norm - 1.0) > renorm_tol:
        raise NormalizationError(
            f"state norm {norm!r} deviates from 1 by more than {renorm_tol:g}"
        )
    if norm != 1.0:
        arr = arr / norm
    return arr


def check_states(states, renorm_tol=RENORM_TOL):
    """Validate a batch of equally sized states; returns a list of arrays."""
    out = [check_state(s, renorm_tol) for s in states]
    sizes = {s.shape[0] for s in out}
    if len(sizes) > 1:
        raise InvalidInputError(f"states have mixed sizes {sorted(sizes)}")
    return out
