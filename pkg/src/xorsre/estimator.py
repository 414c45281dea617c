"""scikit-learn compatible front end.

Rows of ``X`` are state vectors (complex, length 2**n).  The transformer is
stateless apart from remembering the input width, so it can sit at the end
of a ``Pipeline`` that produces states.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import RENORM_TOL, check_state, n_qubits_for_length
from .engine import BRUTE_FORCE, XOR_FWHT, sre2_exact
from .errors import InvalidInputError
from .oracle import MAX_ORACLE_QUBITS, sre2_brute_force


def _check_X(X):
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InvalidInputError(f"expected a 2-D array of states, got shape {X.shape}")
    n_qubits_for_length(X.shape[1])
    return np.ascontiguousarray(X, dtype=np.complex128)


class StabilizerRenyiEntropy(TransformerMixin, BaseEstimator):
    """Map each state vector to its second stabilizer Renyi entropy M2.

    Parameters
    ----------
    method : {"xor_fwht", "brute_force"}
        ``xor_fwht`` is the O(n 4^n) algorithm; ``brute_force`` enumerates
        all Pauli strings and is meant for cross-checks only.
    workers : int
        Threads per state for ``xor_fwht``.
    renorm_tol : float
        Largest norm deviation silently corrected.
    max_oracle_qubits : int
        Enumeration guard for ``brute_force``.

    Attributes
    ----------
    n_qubits_ : int
    n_features_in_ : int
    """

    def __init__(self, method=XOR_FWHT, workers=1, renorm_tol=RENORM_TOL, max_oracle_qubits=MAX_ORACLE_QUBITS):
        self.method = method
        self.workers = workers
        self.renorm_tol = renorm_tol
        self.max_oracle_qubits = max_oracle_qubits

    def fit(self, X, y=None):
        if self.method not in (XOR_FWHT, BRUTE_FORCE):
            raise InvalidInputError(f"unknown method {self.method!r}")
        X = _check_X(X)
        self.n_features_in_ = X.shape[1]
        self.n_qubits_ = n_qubits_for_length(X.shape[1])
        return self

    def _one(self, psi):
        psi = check_state(psi, self.renorm_tol)
        if self.method == BRUTE_FORCE:
            return sre2_brute_force(psi, max_qubits=self.max_oracle_qubits, renorm_tol=self.renorm_tol)
        return sre2_exact(psi, self.workers, renorm_tol=self.renorm_tol)

    def results(self, X):
        """Full :class:`~xorsre.engine.SreResult` for every row of ``X``."""
        check_is_fitted(self, "n_qubits_")
        X = _check_X(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(
                f"X has {X.shape[1]} amplitudes per state, fitted with {self.n_features_in_}"
            )
        return [self._one(row) for row in X]

    def transform(self, X):
        """Return an ``(n_samples, 1)`` array of M2 values in bits."""
        return np.array([[r.m2] for r in self.results(X)], dtype=np.float64)

    def get_feature_names_out(self, input_features=None):
        return np.array(["m2"], dtype=object)
