"""Exact second-order stabilizer Renyi entropy (M2) of state vectors.

Quick use::

    >>> import numpy as np
    >>> from xorsre import sre2_exact, t_state
    >>> round(sre2_exact(t_state()).m2, 7)
    0.4150375
"""

__version__ = "0.1.0"

from .engine import SreResult, haar_mean_m2, pauli_fourth_moment, sre2_batch, sre2_exact
from .errors import ConsistencyError, InvalidInputError, NormalizationError, ResourceError, SREError
from .estimator import StabilizerRenyiEntropy
from .fwht import fwht, fwht_in_place, xor_shift_product
from .oracle import PauliLabel, pauli_expectation, sre2_brute_force
from .states import (
    RngSpec,
    basis_state,
    haar_random_state,
    load_state,
    neel_state,
    random_product_state,
    save_state,
    t_state,
    tensor_product,
)

__all__ = [
    "ConsistencyError",
    "InvalidInputError",
    "NormalizationError",
    "PauliLabel",
    "ResourceError",
    "RngSpec",
    "SREError",
    "SreResult",
    "StabilizerRenyiEntropy",
    "basis_state",
    "fwht",
    "fwht_in_place",
    "haar_mean_m2",
    "haar_random_state",
    "load_state",
    "neel_state",
    "pauli_expectation",
    "pauli_fourth_moment",
    "random_product_state",
    "save_state",
    "sre2_batch",
    "sre2_brute_force",
    "sre2_exact",
    "t_state",
    "tensor_product",
    "xor_shift_product",
]
