"""Quench dynamics: spin-chain Hamiltonians, Krylov propagation, brickwork circuits.

Hamiltonians (qubit i is bit i; Z|0> = +|0>):

* ``xxz``:     sum_i J (X_i X_{i+1} + Y_i Y_{i+1}) + delta Z_i Z_{i+1}
* ``tfim_lf``: -J sum_i Z_i Z_{i+1} - hx sum_i X_i - hz sum_i Z_i

Bonds run over i = 0..N-1 with i+1 taken mod N for ``boundary="periodic"``;
``"open"`` drops the (N-1, 0) bond.  Both are applied matrix-free.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import states as st
from .engine import sre2_exact
from .errors import InvalidInputError

XXZ = "xxz"
TFIM_LF = "tfim_lf"
BRICKWORK = "brickwork"
MODELS = (XXZ, TFIM_LF, BRICKWORK)
HAMILTONIAN_MODELS = (XXZ, TFIM_LF)

PERIODIC = "periodic"
OPEN = "open"

INITIAL_STATES = ("neel", "random_product", "all_up", "file")

# Lanczos stops when the next residual norm drops below this.
BREAKDOWN_TOL = 1e-14


@dataclass(frozen=True)
class QuenchSpec:
    """Everything needed to reproduce one ensemble of trajectories.

    Unused parameters are stored as None (``delta`` only for xxz, ``hx``/``hz``
    only for tfim_lf).  For brickwork, ``n_steps`` counts circuit layers and
    ``dt`` is ignored.
    """

    model: str
    n_qubits: int
    J: float = 1.0
    delta: float | None = None
    hx: float | None = None
    hz: float | None = None
    boundary: str = PERIODIC
    dt: float = 0.05
    n_steps: int = 0
    krylov_dim: int = 30
    samples: int = 1
    rng: st.RngSpec = field(default_factory=st.RngSpec)
    initial: str = "neel"
    initial_path: str | None = None
    angles: str = st.UNIFORM

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidInputError(f"unknown model {self.model!r}")
        if self.n_qubits < 1:
            raise InvalidInputError("n_qubits must be >= 1")
        if self.model == XXZ and self.delta is None:
            raise InvalidInputError("xxz needs delta")
        if self.model != XXZ and self.delta is not None:
            raise InvalidInputError("delta is only meaningful for xxz")
        if self.model == TFIM_LF and (self.hx is None or self.hz is None):
            raise InvalidInputError("tfim_lf needs hx and hz")
        if self.model != TFIM_LF and (self.hx is not None or self.hz is not None):
            raise InvalidInputError("hx/hz are only meaningful for tfim_lf")
        if self.model in HAMILTONIAN_MODELS and self.n_qubits < 2:
            raise InvalidInputError("Hamiltonian models need at least 2 qubits")
        if self.model == BRICKWORK and self.n_qubits % 2:
            raise InvalidInputError("brickwork circuit requires an even number of qubits")
        if self.boundary not in (PERIODIC, OPEN):
            raise InvalidInputError(f"unknown boundary {self.boundary!r}")
        if not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        if self.n_steps < 0 or self.samples < 1:
            raise InvalidInputError("need n_steps >= 0 and samples >= 1")
        if self.krylov_dim < 2:
            raise InvalidInputError("krylov_dim must be >= 2")
        if self.initial not in INITIAL_STATES:
            raise InvalidInputError(f"unknown initial state {self.initial!r}")
        if self.initial == "file" and not self.initial_path:
            raise InvalidInputError("initial='file' needs initial_path")

    @classmethod
    def xxz(cls, n_qubits, J=1.0, delta=0.5, **kw):
        return cls(XXZ, n_qubits, J=J, delta=delta, **kw)

    @classmethod
    def tfim_lf(cls, n_qubits, J=1.0, hx=1.5, hz=1.5, **kw):
        kw.setdefault("initial", "random_product")
        return cls(TFIM_LF, n_qubits, J=J, hx=hx, hz=hz, **kw)

    @classmethod
    def brickwork(cls, n_qubits, **kw):
        kw.setdefault("initial", "all_up")
        kw.setdefault("boundary", OPEN)
        return cls(BRICKWORK, n_qubits, **kw)

    def to_dict(self):
        out = asdict(self)
        out["rng"] = self.rng.to_dict()
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["rng"] = st.RngSpec(**data.get("rng", {}))
        return cls(**data)


@dataclass
class SreTrace:
    """M2 time series averaged over an ensemble of trajectories."""

    times: np.ndarray
    m2_mean: np.ndarray
    m2_stderr: np.ndarray
    samples: np.ndarray  # shape (n_samples, n_times)
    spec: QuenchSpec
    max_norm_drift: float = 0.0
    renormalizations: int = 0

    def to_dict(self, include_samples=True):
        out = {
            "schema": "xorsre-trace",
            "version": 1,
            "spec": self.spec.to_dict(),
            "times": self.times.tolist(),
            "m2_mean": self.m2_mean.tolist(),
            "m2_stderr": [None if math.isnan(v) else v for v in self.m2_stderr.tolist()],
            "max_norm_drift": self.max_norm_drift,
            "renormalizations": self.renormalizations,
        }
        if include_samples:
            out["samples"] = self.samples.tolist()
        return out


def bonds(n_qubits, boundary=PERIODIC):
    """Nearest-neighbour pairs ``(i, i+1)``, wrapping for periodic chains."""
    pairs = [(i, i + 1) for i in range(n_qubits - 1)]
    if boundary == PERIODIC:
        pairs.append((n_qubits - 1, 0))
    return pairs


@functools.lru_cache(maxsize=16)
def _local_terms(model, n, J, delta, hx, hz, boundary):
    """Return ``(diag, [(flip_mask, weights)])`` with H psi = diag*psi + sum w*psi[idx^mask]."""
    idx = np.arange(2**n, dtype=np.int64)
    bits = [((idx >> q) & 1).astype(np.int8) for q in range(n)]
    zval = [1.0 - 2.0 * b for b in bits]
    diag = np.zeros(2**n)
    offdiag = []
    for i, j in bonds(n, boundary):
        zz = zval[i] * zval[j]
        if model == XXZ:
            diag += delta * zz
            # XX + YY maps |..01..> <-> |..10..> with weight 2J, kills aligned pairs
            offdiag.append(((1 << i) | (1 << j), 2.0 * J * (bits[i] != bits[j])))
        else:
            diag -= J * zz
    if model == TFIM_LF:
        for q in range(n):
            diag -= hz * zval[q]
            offdiag.append((1 << q, np.full(2**n, -hx)))
    for arr in (diag, *(w for _, w in offdiag)):
        arr.setflags(write=False)
    return diag, offdiag, idx


def _terms_for(spec, n_qubits=None):
    if spec.model not in HAMILTONIAN_MODELS:
        raise InvalidInputError(f"model {spec.model!r} has no Hamiltonian")
    n = spec.n_qubits if n_qubits is None else n_qubits
    return _local_terms(spec.model, n, spec.J, spec.delta, spec.hx, spec.hz, spec.boundary)


def apply_hamiltonian(psi, spec):
    """``H|psi>`` without building a matrix; O(N d) work."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (2**spec.n_qubits,):
        raise InvalidInputError(f"state length {psi.shape} does not match N={spec.n_qubits}")
    diag, offdiag, idx = _terms_for(spec)
    out = diag * psi
    for mask, w in offdiag:
        out += w * psi[idx ^ mask]
    return out


_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def embed_operator(ops, n_qubits):
    """Dense ``2^N x 2^N`` operator for ``{qubit: 2x2 matrix}``; qubit 0 is the rightmost kron factor."""
    full = np.ones((1, 1), dtype=np.complex128)
    for q in reversed(range(n_qubits)):
        full = np.kron(full, ops.get(q, _PAULI["I"]))
    return full


def dense_hamiltonian(spec):
    """Explicit matrix of the model Hamiltonian, summed term by term (small N only)."""
    if spec.model not in HAMILTONIAN_MODELS:
        raise InvalidInputError(f"model {spec.model!r} has no Hamiltonian")
    n = spec.n_qubits
    X, Y, Z = _PAULI["X"], _PAULI["Y"], _PAULI["Z"]
    H = np.zeros((2**n, 2**n), dtype=np.complex128)
    for i, j in bonds(n, spec.boundary):
        if spec.model == XXZ:
            H += spec.J * (embed_operator({i: X, j: X}, n) + embed_operator({i: Y, j: Y}, n))
            H += spec.delta * embed_operator({i: Z, j: Z}, n)
        else:
            H -= spec.J * embed_operator({i: Z, j: Z}, n)
    if spec.model == TFIM_LF:
        for q in range(n):
            H -= spec.hx * embed_operator({q: X}, n)
            H -= spec.hz * embed_operator({q: Z}, n)
    return H


def energy(psi, spec):
    """``<psi|H|psi>`` (complex; imaginary part is rounding noise)."""
    return complex(np.vdot(psi, apply_hamiltonian(psi, spec)))


def lanczos(matvec, v0, m):
    """Lanczos with full reorthogonalization.

    Returns ``(V, alpha, beta)`` where the columns of ``V`` (d x k, k <= m)
    are orthonormal and ``alpha``/``beta`` are the diagonal / off-diagonal
    of the projected tridiagonal matrix.  Stops early on breakdown.
    """
    d = v0.shape[0]
    V = np.zeros((d, m), dtype=np.complex128)
    alpha = np.zeros(m)
    beta = np.zeros(max(m - 1, 0))
    V[:, 0] = v0 / np.linalg.norm(v0)
    for j in range(m):
        w = matvec(V[:, j])
        alpha[j] = np.vdot(V[:, j], w).real
        # two passes of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            w -= V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        if j == m - 1:
            break
        b = np.linalg.norm(w)
        if b < BREAKDOWN_TOL:
            return V[:, : j + 1], alpha[: j + 1], beta[:j]
        beta[j] = b
        V[:, j + 1] = w / b
    return V, alpha, beta


def krylov_step(psi, spec, dt=None):
    """Approximate ``exp(-i H dt)|psi>`` in a Krylov space of dimension ``spec.krylov_dim``.

    The output is renormalized to unit norm.
    """
    dt = spec.dt if dt is None else dt
    psi = np.asarray(psi, dtype=np.complex128)
    if dt == 0:
        return psi.copy()
    norm = np.linalg.norm(psi)
    m = min(spec.krylov_dim, psi.shape[0])
    V, alpha, beta = lanczos(lambda v: apply_hamiltonian(v, spec), psi, m)
    if alpha.shape[0] == 1:
        coeffs = np.array([np.exp(-1j * alpha[0] * dt)])
    else:
        evals, evecs = eigh_tridiagonal(alpha, beta)
        # exp(-i T dt) e_1
        coeffs = evecs @ (np.exp(-1j * evals * dt) * evecs[0, :].conj())
    out = V @ coeffs
    return out * (norm / np.linalg.norm(out))


def haar_u4(rng=None):
    """Haar-random 4x4 unitary from the QR decomposition of a complex Ginibre matrix."""
    gen = st._as_rng(rng)
    z = (gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    # fix the phase freedom of QR so the distribution is exactly Haar
    return q * (diag / np.abs(diag))


@functools.lru_cache(maxsize=64)
def _pair_indices(n, i, j):
    idx = np.arange(2**n, dtype=np.int64)
    base = idx[((idx >> i) & 1 == 0) & ((idx >> j) & 1 == 0)]
    # row order (bit_j << 1) | bit_i
    out = np.stack([base, base | (1 << i), base | (1 << j), base | (1 << i) | (1 << j)])
    out.setflags(write=False)
    return out


def apply_two_qubit_gate(psi, U, i, j):
    """Apply the 4x4 ``U`` to qubits ``(i, j)`` of ``psi`` in place.

    The gate's row/column index is ``(bit_j << 1) | bit_i``, so for
    ``(i, j) = (0, 1)`` it is the usual little-endian two-qubit matrix.
    """
    n = psi.shape[0].bit_length() - 1
    if psi.shape[0] != 2**n:
        raise InvalidInputError("state length is not a power of two")
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise InvalidInputError(f"invalid qubit pair ({i}, {j}) for N={n}")
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (4, 4):
        raise InvalidInputError("gate must be 4x4")
    sel = _pair_indices(n, i, j)
    psi[sel] = U @ psi[sel]
    return psi


def brickwork_layers(n_qubits):
    """Even and odd bond lists of one open-boundary brickwork time step."""
    if n_qubits % 2:
        raise InvalidInputError("brickwork circuit requires an even number of qubits")
    even = [(2 * k, 2 * k + 1) for k in range(n_qubits // 2)]
    odd = [(2 * k + 1, 2 * k + 2) for k in range(n_qubits // 2 - 1)]
    return even, odd


def brickwork_step(psi, rng, t_index):
    """One time step (even layer, then odd layer) of fresh Haar gates, in place.

    Gates for step ``t_index`` come from ``rng.generator(t_index)``, so every
    step of every trajectory is reproducible on its own.
    """
    n = psi.shape[0].bit_length() - 1
    even, odd = brickwork_layers(n)
    gen = rng.generator(t_index) if isinstance(rng, st.RngSpec) else rng
    for i, j in even + odd:
        apply_two_qubit_gate(psi, haar_u4(gen), i, j)
    return psi


def initial_state(spec, rng):
    if spec.initial == "neel":
        return st.neel_state(spec.n_qubits)
    if spec.initial == "all_up":
        return st.basis_state(spec.n_qubits, 0)
    if spec.initial == "random_product":
        return st.random_product_state(spec.n_qubits, rng.generator(0), spec.angles)
    psi = st.load_state(spec.initial_path)
    if psi.shape[0] != 2**spec.n_qubits:
        raise InvalidInputError(f"{spec.initial_path} does not hold a {spec.n_qubits}-qubit state")
    return psi


def trajectory(spec, sample, engine=sre2_exact, engine_workers=1):
    """M2 at every recorded time of one trajectory; also returns the largest norm drift."""
    rng = spec.rng.substream(sample)
    psi = np.array(initial_state(spec, rng), dtype=np.complex128)
    values = [_engine_m2(engine, psi, engine_workers)]
    drift = 0.0
    for t in range(1, spec.n_steps + 1):
        if spec.model == BRICKWORK:
            brickwork_step(psi, rng, t)
        else:
            psi = krylov_step(psi, spec)
        drift = max(drift, abs(np.linalg.norm(psi) - 1.0))
        values.append(_engine_m2(engine, psi, engine_workers))
    return np.array(values), drift


def _engine_m2(engine, psi, workers):
    if engine is sre2_exact:
        return engine(psi, workers).m2
    return engine(psi).m2


def run_quench(spec, engine=sre2_exact, workers=1, engine_workers=1):
    """Run ``spec.samples`` trajectories and aggregate M2 across them.

    ``workers`` threads share the trajectories; aggregation is always in
    sample order, so the output does not depend on ``workers``.
    """
    if workers > 1 and spec.samples > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: trajectory(spec, s, engine, engine_workers), range(spec.samples)))
    else:
        results = [trajectory(spec, s, engine, engine_workers) for s in range(spec.samples)]
    samples = np.stack([r[0] for r in results])
    if spec.model == BRICKWORK:
        times = np.arange(spec.n_steps + 1, dtype=np.float64)
    else:
        times = spec.dt * np.arange(spec.n_steps + 1)
    mean = samples.mean(axis=0)
    if spec.samples > 1:
        stderr = samples.std(axis=0, ddof=1) / math.sqrt(spec.samples)
    else:
        stderr = np.full(times.shape, np.nan)
    return SreTrace(
        times=times,
        m2_mean=mean,
        m2_stderr=stderr,
        samples=samples,
        spec=spec,
        max_norm_drift=max(r[1] for r in results),
        # Krylov output is renormalized every step; circuits never are
        renormalizations=0 if spec.model == BRICKWORK else spec.samples * spec.n_steps,
    )
