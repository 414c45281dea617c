"""State-vector constructors, sampling and file I/O.

Conventions used everywhere in the package: qubit 0 is the least
significant bit of the basis index, and spin up is ``|0>`` (bit clear),
spin down is ``|1>`` (bit set).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_state, n_qubits_for_length
from .errors import InvalidInputError

MAGIC = b"MAGICFWHT\0".ljust(16, b"\0")
FORMAT_VERSION = 1
_HEADER = struct.Struct("<16sII")

UNIFORM = "uniform"
SPHERE = "sphere"


@dataclass(frozen=True)
class RngSpec:
    """Seed plus substream id; fully determines every random draw."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not 0 <= int(v) < 2**64:
                raise InvalidInputError(f"{name}={v} is not a 64-bit unsigned integer")

    def generator(self, *keys):
        """Independent numpy Generator for ``(seed, stream, *keys)``."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *map(int, keys)))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index):
        """Child spec for ensemble member ``index``, e.g. one trajectory."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), 2**32 + int(index)))
        lo, hi = ss.generate_state(2, np.uint32)
        return RngSpec(self.seed, (int(hi) << 32) | int(lo))

    def to_dict(self):
        return {"seed": int(self.seed), "stream": int(self.stream)}


def _as_rng(rng):
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngSpec(0 if rng is None else int(rng)).generator()


def _check_n(n_qubits):
    n = int(n_qubits)
    if n < 1:
        raise InvalidInputError(f"n_qubits must be >= 1, got {n_qubits}")
    return n


def basis_state(n_qubits, index=0):
    n = _check_n(n_qubits)
    index = int(index)
    if not 0 <= index < 2**n:
        raise InvalidInputError(f"basis index {index} out of range for {n} qubits")
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[index] = 1.0
    return psi


def neel_state(n_qubits):
    """Alternating up/down basis state starting with qubit 0 up.

    Odd-numbered qubits are down, so the index is ``0b...1010``.
    """
    n = _check_n(n_qubits)
    index = sum(1 << q for q in range(1, n, 2))
    return basis_state(n, index)


def haar_random_state(n_qubits, rng=None):
    """Normalized i.i.d. complex Gaussian vector (Haar-distributed pure state)."""
    n = _check_n(n_qubits)
    gen = _as_rng(rng)
    z = gen.standard_normal(2**n) + 1j * gen.standard_normal(2**n)
    return z / np.linalg.norm(z)


def single_qubit_state(theta, phi):
    """``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=np.complex128)


def product_state(factors):
    """Tensor product of single-qubit (or larger) factors; factor 0 holds the low bits."""
    factors = list(factors)
    if not factors:
        raise InvalidInputError("product_state needs at least one factor")
    psi = np.asarray(factors[0], dtype=np.complex128)
    for f in factors[1:]:
        psi = tensor_product(psi, f)
    return psi


def random_product_state(n_qubits, rng=None, angles=UNIFORM):
    """Product of random single-qubit states.

    ``angles="uniform"`` draws theta uniformly on [0, pi] and phi uniformly on
    [0, 2 pi).  ``angles="sphere"`` draws cos(theta) uniformly instead, i.e.
    uniform on the Bloch sphere.
    """
    n = _check_n(n_qubits)
    gen = _as_rng(rng)
    if angles == UNIFORM:
        theta = gen.uniform(0.0, np.pi, n)
    elif angles == SPHERE:
        theta = np.arccos(gen.uniform(-1.0, 1.0, n))
    else:
        raise InvalidInputError(f"unknown angle distribution {angles!r}")
    phi = gen.uniform(0.0, 2 * np.pi, n)
    return product_state(single_qubit_state(t, p) for t, p in zip(theta, phi))


def t_state():
    """``(|0> + e^{i pi/4}|1>)/sqrt(2)``; M2 = log2(4/3)."""
    return single_qubit_state(np.pi / 2, np.pi / 4)


def tensor_product(a, b):
    """``a (x) b`` with ``a``'s qubits on the low bits of the result."""
    a = np.asarray(a, dtype=np.complex128).reshape(-1)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    n_qubits_for_length(a.shape[0])
    n_qubits_for_length(b.shape[0])
    # index = ib * len(a) + ia
    return np.kron(b, a)


def save_state(psi, path):
    """Write ``psi`` to ``path``.

    ``*.jsonl`` files get the text format (header line, then one
    ``[re, im]`` line per amplitude); everything else the binary format:
    16-byte magic, u32 version, u32 n_qubits, then interleaved little-endian
    float64 (re, im) pairs.
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128).reshape(-1)
    n = n_qubits_for_length(psi.shape[0])
    path = Path(path)
    if path.suffix == ".jsonl":
        with path.open("w") as fh:
            fh.write(json.dumps({"format": "xorsre-state", "version": FORMAT_VERSION, "n_qubits": n}) + "\n")
            for c in psi:
                fh.write(json.dumps([float(c.real), float(c.imag)]) + "\n")
        return path
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, n))
        fh.write(psi.astype("<c16").tobytes())
    return path


def _load_jsonl(path):
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise InvalidInputError(f"{path}: empty state file")
    try:
        header = json.loads(lines[0])
        n = int(header["n_qubits"])
        amps = np.array([complex(re, im) for re, im in map(json.loads, lines[1:])])
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInputError(f"{path}: malformed JSON-lines state ({exc})") from exc
    if amps.shape[0] != 2**n:
        raise InvalidInputError(f"{path}: expected {2**n} amplitudes, found {amps.shape[0]}")
    return amps


def load_state(path, *, validate=True):
    """Read a state written by :func:`save_state`.

    With ``validate`` the norm is checked (see ``check_state``); the stored
    amplitudes are otherwise returned unchanged.
    """
    path = Path(path)
    if path.suffix == ".jsonl":
        psi = _load_jsonl(path)
    else:
        raw = path.read_bytes()
        if len(raw) < _HEADER.size:
            raise InvalidInputError(f"{path}: truncated header")
        magic, version, n = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise InvalidInputError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise InvalidInputError(f"{path}: unsupported format version {version}")
        body = raw[_HEADER.size:]
        if len(body) != 16 * 2**n:
            raise InvalidInputError(f"{path}: expected {16 * 2**n} payload bytes for N={n}, got {len(body)}")
        psi = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    if validate:
        check_state(psi)
    return psi
