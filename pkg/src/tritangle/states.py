"""Pure (2 x 2 x n) tripartite states and the bookkeeping around them.

A state |psi> = sum_{ijk} a_ijk |i>_A |j>_B |k>_C (qubits A, B, an n-level
subsystem C) is stored as a flat complex vector of length 4n indexed by
(2i + j) * n + k: the C index runs fastest inside each (i, j) block, so
``amp.reshape(4, n)`` has the unnormalized two-qubit slices |phi_k> as its
columns.  All objects here are immutable and every function is pure;
randomized constructors take explicit seeds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, InvalidBasis, InvalidState
from .linalg import haar_unitary

__all__ = [
    "PureState",
    "DensityMatrix",
    "BipartiteSlice",
    "CBasis",
    "amp_index",
    "make_state",
    "canonical_state",
    "random_pure",
    "slice_phi",
    "reduced_ab",
    "apply_c_basis",
    "two_copy",
    "identity_basis",
    "random_c_basis",
    "state_to_json",
    "state_from_json",
    "save_state",
    "load_state",
]

_NORM_TOL = 1e-12
_RENORM_WARN = 1e-9


def amp_index(i: int, j: int, k: int, n: int) -> int:
    """Flat index of amplitude a_ijk in the fixed storage order."""
    return (2 * i + j) * n + k


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized pure state of a (2 x 2 x n) system.

    Attributes:
        n: dimension of subsystem C (>= 1).
        amp: complex amplitudes, length 4n, index (2i + j) * n + k.
        renormalized: True when construction rescaled the input by more than
            1e-9 relative (kept as a data-quality warning, not an error).
    """

    n: int
    amp: np.ndarray
    renormalized: bool = False

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DimensionError(f"subsystem C needs integer dimension >= 1, got {self.n!r}")
        amp = np.ascontiguousarray(self.amp, dtype=complex)
        if amp.shape != (4 * self.n,):
            raise DimensionError(f"amplitude vector must have length {4 * self.n}, got {amp.shape}")
        if not np.all(np.isfinite(amp)):
            raise InvalidState("amplitudes must be finite")
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > _NORM_TOL:
            raise InvalidState(f"state must be normalized, got norm {nrm!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)
        object.__setattr__(self, "n", int(self.n))

    def phi_matrix(self) -> np.ndarray:
        """4 x n matrix whose column k is the unnormalized slice |phi_k>."""
        return self.amp.reshape(4, self.n)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace complex matrix."""

    dim: int
    m: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.m, dtype=complex)
        if a.shape != (self.dim, self.dim):
            raise DimensionError(f"expected a {self.dim} x {self.dim} matrix, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidState("density matrix must be finite")
        if np.abs(a - a.conj().T).max() > 1e-12:
            raise InvalidState("density matrix must be Hermitian within 1e-12")
        if abs(np.trace(a).real - 1.0) > 1e-12 or abs(np.trace(a).imag) > 1e-12:
            raise InvalidState(f"density matrix must have unit trace, got {np.trace(a)!r}")
        if np.linalg.eigvalsh(0.5 * (a + a.conj().T)).min() < -1e-10:
            raise InvalidState("density matrix has an eigenvalue below -1e-10")
        a.setflags(write=False)
        object.__setattr__(self, "m", a)


@dataclass(frozen=True, eq=False)
class BipartiteSlice:
    """Unnormalized two-qubit slice, computational order |00>,|01>,|10>,|11>."""

    v: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.v, dtype=complex)
        if v.shape != (4,):
            raise DimensionError(f"slice must have length 4, got {v.shape}")
        if np.linalg.norm(v) > 1.0 + 1e-12:
            raise InvalidState("slice norm exceeds 1")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True, eq=False)
class CBasis:
    """Unitary n x n matrix acting on the C index.

    The defining contract is the transformation law of the slice overlap
    matrix, M -> q^T M q; the measurement kets realized by the two-copy
    protocol are the columns of conj(q).
    """

    q: np.ndarray

    def __post_init__(self):
        q = np.ascontiguousarray(self.q, dtype=complex)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise InvalidBasis(f"basis must be square, got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise InvalidBasis("basis must be finite")
        if np.abs(q @ q.conj().T - np.eye(q.shape[0])).max() > 1e-12:
            raise InvalidBasis("basis is not unitary within 1e-12")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]


def make_state(amplitudes, n: int) -> PureState:
    """Build a normalized PureState from raw amplitudes.

    The vector is divided by its norm; when that rescaling exceeds 1e-9
    relative, the result carries ``renormalized=True``.  A zero vector is
    rejected, as is any length other than 4n.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DimensionError(f"subsystem C needs integer dimension >= 1, got {n!r}")
    amp = np.asarray(amplitudes, dtype=complex).ravel()
    if amp.shape != (4 * n,):
        raise DimensionError(f"expected {4 * n} amplitudes for n={n}, got {amp.size}")
    if not np.all(np.isfinite(amp)):
        raise InvalidState("amplitudes must be finite")
    nrm = np.linalg.norm(amp)
    if nrm == 0.0:
        raise InvalidState("cannot normalize the zero vector")
    return PureState(n=int(n), amp=amp / nrm, renormalized=bool(abs(nrm - 1.0) > _RENORM_WARN))


def canonical_state(name: str, theta: float | None = None) -> PureState:
    """Named three-qubit fixtures, all with n = 2.

    ghz     (|000> + |111>) / sqrt(2)
    w       (|001> + |010> + |100>) / sqrt(3)
    product |000>
    gghz    cos(theta)|000> + sin(theta)|111>, theta in [0, pi/2]
    """
    key = name.strip().lower()
    amp = np.zeros(8, dtype=complex)
    if key == "ghz":
        amp[amp_index(0, 0, 0, 2)] = amp[amp_index(1, 1, 1, 2)] = 1.0 / math.sqrt(2)
    elif key == "w":
        for i, j, k in ((0, 0, 1), (0, 1, 0), (1, 0, 0)):
            amp[amp_index(i, j, k, 2)] = 1.0 / math.sqrt(3)
    elif key == "product":
        amp[0] = 1.0
    elif key in ("gghz", "generalized_ghz"):
        if theta is None:
            raise DomainError("generalized GHZ needs an angle theta")
        if not 0.0 <= theta <= math.pi / 2:
            raise DomainError(f"theta must lie in [0, pi/2], got {theta!r}")
        amp[amp_index(0, 0, 0, 2)] = math.cos(theta)
        amp[amp_index(1, 1, 1, 2)] = math.sin(theta)
    else:
        raise InvalidState(f"unknown canonical state {name!r}")
    return PureState(n=2, amp=amp)


def random_pure(n: int, seed: int) -> PureState:
    """Haar-random pure state: 4n seeded standard complex Gaussians, normalized.

    Deterministic for fixed (n, seed).
    """
    if n < 1:
        raise DimensionError(f"subsystem C needs dimension >= 1, got {n}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(4 * n) + 1j * rng.standard_normal(4 * n)
    return PureState(n=n, amp=z / np.linalg.norm(z))


def slice_phi(state: PureState, k: int) -> BipartiteSlice:
    """Unnormalized two-qubit slice |phi_k>, i.e. column k of the 4 x n layout."""
    if not 0 <= k < state.n:
        raise DimensionError(f"slice index {k} out of range for n={state.n}")
    return BipartiteSlice(v=state.phi_matrix()[:, k].copy())


def reduced_ab(state: PureState) -> DensityMatrix:
    """Two-qubit reduced state of A,B: the sum of slice outer products."""
    psi = state.phi_matrix()
    rho = psi @ psi.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(dim=4, m=rho)


def apply_c_basis(state: PureState, basis: CBasis) -> PureState:
    """Rotate the C index: new slices Psi' = Psi @ q.

    The index convention is pinned by the transformation law of the slice
    overlap matrix, M -> q^T M q (exact up to float roundoff).
    """
    if basis.n != state.n:
        raise DimensionError(f"basis dimension {basis.n} does not match n={state.n}")
    amp = (state.phi_matrix() @ basis.q).reshape(-1)
    return PureState(n=state.n, amp=amp / np.linalg.norm(amp))


def two_copy(s1: PureState, s2: PureState) -> PureState:
    """Tensor product in subsystem order (A1, B1, C1, A2, B2, C2).

    The result is a valid (2 x 2 x 4n^2) state with A = A1, B = B1 and the
    composite C index (C1, A2, B2, C2).
    """
    if s1.n != s2.n:
        raise DimensionError(f"cannot combine copies with n={s1.n} and n={s2.n}")
    amp = np.kron(s1.amp, s2.amp)
    return PureState(n=4 * s1.n * s1.n, amp=amp / np.linalg.norm(amp))


def identity_basis(n: int) -> CBasis:
    return CBasis(q=np.eye(n, dtype=complex))


def random_c_basis(n: int, seed: int) -> CBasis:
    """Haar-random unitary basis change on C, deterministic for fixed seed."""
    return CBasis(q=haar_unitary(n, np.random.default_rng(seed)))


def state_to_json(state: PureState) -> str:
    """Serialize to the state-file schema: {"n": ..., "amplitudes": [[re, im], ...]}."""
    data = {
        "n": state.n,
        "amplitudes": [[float(z.real), float(z.imag)] for z in state.amp],
    }
    return json.dumps(data)


def state_from_json(text: str) -> PureState:
    """Parse the state-file schema, rejecting wrong lengths and non-finite entries."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidState(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "n" not in data or "amplitudes" not in data:
        raise InvalidState('state file must be an object with fields "n" and "amplitudes"')
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidState(f'"n" must be a positive integer, got {n!r}')
    raw = data["amplitudes"]
    if not isinstance(raw, list):
        raise InvalidState('"amplitudes" must be an array of [re, im] pairs')
    if len(raw) != 4 * n:
        raise DimensionError(f"expected {4 * n} amplitudes for n={n}, got {len(raw)}")
    amp = np.empty(4 * n, dtype=complex)
    for pos, entry in enumerate(raw):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise InvalidState(f"amplitude {pos} must be a [re, im] pair of numbers")
        re, im = float(entry[0]), float(entry[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise InvalidState(f"amplitude {pos} is not finite")
        amp[pos] = re + 1j * im
    return make_state(amp, n)


def save_state(state: PureState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(state_to_json(state))
        fh.write("\n")


def load_state(path) -> PureState:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_json(fh.read())
