"""Entanglement quantities for (2 x 2 x n) pure states.

The central objects are the n x n complex symmetric slice-overlap matrix
M_ij = phi_i^T (sigma_y x sigma_y) phi_j, the 4 x 4 spin-flip product
R = rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y), and the lambda
spectrum (square roots of the eigenvalues of R, equivalently the singular
values of M).  From the spectrum: the localizable concurrence C_a = sum
lambda_i, the concurrence C = max(0, 2 lambda_1 - C_a), and the genuine
tripartite monotone tau = sqrt(C_a^2 - C^2), plus measurable lower bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, InternalInconsistency
from .linalg import eig_general, herm_sqrt, singular_values
from .states import DensityMatrix, PureState, reduced_ab

__all__ = [
    "SPIN_FLIP_KERNEL",
    "MMatrix",
    "LambdaSpectrum",
    "TangleReport",
    "build_m",
    "r_matrix",
    "lambda_spectrum",
    "localizable_concurrence",
    "concurrence",
    "tau",
    "bound_spectral",
    "tau_branch",
    "sigma_u",
    "bound_sigma_u",
    "bound_qubit_det",
]

# sigma_y x sigma_y in computational order |00>,|01>,|10>,|11>
SPIN_FLIP_KERNEL = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)
SPIN_FLIP_KERNEL.setflags(write=False)

_ROUTES = ("via_M", "via_R", "via_hermitian")
_ROUTE_TOL = 1e-6  # beyond this the routes are declared inconsistent


@dataclass(frozen=True, eq=False)
class MMatrix:
    """n x n complex symmetric slice-overlap matrix; rank is at most 4."""

    n: int
    m: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.m, dtype=complex)
        if a.shape != (self.n, self.n):
            raise DimensionError(f"expected a {self.n} x {self.n} matrix, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("matrix entries must be finite")
        if np.abs(a - a.T).max() > 1e-12:
            raise DomainError("overlap matrix must be symmetric within 1e-12")
        a.setflags(write=False)
        object.__setattr__(self, "m", a)


@dataclass(frozen=True, eq=False)
class LambdaSpectrum:
    """Four nonnegative values, descending, each in [0, 1] (zero-padded)."""

    lam: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.lam, dtype=float)
        if arr.shape != (4,):
            raise DimensionError(f"spectrum must have exactly 4 entries, got {arr.shape}")
        if np.any(np.diff(arr) > 1e-12):
            raise DomainError("spectrum must be descending")
        if arr.min() < -1e-12 or arr.max() > 1.0 + 1e-9 or arr.sum() > 2.0 + 1e-9:
            raise DomainError(f"spectrum out of range: {arr!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "lam", arr)

    @classmethod
    def from_values(cls, values) -> "LambdaSpectrum":
        """Sort descending, clip tiny out-of-range overshoot, pad to 4 entries."""
        v = np.sort(np.asarray(values, dtype=float))[::-1]
        v = np.concatenate([v[:4], np.zeros(max(0, 4 - v.size))])
        v = np.clip(v, 0.0, 1.0)
        return cls(lam=v)


@dataclass(frozen=True, eq=False)
class TangleReport:
    """Full set of entanglement quantities for one pure state."""

    n: int
    c_a: float
    c: float
    tau: float
    three_tangle: float | None
    lam: LambdaSpectrum
    bound_spectral: float
    bound_sigma_u: float
    q_star: float
    bound_qubit_det: float | None
    qubit_det_exact: float | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "c_a": self.c_a,
            "c": self.c,
            "tau": self.tau,
            "three_tangle": self.three_tangle,
            "lambda": [float(x) for x in self.lam.lam],
            "bounds": {
                "spectral": self.bound_spectral,
                "sigma_u": self.bound_sigma_u,
                "sigma_u_q_star": self.q_star,
                "qubit_det": self.bound_qubit_det,
                "qubit_det_exact": self.qubit_det_exact,
            },
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    CSV_HEADER = (
        "n,tau,c_a,c,three_tangle,lambda1,lambda2,lambda3,lambda4,"
        "bound_spectral,bound_sigma_u,q_star,bound_qubit_det,qubit_det_exact"
    )

    def csv_row(self) -> str:
        def fmt(x):
            return "" if x is None else f"{x:.7g}"

        cells = [
            str(self.n),
            fmt(self.tau),
            fmt(self.c_a),
            fmt(self.c),
            fmt(self.three_tangle),
            *[fmt(float(x)) for x in self.lam.lam],
            fmt(self.bound_spectral),
            fmt(self.bound_sigma_u),
            fmt(self.q_star),
            fmt(self.bound_qubit_det),
            fmt(self.qubit_det_exact),
        ]
        return ",".join(cells)


def build_m(state: PureState) -> MMatrix:
    """Slice-overlap matrix M_ij = phi_i^T (sigma_y x sigma_y) phi_j."""
    psi = state.phi_matrix()
    m = psi.T @ SPIN_FLIP_KERNEL @ psi
    m = 0.5 * (m + m.T)  # symmetric up to summation order; make it exact
    return MMatrix(n=state.n, m=m)


def r_matrix(rho: DensityMatrix) -> np.ndarray:
    """Spin-flip product rho K rho* K on the two-qubit reduced state."""
    if rho.dim != 4:
        raise DimensionError(f"spin-flip product needs a 4 x 4 matrix, got dim {rho.dim}")
    k = SPIN_FLIP_KERNEL
    return rho.m @ k @ rho.m.conj() @ k


def _top4(values) -> np.ndarray:
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    return np.concatenate([v[:4], np.zeros(max(0, 4 - v.size))])


def lambda_spectrum(state: PureState, route: str = "via_M") -> LambdaSpectrum:
    """Lambda spectrum by the requested route, cross-checked against the others.

    via_M:          top-4 singular values of the overlap matrix M.
    via_R:          square roots of the eigenvalues of R = rho K rho* K.
    via_hermitian:  eigenvalues of sqrt(sqrt(rho) rho~ sqrt(rho)), the
                    standard Hermitian concurrence construction.

    All three are computed every call; a disagreement beyond 1e-6 raises
    InternalInconsistency (never silently averaged).
    """
    if route not in _ROUTES:
        raise DomainError(f"route must be one of {_ROUTES}, got {route!r}")

    lam_m = _top4(singular_values(build_m(state).m))

    rho = reduced_ab(state)
    r = r_matrix(rho)
    ev = eig_general(r)
    if np.abs(ev.imag).max() > _ROUTE_TOL:
        raise InternalInconsistency(
            f"spin-flip product has eigenvalue imaginary part {np.abs(ev.imag).max():.3e}"
        )
    # A rank-deficient R has at least (4 - rank) eigenvalues that are exactly
    # zero; snap the numerically smallest ones before the square root, which
    # would otherwise amplify eps-level eigensolver noise to the 1e-8 scale.
    sv_r = singular_values(r)
    rank = int((sv_r > sv_r[0] * 1e-12).sum()) if sv_r[0] > 0.0 else 0
    ev = ev.copy()
    ev[np.argsort(np.abs(ev))[: 4 - rank]] = 0.0
    lam_r = _top4(np.sqrt(np.clip(ev.real, 0.0, None)))

    k = SPIN_FLIP_KERNEL
    sq = herm_sqrt(rho.m)
    rho_tilde = k @ rho.m.T @ k
    w = np.linalg.eigvalsh(herm_sqrt(sq @ rho_tilde @ sq))
    # same amplification guard on the PSD route: eigenvalues whose squares sit
    # at relative machine noise are indistinguishable from zero
    if w.max() > 0.0:
        w[w < w.max() * 1e-6] = 0.0
    lam_h = _top4(w)

    by_route = {"via_M": lam_m, "via_R": lam_r, "via_hermitian": lam_h}
    spread = max(
        np.abs(lam_m - lam_r).max(),
        np.abs(lam_m - lam_h).max(),
        np.abs(lam_r - lam_h).max(),
    )
    if spread > _ROUTE_TOL:
        raise InternalInconsistency(f"lambda routes disagree by {spread:.3e}")
    return LambdaSpectrum.from_values(by_route[route])


def localizable_concurrence(lam: LambdaSpectrum) -> float:
    """Maximal average two-qubit concurrence over measurements on C: sum lambda_i."""
    return float(lam.lam.sum())


def concurrence(lam: LambdaSpectrum) -> float:
    """Two-qubit concurrence of the reduced state: max(0, 2 lambda_1 - sum)."""
    return float(max(0.0, 2.0 * lam.lam[0] - lam.lam.sum()))


def bound_spectral(lam: LambdaSpectrum) -> float:
    """Lower bound 2 sqrt(sum lambda_i^2 - lambda_1^2); zero iff rank(M) <= 1."""
    v = lam.lam
    return float(2.0 * math.sqrt(max(0.0, float((v**2).sum() - v[0] ** 2))))


def tau_branch(lam: LambdaSpectrum) -> float:
    """Two-branch closed form of the monotone on a spectrum.

    Equals sum lambda_i when lambda_1 <= lambda_2 + lambda_3 + lambda_4 and
    2 sqrt(lambda_1 (lambda_2 + lambda_3 + lambda_4)) otherwise; identical to
    sqrt(C_a^2 - C^2).
    """
    v = lam.lam
    rest = float(v[1:].sum())
    if v[0] <= rest:
        return float(v.sum())
    return float(2.0 * math.sqrt(v[0] * rest))


def sigma_u(m: MMatrix, q: float) -> float:
    """Holder-type upper bound on the largest singular value of M.

    sigma_U(q) = sqrt(max_k sum_j |M_jk|^(2q)) * sqrt(max_j sum_k |M_jk|^(2(1-q)))
    for q in [0, 1], with the convention 0^0 = 0 so that exact zero entries
    never contribute at the endpoints.
    """
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q!r}")
    a = np.abs(m.m)
    nz = a > 0.0

    def powered(e: float) -> np.ndarray:
        out = np.zeros_like(a)
        out[nz] = a[nz] ** e
        return out

    col = powered(2.0 * q).sum(axis=0).max()
    row = powered(2.0 * (1.0 - q)).sum(axis=1).max()
    return float(math.sqrt(col) * math.sqrt(row))


def _golden_min(f, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def bound_sigma_u(m: MMatrix) -> tuple[float, float]:
    """Measurable lower bound 2 sqrt(Tr M M^dag - min_q sigma_U(q)^2).

    Tr M M^dag is taken as sum |M_ij|^2.  The minimization runs a 101-point
    grid over q in [0, 1] refined by golden section to 1e-6, and always also
    checks the simple points q in {0, 1/2, 1}.  Returns (bound, argmin q).
    """
    tr = float((np.abs(m.m) ** 2).sum())

    def f(q: float) -> float:
        return sigma_u(m, q) ** 2

    grid = np.linspace(0.0, 1.0, 101)
    vals = [f(q) for q in grid]
    i = int(np.argmin(vals))
    lo = grid[max(0, i - 1)]
    hi = grid[min(len(grid) - 1, i + 1)]
    q_ref, f_ref = _golden_min(f, lo, hi, 1e-6)

    best_q, best_f = q_ref, f_ref
    for q in (0.0, 0.5, 1.0):
        fq = f(q)
        if fq < best_f:
            best_q, best_f = q, fq
    bound = 2.0 * math.sqrt(max(0.0, tr - best_f))
    return float(bound), float(best_q)


def bound_qubit_det(m: MMatrix) -> tuple[float, float]:
    """Determinant-based quantities for three qubits (n = 2 only).

    Returns (exact, bound): exact = 2 sqrt(|det M|), which equals the
    monotone itself for n = 2, and the measurable moduli-only bound
    2 sqrt(| |M00||M11| - |M01||M10| |) <= exact.
    """
    if m.n != 2:
        raise DimensionError(f"determinant bound is defined for n = 2, got n = {m.n}")
    a = m.m
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    exact = 2.0 * math.sqrt(abs(det))
    mod = abs(abs(a[0, 0]) * abs(a[1, 1]) - abs(a[0, 1]) * abs(a[1, 0]))
    return float(exact), float(2.0 * math.sqrt(mod))


def tau(state: PureState) -> TangleReport:
    """Genuine tripartite entanglement monotone with all bounds.

    tau = sqrt(C_a^2 - C^2); for n = 2 the squared value (the three-tangle)
    is reported as well.  Every lower bound is dominance-checked against tau;
    a violation raises InternalInconsistency.
    """
    mm = build_m(state)
    lam = lambda_spectrum(state, route="via_M")
    c_a = localizable_concurrence(lam)
    c = concurrence(lam)
    tau_val = math.sqrt(max(0.0, c_a * c_a - c * c))
    three_tangle = tau_val * tau_val if state.n == 2 else None

    b_spec = bound_spectral(lam)
    b_su, q_star = bound_sigma_u(mm)
    if state.n == 2:
        det_exact, det_bound = bound_qubit_det(mm)
    else:
        det_exact, det_bound = None, None

    if not (-1e-9 <= c <= c_a + 1e-9) or tau_val > c_a + 1e-9:
        raise InternalInconsistency(f"report out of range: c={c}, c_a={c_a}, tau={tau_val}")
    bounds = [b_spec, b_su] + ([det_bound] if det_bound is not None else [])
    for b in bounds:
        if b > tau_val + 1e-9:
            raise InternalInconsistency(f"lower bound {b} exceeds tau {tau_val}")

    return TangleReport(
        n=state.n,
        c_a=c_a,
        c=c,
        tau=tau_val,
        three_tangle=three_tangle,
        lam=lam,
        bound_spectral=b_spec,
        bound_sigma_u=b_su,
        q_star=q_star,
        bound_qubit_det=det_bound,
        qubit_det_exact=det_exact,
    )
