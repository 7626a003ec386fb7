"""Independent oracle implementations used to freeze expected test values.

Everything here is deliberately written from scratch against the raw
amplitude vectors (dense kron / einsum, no reuse of the production
contraction paths), so route agreement in the tests is a real cross-check.
"""

import numpy as np

KERNEL = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)

SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2)


def partial_trace_c(amp: np.ndarray, n: int) -> np.ndarray:
    """Dense partial trace over C of |psi><psi| via the (2,2,n) tensor."""
    t = amp.reshape(2, 2, n)
    rho = np.einsum("abk,cdk->abcd", t, t.conj()).reshape(4, 4)
    return rho


def tau_via_r(amp: np.ndarray, n: int) -> float:
    """Monotone from the spin-flip eigenvalue route, implemented locally."""
    rho = partial_trace_c(amp, n)
    r = rho @ KERNEL @ rho.conj() @ KERNEL
    lam = np.sort(np.sqrt(np.clip(np.linalg.eigvals(r).real, 0.0, None)))[::-1]
    c_a = lam.sum()
    c = max(0.0, 2.0 * lam[0] - c_a)
    return float(np.sqrt(max(0.0, c_a**2 - c**2)))


def dense_observable(n: int, q1: np.ndarray, q2: np.ndarray, i: int, j: int) -> np.ndarray:
    """Full 16 n^2 coincidence observable in ordering (A1,B1,C1,A2,B2,C2).

    Built from kron in the ordering (A1,A2,B1,B2,C1,C2) and permuted; the
    basis kets are the conjugate columns of q1, q2.
    """
    p_minus = np.outer(SINGLET, SINGLET.conj())
    b1 = q1.conj()[:, i]
    b2 = q2.conj()[:, j]
    pi = np.outer(b1, b1.conj())
    pj = np.outer(b2, b2.conj())
    a = np.kron(np.kron(p_minus, p_minus), np.kron(pi, pj))
    dims = (2, 2, 2, 2, n, n)
    perm = (0, 2, 4, 1, 3, 5)  # (A1,A2,B1,B2,C1,C2) -> (A1,B1,C1,A2,B2,C2)
    t = a.reshape(dims + dims).transpose(perm + tuple(6 + p for p in perm))
    return t.reshape(16 * n * n, 16 * n * n)


def dense_expectation(amp: np.ndarray, n: int, q1: np.ndarray, q2: np.ndarray, i: int, j: int) -> float:
    """<psi psi| A_ij |psi psi> with the observable materialized densely."""
    two = np.kron(amp, amp)
    a = dense_observable(n, q1, q2, i, j)
    return float(np.real(two.conj() @ a @ two))


def dense_noisy_prob(rho1: np.ndarray, rho2: np.ndarray, n: int, q: np.ndarray, i: int, j: int) -> float:
    """Tr[(rho1 x rho2) A_ij] with everything materialized densely."""
    a = dense_observable(n, q, q, i, j)
    return float(np.real(np.trace(np.kron(rho1, rho2) @ a)))
