"""Dense Hermitian kernels shared by the whole pipeline.

All reshapes use one index linearization: a composite index ``(i, alpha)``
over spaces of dimensions ``(d_A, d_B)`` maps to ``i * d_B + alpha``. This is
the row-major convention of :func:`numpy.kron` and :meth:`numpy.ndarray.reshape`.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

HERMITIAN_TOL = 1e-12
CLAMP_TOL = 1e-10
TRACE_TOL = 1e-8
SQRT_RANK_TOL = 1e-13


class LinalgError(ValueError):
    """Raised when a matrix violates a structural precondition."""


def as_square(m) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {a.shape}")
    return a


def check_hermitian(m, tol: float = HERMITIAN_TOL, atol: float = 1e-15) -> np.ndarray:
    """Return ``m`` as an array after checking ``m == m^dagger``.

    The tolerance is relative to the largest absolute entry, with an absolute
    floor ``atol`` for matrices made of rounding noise. On failure the message
    names the worst offending entry pair.
    """
    a = as_square(m)
    if a.size == 0:
        return a
    scale = max(float(np.max(np.abs(a))), 1.0e-300)
    diff = np.abs(a - a.conj().T)
    worst = np.unravel_index(int(np.argmax(diff)), diff.shape)
    if diff[worst] > max(tol * scale, atol):
        i, j = (int(v) for v in worst)
        raise LinalgError(
            f"matrix is not Hermitian: |m[{i},{j}] - conj(m[{j},{i}])| = "
            f"{diff[worst]:.3e} exceeds {tol:g} * {scale:.3e}"
        )
    return a


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``m = R diag(w) R^dagger`` of a Hermitian matrix.

    Returns
    -------
    w : ndarray
        Real eigenvalues in descending order.
    R : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = check_hermitian(m)
    w, r = np.linalg.eigh(hermitize(a))
    return w[::-1].copy(), r[:, ::-1].copy()


def clamp_spectrum(w, tol: float = CLAMP_TOL, what: str = "matrix") -> np.ndarray:
    """Zero out small negative eigenvalues; reject genuinely negative ones."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -tol:
        raise LinalgError(
            f"{what} has eigenvalue {w.min():.6e} below -{tol:g}; "
            "expected a positive semidefinite matrix"
        )
    return np.where(w < 0.0, 0.0, w)


def psd_sqrt(m, rank_tol: float = SQRT_RANK_TOL) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues below ``rank_tol * max(eigenvalue)`` are set to zero before
    the root: the square root would otherwise inflate rounding noise of order
    1e-17 into entries of order 1e-9.
    """
    w, r = hermitian_eig(m)
    w = clamp_spectrum(w, what="psd_sqrt input")
    if w.size:
        w = np.where(w <= rank_tol * w[0], 0.0, w)
    root = (r * np.sqrt(w)) @ r.conj().T
    return hermitize(root)


def permanent(m) -> complex:
    """Exact permanent by Ryser's formula with Gray-code row sums.

    Cost is ``O(2^n n)``; intended for the small matrices that arise from
    momentum multisets.
    """
    a = np.asarray(as_square(m), dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    # Ryser: per(A) = (-1)^n sum_{S} (-1)^{|S|} prod_i sum_{j in S} a_ij
    rowsum = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    gray = 0
    for step in range(1, 2**n):
        # column whose membership flips at this Gray-code step
        j = (step & -step).bit_length() - 1
        gray ^= 1 << j
        if gray >> j & 1:
            rowsum += a[:, j]
        else:
            rowsum -= a[:, j]
        size = bin(gray).count("1")
        term = np.prod(rowsum)
        total += -term if size % 2 else term
    return complex(total * (-1) ** n)


def permanent_bruteforce(m) -> complex:
    """Permanent as the plain sum over all permutations (test oracle)."""
    a = np.asarray(as_square(m), dtype=complex)
    n = a.shape[0]
    return complex(
        sum(np.prod([a[i, p[i]] for i in range(n)]) for p in permutations(range(n)))
    )


def determinant(m) -> complex:
    a = np.asarray(as_square(m), dtype=complex)
    if a.shape[0] == 0:
        return 1.0 + 0.0j
    return complex(np.linalg.det(a))


def von_neumann_entropy(spectrum, tol: float = TRACE_TOL) -> float:
    """Entropy ``-sum p log p`` (natural log) of a normalized spectrum.

    Values in ``[-1e-10, 0)`` are treated as zero. A spectrum whose sum is
    off from one by more than ``tol`` indicates trace leakage and raises.
    """
    p = clamp_spectrum(np.ravel(spectrum), what="density spectrum")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise LinalgError(f"spectrum sums to {total:.12g}, expected 1 within {tol:g}")
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)))


def shannon_h(x) -> np.ndarray | float:
    """Elementwise ``h(x) = -x log x`` with ``h(0) = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = -x[pos] * np.log(x[pos])
    return float(out) if out.ndim == 0 else out


def trace_norm_hermitian(m) -> float:
    a = check_hermitian(m, tol=1e-10)
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(a)))))


def kron(a, b) -> np.ndarray:
    """Kronecker product, A-index major: ``(i, alpha) -> i * d_B + alpha``."""
    return np.kron(np.asarray(a), np.asarray(b))


def reshape4_to_2(t: np.ndarray) -> np.ndarray:
    """Flatten a ``(dA, dB, dA, dB)`` tensor into a ``(dA dB, dA dB)`` matrix."""
    d_a, d_b, d_a2, d_b2 = t.shape
    return t.reshape(d_a * d_b, d_a2 * d_b2)


def reshape2_to_4(m: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Inverse of :func:`reshape4_to_2`."""
    if m.shape != (d_a * d_b, d_a * d_b):
        raise LinalgError(f"cannot reshape {m.shape} into ({d_a}, {d_b}, {d_a}, {d_b})")
    return m.reshape(d_a, d_b, d_a, d_b)


def reorder_U(t: np.ndarray) -> np.ndarray:
    """Map ``T[i, alpha, j, beta]`` to the ``(dA^2, dB^2)`` matrix ``U[ij, alpha beta]``."""
    d_a, d_b = t.shape[0], t.shape[1]
    return t.transpose(0, 2, 1, 3).reshape(d_a * d_a, d_b * d_b)


def partial_transpose_B(t: np.ndarray) -> np.ndarray:
    """``S~[i, alpha, j, beta] = S[i, beta, j, alpha]`` on a 4-tensor."""
    return t.transpose(0, 3, 2, 1)


def partial_traces(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced matrices ``(S_A, S_B)`` of a ``(dA, dB, dA, dB)`` tensor."""
    return np.einsum("iaja->ij", t), np.einsum("iaib->ab", t)

