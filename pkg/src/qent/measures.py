"""Reflected entropy, mutual information and logarithmic negativity.

The entry point is :func:`compute_measures`, which takes a density in a
non-orthonormal product basis, rotates it into an orthonormal one using the
block Gram matrices and evaluates all three measures from the result.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .linalg import (
    LinalgError,
    clamp_spectrum,
    hermitian_eig,
    hermitize,
    kron,
    partial_traces,
    partial_transpose_B,
    psd_sqrt,
    reorder_U,
    reshape2_to_4,
    shannon_h,
    trace_norm_hermitian,
    von_neumann_entropy,
)
from .statebuilder import NonOrthoDensity

RANK_EPS = 1e-12
INEQUALITY_TOL = 1e-9


class InvariantViolation(ArithmeticError):
    """A computed quantity broke one of the inequalities it must satisfy."""


@dataclass(frozen=True)
class OrthoDensity:
    """``rho_AB`` as a ``(d_A d_B, d_A d_B)`` matrix in an orthonormal product basis.

    ``counts_A`` and ``counts_B`` give the particle number of each basis
    vector when it is definite; fermionic negativity needs them.
    """

    S: np.ndarray
    d_A: int
    d_B: int
    counts_A: np.ndarray | None = None
    counts_B: np.ndarray | None = None
    fermionic: bool = False

    @property
    def tensor(self) -> np.ndarray:
        return reshape2_to_4(self.S, self.d_A, self.d_B)

    def swapped(self) -> "OrthoDensity":
        t = self.tensor.transpose(1, 0, 3, 2)
        n = self.d_A * self.d_B
        return OrthoDensity(
            t.reshape(n, n).copy(), self.d_B, self.d_A, self.counts_B, self.counts_A, self.fermionic
        )


@dataclass(frozen=True)
class MeasureSet:
    """Measures in nats; ``markov_gap = S_R - I``."""

    S_R: float
    I: float  # noqa: E741
    E_N: float
    markov_gap: float

    @classmethod
    def from_values(cls, S_R: float, I: float, E_N: float) -> "MeasureSet":  # noqa: E741
        return cls(float(S_R), float(I), float(E_N), float(S_R - I))

    @classmethod
    def zero(cls) -> "MeasureSet":
        return cls(0.0, 0.0, 0.0, 0.0)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def values(self) -> tuple[float, float, float]:
        return (self.S_R, self.I, self.E_N)

    def check(self, tol: float = INEQUALITY_TOL) -> "MeasureSet":
        if self.S_R < self.I - tol:
            raise InvariantViolation(f"S_R >= I violated: S_R={self.S_R:.12g}, I={self.I:.12g}")
        if self.E_N < -1e-10:
            raise InvariantViolation(f"E_N >= 0 violated: E_N={self.E_N:.12g}")
        return self

    def __add__(self, other: "MeasureSet") -> "MeasureSet":
        return MeasureSet(
            self.S_R + other.S_R, self.I + other.I, self.E_N + other.E_N, self.markov_gap + other.markov_gap
        )

    def scaled(self, r: float) -> "MeasureSet":
        return MeasureSet(r * self.S_R, r * self.I, r * self.E_N, r * self.markov_gap)


MEASURE_NAMES = ("S_R", "I", "E_N")


def compose_additive(measures) -> MeasureSet:
    """Component-wise sum, the prediction for widely separated momentum groups."""
    total = MeasureSet.zero()
    for m in measures:
        total = total + m
    return total


def _gram_factors(q: np.ndarray, counts: np.ndarray | None, block: str) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a Gram matrix, one particle-number sector at a time.

    Gram matrices never couple different particle numbers, so diagonalizing
    sector by sector is exact and keeps every eigenvector at a definite count
    even when eigenvalues from different sectors coincide.
    """
    n = q.shape[0]
    if not np.any(q - np.diag(np.diag(q))):
        # already orthogonal (classical and oracle densities): keep the basis as is
        w, r = np.diag(q).real.copy(), np.eye(n, dtype=complex)
    elif counts is None:
        w, r = hermitian_eig(q)
    else:
        w = np.zeros(n)
        r = np.zeros((n, n), dtype=complex)
        for c in np.unique(counts):
            idx = np.flatnonzero(counts == c)
            w_s, r_s = hermitian_eig(q[np.ix_(idx, idx)])
            w[idx] = w_s
            r[np.ix_(idx, idx)] = r_s
    w = clamp_spectrum(w, what=f"Gram matrix Q_{block}")
    lam_max = w.max() if w.size else 0.0
    w = np.where(w <= RANK_EPS * lam_max, 0.0, w)
    return w, r


def orthonormalize(p: NonOrthoDensity) -> OrthoDensity:
    """``S = sqrt(Lambda) R^dag P R sqrt(Lambda)`` with ``Q = R Lambda R^dag`` per block.

    Null directions of the Gram matrices get weight zero; nothing is inverted.
    """
    counts_a, counts_b = p.counts_A, p.counts_B
    w_a, r_a = _gram_factors(p.Q_A, counts_a, "A")
    w_b, r_b = _gram_factors(p.Q_B, counts_b, "B")
    R = kron(r_a, r_b)
    sqrt_lam = np.sqrt(np.kron(w_a, w_b))
    S = sqrt_lam[:, None] * (R.conj().T @ p.matrix @ R) * sqrt_lam[None, :]
    return OrthoDensity(hermitize(S), p.d_A, p.d_B, counts_a, counts_b, p.fermionic)


def _spectrum(m: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(hermitize(m))


def reflected_entropy(s: OrthoDensity) -> float:
    """Entropy of ``rho_AA'`` in the canonical purification of ``S``."""
    T = psd_sqrt(s.S)
    U = reorder_U(reshape2_to_4(T, s.d_A, s.d_B))
    return von_neumann_entropy(_spectrum(U @ U.conj().T))


def mutual_information(s: OrthoDensity) -> float:
    """``H(S_A) + H(S_B) - H(S)``."""
    S_A, S_B = partial_traces(s.tensor)
    return (
        von_neumann_entropy(_spectrum(S_A))
        + von_neumann_entropy(_spectrum(S_B))
        - von_neumann_entropy(_spectrum(s.S))
    )


def fermionic_partial_transpose(t: np.ndarray, counts_A: np.ndarray, counts_B: np.ndarray) -> np.ndarray:
    """Twisted fermionic partial transpose of a ``(dA, dB, dA, dB)`` tensor.

    Each exchanged matrix element picks up ``i^((tB + tB') mod 2)`` and
    ``(-1)^((tA + tA')(tB + tB'))`` where ``t`` are the particle numbers of
    the bra and ket basis vectors; the result is then multiplied by the A-block
    parity ``(-1)^F_A`` on the right. For number-conserving states this is
    Hermitian and has the same trace norm as the untwisted transpose.
    """
    n_a = np.asarray(counts_A)
    n_b = np.asarray(counts_B)
    tau_a = n_a[:, None] + n_a[None, :]
    tau_b = n_b[:, None] + n_b[None, :]
    phase = (1j ** (tau_b % 2))[None, :, None, :] * (-1.0) ** (tau_a[:, None, :, None] * tau_b[None, :, None, :])
    twist = ((-1.0) ** n_a)[None, None, :, None]
    return partial_transpose_B(t) * phase * twist


def log_negativity(s: OrthoDensity, kind: str = "auto") -> float:
    """``log`` of the trace norm of the partially transposed density.

    ``kind`` is ``"standard"`` (swap the B indices), ``"fermionic"`` or
    ``"auto"``, which picks the fermionic transpose for fermionic densities.
    """
    if kind == "auto":
        kind = "fermionic" if s.fermionic else "standard"
    n = s.d_A * s.d_B
    if kind == "standard":
        S_pt = partial_transpose_B(s.tensor)
    elif kind == "fermionic":
        if s.counts_A is None or s.counts_B is None:
            raise ValueError("fermionic negativity needs the particle number of every basis vector")
        S_pt = fermionic_partial_transpose(s.tensor, s.counts_A, s.counts_B)
    else:
        raise ValueError(f"unknown partial transpose {kind!r}")
    return math.log(trace_norm_hermitian(S_pt.reshape(n, n)))


def measures_from_ortho(s: OrthoDensity, check: bool = True, negativity: str = "auto") -> MeasureSet:
    tr = float(np.trace(s.S).real)
    if abs(tr - 1.0) > 1e-10:
        raise LinalgError(f"orthonormalized density has trace {tr:.12g}")
    m = MeasureSet.from_values(reflected_entropy(s), mutual_information(s), log_negativity(s, negativity))
    return m.check() if check else m


def compute_measures(p: NonOrthoDensity, check: bool = True, negativity: str = "auto") -> MeasureSet:
    """Full pipeline from a non-orthonormal density to its :class:`MeasureSet`."""
    return measures_from_ortho(orthonormalize(p), check=check, negativity=negativity)


def classical_closed_forms(x1: float, x2: float) -> MeasureSet:
    """Measures of a single classical particle found in A, B with probabilities ``x1, x2``."""
    s = x1 + x2
    if s <= 0.0:
        return MeasureSet.zero()
    h = shannon_h
    disc = math.sqrt(max(0.0, s * (s - 4 * x1 * x2)))
    S_R = 2 * h(x1 * x2 / s) + sum(h((s - 2 * x1 * x2 + sign * disc) / (2 * s)) for sign in (1, -1))
    I = h(x1) + h(1 - x1) + h(x2) + h(1 - x2) - h(s) - h(1 - s)  # noqa: E741
    E_N = math.log(s + math.sqrt((1 - s) ** 2 + 4 * x1 * x2))
    return MeasureSet.from_values(S_R, I, E_N)


def classical_mutual_information_printed(x1: float, x2: float) -> float:
    """Variant with ``+h(1 - x1 - x2)`` in place of ``-h(1 - x1 - x2)``.

    Kept only to document that this sign pattern disagrees with the
    entropies of the one-particle density and breaks ``S_R >= I``.
    """
    h = shannon_h
    s = x1 + x2
    return h(x1) + h(1 - x1) + h(x2) + h(1 - x2) - h(s) + h(1 - s)
