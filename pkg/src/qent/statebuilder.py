"""Reduced density matrices of excited states in non-orthonormal block bases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .combinatorics import (
    MomentumMultiset,
    MultisetError,
    Splitting,
    bosonic_coefficient,
    fermionic_sign,
    multiset_subtract,
    sub_multisets,
)
from .linalg import check_hermitian, kron
from .model import Geometry, Statistics, gram_matrix


@dataclass
class NonOrthoDensity:
    """``rho_AB = sum P[i, a, j, b] |phi_i phi_a><phi_j phi_b|`` with block Gram matrices.

    ``P`` is stored as a ``(d_A, d_B, d_A, d_B)`` tensor. The basis labels are
    only informative; classical densities carry integer occupation labels.
    """

    P: np.ndarray
    Q_A: np.ndarray
    Q_B: np.ndarray
    basis_A: list = field(default_factory=list)
    basis_B: list = field(default_factory=list)
    fermionic: bool = False

    @property
    def d_A(self) -> int:
        return self.P.shape[0]

    @property
    def d_B(self) -> int:
        return self.P.shape[1]

    @property
    def counts_A(self) -> np.ndarray | None:
        return _particle_counts(self.basis_A, self.d_A)

    @property
    def counts_B(self) -> np.ndarray | None:
        return _particle_counts(self.basis_B, self.d_B)

    @property
    def matrix(self) -> np.ndarray:
        n = self.d_A * self.d_B
        return self.P.reshape(n, n)

    def physical_trace(self) -> complex:
        """``tr rho_AB = sum P[ia, jb] (Q_A x Q_B)[jb, ia]``."""
        return complex(np.sum(self.matrix * kron(self.Q_A, self.Q_B).T))

    def swapped(self) -> "NonOrthoDensity":
        """Same state with the roles of A and B exchanged."""
        return NonOrthoDensity(
            self.P.transpose(1, 0, 3, 2).copy(), self.Q_B, self.Q_A, self.basis_B, self.basis_A, self.fermionic
        )


def _particle_counts(labels: list, dim: int) -> np.ndarray | None:
    """Particle number of each basis label, or ``None`` if labels are missing."""
    if len(labels) != dim:
        return None
    counts = []
    for lab in labels:
        if isinstance(lab, MomentumMultiset):
            counts.append(lab.particle_count)
        elif isinstance(lab, tuple):
            counts.append(sum(lab))
        else:
            return None
    return np.array(counts, dtype=int)


@dataclass(frozen=True)
class ClassicalState:
    """``r`` classical particles, each independently in A, B or C with weights ``x1, x2, 1-x1-x2``."""

    r: int
    x1: float
    x2: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("particle count must be non-negative")
        if self.x1 < 0 or self.x2 < 0 or self.x1 + self.x2 > 1 + 1e-15:
            raise ValueError(f"need x1, x2 >= 0 and x1 + x2 <= 1, got ({self.x1}, {self.x2})")


def _expansion(K: MomentumMultiset, stats: Statistics) -> dict[tuple, float]:
    """Coefficients of ``|K>`` over block splittings, keyed by ``(K_A, K_B, K_C)``."""
    coef = {}
    for K_A in sub_multisets(K):
        rest = multiset_subtract(K, K_A)
        for K_B in sub_multisets(rest):
            K_C = multiset_subtract(rest, K_B)
            split = Splitting(K_A, K_B, K_C)
            if stats is Statistics.BOSONIC:
                coef[(K_A, K_B, K_C)] = bosonic_coefficient(K, split)
            else:
                coef[(K_A, K_B, K_C)] = float(fermionic_sign(K, split))
    return coef


def build_quasiparticle_density(K: MomentumMultiset, g: Geometry, stats: Statistics) -> NonOrthoDensity:
    """``rho_AB`` of ``|K>`` in the bases ``b^dag_{A,K_A} b^dag_{B,K_B} |G_AB>``.

    Tracing out C leaves ``P[(K_A,K_B),(K_A',K_B')] = c c' <chi_{K_C'}|chi_{K_C}>``
    with ``K_C = K - K_A - K_B`` and ``chi`` the unnormalized C-block states.
    """
    stats = Statistics(stats)
    if stats is Statistics.CLASSICAL:
        raise ValueError("use build_classical_density for classical states")
    if stats is Statistics.FERMIONIC and not K.is_fermionic:
        raise MultisetError(f"fermionic state cannot repeat a momentum: {K}")
    for k in K.counts:
        if not 1 <= k <= g.L:
            raise MultisetError(f"momentum {k} outside 1..{g.L}")

    basis = sub_multisets(K)
    index = {m: i for i, m in enumerate(basis)}
    d = len(basis)
    coef = _expansion(K, stats)

    Q_A = gram_matrix("A", basis, stats, g)
    Q_B = gram_matrix("B", basis, stats, g)
    Q_C = gram_matrix("C", basis, stats, g)

    terms = [(index[a], index[b], index[c], v) for (a, b, c), v in coef.items()]
    P = np.zeros((d, d, d, d), dtype=complex)
    for i, al, c, v in terms:
        for j, be, c2, v2 in terms:
            P[i, al, j, be] += v * v2 * Q_C[c2, c]
    return NonOrthoDensity(P, Q_A, Q_B, list(basis), list(basis), stats is Statistics.FERMIONIC)


def _classical_single(r: int, x1: float, x2: float) -> np.ndarray:
    """``rho_AB`` of one species of ``r`` particles on occupations ``0..r`` of A and B."""
    xc = max(0.0, 1.0 - x1 - x2)
    d = r + 1
    psi = np.zeros((d, d, d))
    for a in range(d):
        for b in range(d - a):
            c = r - a - b
            w = math.factorial(r) / (math.factorial(a) * math.factorial(b) * math.factorial(c))
            psi[a, b, c] = math.sqrt(w * x1**a * x2**b * xc**c)
    return np.einsum("abc,ABc->abAB", psi, psi).astype(complex)


def _tensor_densities(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Join independent ``(A1 B1) x (A2 B2)`` tensors into ``(A1A2) (B1B2)`` ordering."""
    a1, b1 = first.shape[:2]
    a2, b2 = second.shape[:2]
    joint = np.einsum("iajb,kclm->ikacjlbm", first, second)
    return joint.reshape(a1 * a2, b1 * b2, a1 * a2, b1 * b2)


def build_classical_density(c: ClassicalState | list[ClassicalState]) -> NonOrthoDensity:
    """Classical-particle ``rho_AB`` in an orthonormal occupation basis.

    A list of states describes independent species and yields their tensor
    product, with A (and B) labels ordered species-major.
    """
    states = [c] if isinstance(c, ClassicalState) else list(c)
    P = np.ones((1, 1, 1, 1), dtype=complex)
    labels_A: list[tuple] = [()]
    for s in states:
        P = _tensor_densities(P, _classical_single(s.r, s.x1, s.x2))
        labels_A = [lab + (n,) for lab in labels_A for n in range(s.r + 1)]
    d_a, d_b = P.shape[:2]
    return NonOrthoDensity(P, np.eye(d_a, dtype=complex), np.eye(d_b, dtype=complex), labels_A, list(labels_A))


def classical_species(K: MomentumMultiset, g: Geometry) -> list[ClassicalState]:
    """One classical species per distinct label of ``K``, with its multiplicity."""
    return [ClassicalState(r, g.x1, g.x2) for _, r in K.entries]


def build_density(K: MomentumMultiset, g: Geometry, stats: Statistics) -> NonOrthoDensity:
    stats = Statistics(stats)
    if stats is Statistics.CLASSICAL:
        return build_classical_density(classical_species(K, g))
    return build_quasiparticle_density(K, g, stats)


def check_density(p: NonOrthoDensity, tol: float = 1e-10) -> None:
    check_hermitian(p.matrix, tol=tol)
    tr = p.physical_trace()
    if abs(tr - 1.0) > tol:
        raise ValueError(f"physical trace {tr:.12g} differs from 1 by more than {tol:g}")
