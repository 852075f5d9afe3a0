"""Exact-diagonalization check of the non-orthonormal pipeline.

States are built site by site in the occupation basis by applying momentum
raising operators ``b_k^dag = L^{-1/2} sum_j exp(2 pi i j k / L) a_j^dag`` to
the empty chain. The reduced density matrix of ``A`` and ``B`` is then an
explicit partial trace over the sites of ``C``. Nothing here uses Gram
matrices, permanents or the block expansion of the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement

import numpy as np

from .combinatorics import MomentumMultiset, MultisetError
from .measures import MeasureSet, OrthoDensity, compute_measures, measures_from_ortho
from .model import Geometry, Statistics
from .statebuilder import build_quasiparticle_density

Occupation = tuple[int, ...]


@dataclass(frozen=True)
class FockBasis:
    """Occupation vectors of ``n`` particles on ``L`` sites, in lexicographic order."""

    L: int
    n: int
    stats: Statistics

    @property
    def states(self) -> list[Occupation]:
        out = []
        if self.stats is Statistics.FERMIONIC:
            sites = combinations(range(self.L), self.n)
        else:
            sites = combinations_with_replacement(range(self.L), self.n)
        for occupied in sites:
            occ = [0] * self.L
            for j in occupied:
                occ[j] += 1
            out.append(tuple(occ))
        return sorted(out)

    def __len__(self) -> int:
        if self.stats is Statistics.FERMIONIC:
            return math.comb(self.L, self.n)
        return math.comb(self.L + self.n - 1, self.n)


def _apply_creation(state: dict, site: int, amp: complex, stats: Statistics) -> dict:
    """``amp * a_site^dag`` applied to a sparse state (site is 0-based)."""
    out: dict = {}
    for occ, c in state.items():
        n_j = occ[site]
        if stats is Statistics.FERMIONIC:
            if n_j:
                continue
            factor = -1.0 if sum(occ[:site]) % 2 else 1.0
        else:
            factor = math.sqrt(n_j + 1)
        new = occ[:site] + (n_j + 1,) + occ[site + 1 :]
        out[new] = out.get(new, 0.0) + amp * factor * c
    return out


def _apply_mode(state: dict, k: int, L: int, stats: Statistics) -> dict:
    total: dict = {}
    for j in range(1, L + 1):
        amp = np.exp(2j * np.pi * j * k / L) / math.sqrt(L)
        for occ, c in _apply_creation(state, j - 1, amp, stats).items():
            total[occ] = total.get(occ, 0.0) + c
    return total


def build_full_state(K: MomentumMultiset, L: int, stats: Statistics) -> tuple[FockBasis, np.ndarray]:
    """Amplitudes of ``|K>`` over :class:`FockBasis`.

    The operators are applied right to left, so ``|k1 k2> = b_k1^dag b_k2^dag |0>``.
    """
    stats = Statistics(stats)
    if stats is Statistics.CLASSICAL:
        raise ValueError("the oracle covers bosonic and fermionic chains only")
    state: dict = {(0,) * L: 1.0 + 0.0j}
    for k, r in reversed(K.entries):
        for _ in range(r):
            state = _apply_mode(state, k, L, stats)
        state = {occ: c / math.sqrt(math.factorial(r)) for occ, c in state.items()}
    basis = FockBasis(L, K.particle_count, stats)
    index = {occ: i for i, occ in enumerate(basis.states)}
    vec = np.zeros(len(index), dtype=complex)
    for occ, c in state.items():
        vec[index[occ]] = c
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise MultisetError(f"state {K} vanishes (repeated fermionic momentum?)")
    return basis, vec


def exact_rdm(basis: FockBasis, vec: np.ndarray, g: Geometry) -> OrthoDensity:
    """``rho_AB`` over the A and B occupation configurations that carry weight.

    For fermions each configuration is first rewritten in block order
    ``A, B, C``, which moves the B operators past those of ``C1``.
    """
    if g.L != basis.L:
        raise ValueError("geometry and Fock basis disagree on L")
    A = [j - 1 for j in g.sites("A")]
    B = [j - 1 for j in g.sites("B")]
    C1 = [j - 1 for j in g.sites("C1")]
    C = [j - 1 for j in g.sites("C")]
    fermionic = basis.stats is Statistics.FERMIONIC

    rows = []
    for occ, c in zip(basis.states, vec):
        if c == 0:
            continue
        a = tuple(occ[j] for j in A)
        b = tuple(occ[j] for j in B)
        rest = tuple(occ[j] for j in C)
        if fermionic and (sum(b) * sum(occ[j] for j in C1)) % 2:
            c = -c
        rows.append((a, b, rest, c))

    a_labels = sorted({r[0] for r in rows})
    b_labels = sorted({r[1] for r in rows})
    c_labels = sorted({r[2] for r in rows})
    ia = {x: i for i, x in enumerate(a_labels)}
    ib = {x: i for i, x in enumerate(b_labels)}
    ic = {x: i for i, x in enumerate(c_labels)}
    d_a, d_b = len(a_labels), len(b_labels)
    psi = np.zeros((d_a * d_b, len(c_labels)), dtype=complex)
    for a, b, rest, c in rows:
        psi[ia[a] * d_b + ib[b], ic[rest]] += c
    psi /= np.linalg.norm(psi)
    rho = psi @ psi.conj().T
    return OrthoDensity(
        0.5 * (rho + rho.conj().T),
        d_a,
        d_b,
        np.array([sum(x) for x in a_labels], dtype=int),
        np.array([sum(x) for x in b_labels], dtype=int),
        fermionic,
    )


def oracle_measures(K: MomentumMultiset, g: Geometry, stats: Statistics, negativity: str = "auto") -> MeasureSet:
    basis, vec = build_full_state(K, g.L, stats)
    return measures_from_ortho(exact_rdm(basis, vec, g), negativity=negativity)


# ---------------------------------------------------------------------------
# equivalence suites


@dataclass(frozen=True)
class OracleCase:
    stats: Statistics
    K: MomentumMultiset
    geometry: Geometry

    def label(self) -> str:
        g = self.geometry
        return f"{self.stats.value:9s} K={str(self.K):8s} L={g.L:<3d} ell1={g.ell1} d={g.d} ell2={g.ell2}"


@dataclass(frozen=True)
class OracleResult:
    case: OracleCase
    pipeline: MeasureSet
    oracle: MeasureSet
    tol: float

    @property
    def max_deviation(self) -> float:
        return max(abs(p - o) for p, o in zip(self.pipeline.values(), self.oracle.values()))

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def _partitions(L: int) -> list[tuple[int, int, int]]:
    """``(ell1, d, ell2)`` cuts per chain length, two with ``d = 0``."""
    return [(2, 0, 3), (3, 0, 2), (2, 1, 3), (3, 2, 2), (1, L // 2 - 1, 2), (4, 1, 3)]


SUITE_MOMENTA = {
    Statistics.BOSONIC: ["1", "1,2", "1^2", "1,2,3", "1^2,2"],
    Statistics.FERMIONIC: ["1", "1,2", "1,2,3"],
}


def oracle_suite(name: str = "small") -> list[OracleCase]:
    """Cases for ``oracle-check``.

    ``small`` covers both statistics, every momentum set in
    :data:`SUITE_MOMENTA`, ``L`` in 8, 9, 10 and six cuts per ``L``; ``tiny``
    keeps only ``L = 8``.
    """
    lengths = {"small": (8, 9, 10), "tiny": (8,)}.get(name)
    if lengths is None:
        raise ValueError(f"unknown oracle suite {name!r}; choose 'small' or 'tiny'")
    cases = []
    for stats, specs in SUITE_MOMENTA.items():
        for spec in specs:
            K = MomentumMultiset.parse(spec)
            for L in lengths:
                for ell1, d, ell2 in _partitions(L):
                    cases.append(OracleCase(stats, K, Geometry(L, ell1, d, ell2)))
    return cases


def run_case(case: OracleCase, tol: float = 1e-8, negativity: str = "auto") -> OracleResult:
    density = build_quasiparticle_density(case.K, case.geometry, case.stats)
    pipe = compute_measures(density, negativity=negativity)
    return OracleResult(case, pipe, oracle_measures(case.K, case.geometry, case.stats, negativity), tol)
