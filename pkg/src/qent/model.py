"""Chain geometry, block overlaps of momentum modes, and Gram matrices."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .combinatorics import MomentumMultiset
from .linalg import LinalgError, check_hermitian, determinant, permanent


class Statistics(str, Enum):
    CLASSICAL = "classical"
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"

    @classmethod
    def parse(cls, text: str) -> "Statistics":
        aliases = {
            "classical": cls.CLASSICAL,
            "boson": cls.BOSONIC,
            "bosonic": cls.BOSONIC,
            "fermion": cls.FERMIONIC,
            "fermionic": cls.FERMIONIC,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown statistics {text!r}") from None


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Geometry:
    """Circular chain of ``L`` sites cut into ``A, C1, B, C2`` (sites numbered from 1).

    ``A = [1, ell1]``, ``C1 = [ell1+1, ell1+d]``, ``B = [ell1+d+1, ell1+d+ell2]``
    and ``C2`` is the remainder.
    """

    L: int
    ell1: int
    d: int
    ell2: int

    def __post_init__(self):
        if self.L < 1:
            raise GeometryError(f"L must be positive, got {self.L}")
        if min(self.ell1, self.d, self.ell2) < 0:
            raise GeometryError(f"block sizes must be non-negative: {self}")
        if self.ell1 + self.d + self.ell2 > self.L:
            raise GeometryError(f"ell1 + d + ell2 = {self.ell1 + self.d + self.ell2} exceeds L = {self.L}")

    @classmethod
    def from_ratios(cls, L: int, x1, x2, y=0) -> "Geometry":
        """Build from ratios; every ``x * L`` must be an integer."""
        sizes = []
        bad = []
        for name, x in (("x1", x1), ("y", y), ("x2", x2)):
            v = Fraction(x) * L if not isinstance(x, float) else Fraction(str(x)) * L
            if v.denominator != 1:
                bad.append(f"{name}={x}")
            sizes.append(int(v))
        if bad:
            raise GeometryError(f"non-integer site counts at L={L}: {', '.join(bad)}")
        ell1, d, ell2 = sizes
        return cls(L, ell1, d, ell2)

    @property
    def x1(self) -> float:
        return self.ell1 / self.L

    @property
    def x2(self) -> float:
        return self.ell2 / self.L

    @property
    def y(self) -> float:
        return self.d / self.L

    @property
    def ell_c(self) -> int:
        """Sites of ``C = C1 + C2``."""
        return self.L - self.ell1 - self.ell2

    def sites(self, block: str) -> list[int]:
        a, d, b = self.ell1, self.d, self.ell2
        if block == "A":
            return list(range(1, a + 1))
        if block == "C1":
            return list(range(a + 1, a + d + 1))
        if block == "B":
            return list(range(a + d + 1, a + d + b + 1))
        if block == "C2":
            return list(range(a + d + b + 1, self.L + 1))
        if block == "C":
            return self.sites("C1") + self.sites("C2")
        raise GeometryError(f"unknown block {block!r}")


def alpha(block: str, k: int, g: Geometry) -> complex:
    """Overlap ``(1/L) sum_{j in block} exp(-2 pi i j k / L)`` in closed form."""
    L = g.L
    kk = k % L
    if block == "C":
        delta = 1.0 if kk == 0 else 0.0
        return delta - alpha("A", k, g) - alpha("B", k, g)
    if block == "A":
        ell, shift = g.ell1, g.ell1 + 1
    elif block == "B":
        ell, shift = g.ell2, 2 * g.ell1 + 2 * g.d + g.ell2 + 1
    else:
        raise GeometryError(f"unknown block {block!r}")
    if kk == 0:
        return complex(ell / L)
    # the site sum is L-periodic in k; evaluate the closed form at kk
    phase = cmath.exp(-1j * math.pi * kk * shift / L)
    return phase * math.sin(math.pi * kk * ell / L) / (L * math.sin(math.pi * kk / L))


def alpha_table(block: str, g: Geometry) -> np.ndarray:
    """``alpha(block, k)`` for ``k = 0 .. L-1``."""
    return np.array([alpha(block, k, g) for k in range(g.L)], dtype=complex)


def gram_matrix(block: str, basis: list[MomentumMultiset], stats: Statistics, g: Geometry) -> np.ndarray:
    """Overlaps ``<G| b_{K1} b^dag_{K2} |G>`` of unnormalized block states.

    Entries vanish between different particle numbers; otherwise they are the
    permanent (bosons) or determinant (fermions) of ``alpha(k1 - k2)`` with
    rows and columns ordered by ascending momentum.
    """
    if stats is Statistics.CLASSICAL:
        raise ValueError("classical states use an orthonormal basis; no Gram matrix")
    table = alpha_table(block, g)
    reduce = permanent if stats is Statistics.BOSONIC else determinant
    n = len(basis)
    q = np.zeros((n, n), dtype=complex)
    for i, K1 in enumerate(basis):
        m1 = np.array(K1.momenta, dtype=int)
        for j, K2 in enumerate(basis):
            if K1.particle_count != K2.particle_count:
                continue
            m2 = np.array(K2.momenta, dtype=int)
            q[i, j] = reduce(table[(m1[:, None] - m2[None, :]) % g.L])
    check_hermitian(q, tol=1e-10)
    w = np.linalg.eigvalsh(q)
    scale = max(1.0, float(np.max(np.abs(w)))) if n else 1.0
    if n and w.min() < -1e-10 * scale:
        raise LinalgError(f"Gram matrix of block {block} has eigenvalue {w.min():.3e} < 0")
    return q
