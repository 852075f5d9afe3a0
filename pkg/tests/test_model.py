import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qent.combinatorics import EMPTY, MomentumMultiset, sub_multisets
from qent.linalg import LinalgError
from qent.model import Geometry, GeometryError, Statistics, alpha, gram_matrix

M = MomentumMultiset.parse


@st.composite
def geometries(draw):
    L = draw(st.integers(2, 24))
    ell1 = draw(st.integers(0, L))
    d = draw(st.integers(0, L - ell1))
    ell2 = draw(st.integers(0, L - ell1 - d))
    return Geometry(L, ell1, d, ell2)


def alpha_direct(block, k, g):
    """Fourier sum over the sites of a block."""
    return sum(cmath.exp(-2j * math.pi * j * k / g.L) for j in g.sites(block)) / g.L


class TestGeometry:
    def test_blocks(self):
        g = Geometry(12, 3, 2, 4)
        assert g.sites("A") == [1, 2, 3]
        assert g.sites("C1") == [4, 5]
        assert g.sites("B") == [6, 7, 8, 9]
        assert g.sites("C2") == [10, 11, 12]
        assert g.sites("C") == [4, 5, 10, 11, 12]
        assert g.ell_c == 5

    def test_ratios(self):
        g = Geometry.from_ratios(256, 0.25, Fraction(1, 4), 0)
        assert (g.ell1, g.d, g.ell2) == (64, 0, 64)
        assert (g.x1, g.x2, g.y) == (0.25, 0.25, 0.0)

    def test_non_integer_sites(self):
        with pytest.raises(GeometryError, match="non-integer"):
            Geometry.from_ratios(10, Fraction(1, 3), Fraction(1, 5))

    @pytest.mark.parametrize("args", [(0, 0, 0, 0), (4, 3, 0, 2), (4, -1, 0, 1)])
    def test_invalid(self, args):
        with pytest.raises(GeometryError):
            Geometry(*args)

    def test_statistics_aliases(self):
        assert Statistics.parse("boson") is Statistics.BOSONIC
        assert Statistics.parse("Fermion") is Statistics.FERMIONIC
        with pytest.raises(ValueError):
            Statistics.parse("anyon")


class TestAlpha:
    def test_zero_mode(self):
        g = Geometry(16, 3, 2, 5)
        assert alpha("A", 0, g) == pytest.approx(3 / 16)
        assert alpha("B", 16, g) == pytest.approx(5 / 16)
        assert alpha("C", 0, g) == pytest.approx(1 - 3 / 16 - 5 / 16)

    def test_sine_node(self):
        assert abs(alpha("A", 2, Geometry(4, 2, 0, 1))) < 1e-15

    @settings(max_examples=60, deadline=None)
    @given(geometries(), st.integers(-40, 40))
    def test_matches_fourier_sum(self, g, k):
        for block in "ABC":
            assert alpha(block, k, g) == pytest.approx(alpha_direct(block, k, g), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(geometries(), st.integers(-40, 40))
    def test_properties(self, g, k):
        total = sum(alpha(b, k, g) for b in "ABC")
        assert total == pytest.approx(1.0 if k % g.L == 0 else 0.0, abs=1e-12)
        for b, ell in (("A", g.ell1), ("B", g.ell2), ("C", g.ell_c)):
            assert alpha(b, -k, g) == pytest.approx(np.conj(alpha(b, k, g)), abs=1e-14)
            assert abs(alpha(b, k, g)) <= ell / g.L + 1e-14


class TestGram:
    g = Geometry(16, 4, 2, 6)

    def test_single(self):
        q = gram_matrix("A", sub_multisets(M("3")), Statistics.BOSONIC, self.g)
        np.testing.assert_allclose(q, np.diag([1, 4 / 16]))

    def test_bosonic_square(self):
        q = gram_matrix("A", sub_multisets(M("3^2")), Statistics.BOSONIC, self.g)
        assert q[2, 2] == pytest.approx(2 * (4 / 16) ** 2)
        assert q[0, 1] == 0 and q[1, 2] == 0

    @pytest.mark.parametrize("r", [1, 2, 3, 4])
    def test_bosonic_power(self, r):
        q = gram_matrix("B", [M(f"5^{r}")], Statistics.BOSONIC, self.g)
        assert q[0, 0] == pytest.approx(math.factorial(r) * (6 / 16) ** r)

    def test_fermionic_pair(self):
        q = gram_matrix("A", [M("1,3")], Statistics.FERMIONIC, self.g)
        a0 = alpha("A", 0, self.g)
        expected = a0**2 - abs(alpha("A", -2, self.g)) ** 2
        assert q[0, 0] == pytest.approx(expected)

    def test_empty_entry(self):
        for stats in (Statistics.BOSONIC, Statistics.FERMIONIC):
            assert gram_matrix("C", [EMPTY], stats, self.g)[0, 0] == 1

    @pytest.mark.parametrize("stats,spec", [("bosonic", "1^2,2,5"), ("fermionic", "1,2,3,7")])
    @pytest.mark.parametrize("block", ["A", "B", "C"])
    def test_hermitian_psd(self, stats, spec, block):
        q = gram_matrix(block, sub_multisets(M(spec)), Statistics(stats), self.g)
        np.testing.assert_allclose(q, q.conj().T, atol=1e-14)
        assert np.linalg.eigvalsh(q).min() >= -1e-10

    def test_classical_rejected(self):
        with pytest.raises(ValueError):
            gram_matrix("A", [EMPTY], Statistics.CLASSICAL, self.g)

    def test_ordering_bug_is_caught(self, monkeypatch):
        import qent.model as model

        monkeypatch.setattr(model, "alpha_table", lambda block, g: np.arange(g.L, dtype=complex) + 1j)
        with pytest.raises(LinalgError):
            model.gram_matrix("A", sub_multisets(M("1,2")), Statistics.BOSONIC, self.g)
