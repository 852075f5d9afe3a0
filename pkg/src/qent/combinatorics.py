"""Momentum multisets and the expansion coefficients of excited states.

A multiset ``{k1^r1, ..., ks^rs}`` is written ``"k1^r1,...,ks^rs"``; a bare
``k`` means multiplicity one. Momenta may be affine expressions in the chain
length (``"L/4"``, ``"1+L/2"``) until they are resolved against a concrete
``L``.
"""

from __future__ import annotations

import ast
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator


class MultisetError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class MomentumMultiset:
    """Sorted ``(momentum, multiplicity)`` pairs with positive multiplicities."""

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        moms = [k for k, _ in self.entries]
        if any(b <= a for a, b in zip(moms, moms[1:])):
            raise MultisetError(f"momenta must be strictly increasing: {moms}")
        if any(r < 1 for _, r in self.entries):
            raise MultisetError(f"multiplicities must be positive: {self.entries}")

    @classmethod
    def from_counts(cls, counts) -> "MomentumMultiset":
        items = dict(counts)
        return cls(tuple(sorted((int(k), int(r)) for k, r in items.items() if r > 0)))

    @classmethod
    def from_momenta(cls, momenta: Iterable[int]) -> "MomentumMultiset":
        return cls.from_counts(Counter(int(k) for k in momenta))

    @classmethod
    def parse(cls, text: str) -> "MomentumMultiset":
        """Parse an integer-only multiset such as ``"1^2,3"``."""
        return MomentumSpec.parse(text).resolve(None)

    @property
    def particle_count(self) -> int:
        return sum(r for _, r in self.entries)

    @property
    def counts(self) -> dict[int, int]:
        return dict(self.entries)

    @property
    def momenta(self) -> tuple[int, ...]:
        """Momenta listed with multiplicity, ascending."""
        return tuple(k for k, r in self.entries for _ in range(r))

    @property
    def is_fermionic(self) -> bool:
        return all(r == 1 for _, r in self.entries)

    def multiplicity(self, k: int) -> int:
        return self.counts.get(k, 0)

    def __len__(self) -> int:
        return self.particle_count

    def __str__(self) -> str:
        return ",".join(str(k) if r == 1 else f"{k}^{r}" for k, r in self.entries)

    def __repr__(self) -> str:
        return f"MomentumMultiset({str(self)!r})"


EMPTY = MomentumMultiset()


@dataclass(frozen=True)
class Splitting:
    """Assignment of the particles of a parent multiset to blocks A, B, C."""

    K_A: MomentumMultiset
    K_B: MomentumMultiset
    K_C: MomentumMultiset

    def parent(self) -> MomentumMultiset:
        total = Counter(self.K_A.counts)
        total.update(self.K_B.counts)
        total.update(self.K_C.counts)
        return MomentumMultiset.from_counts(total)


def sub_multisets(K: MomentumMultiset) -> list[MomentumMultiset]:
    """All sub-multisets of ``K``, ordered by particle count then lexicographically.

    There are ``prod(r_i + 1)`` of them; the empty multiset comes first.
    """
    ks = [k for k, _ in K.entries]
    ranges = [range(r + 1) for _, r in K.entries]
    subs = [
        MomentumMultiset(tuple((k, m) for k, m in zip(ks, mults) if m > 0))
        for mults in product(*ranges)
    ]
    subs.sort(key=lambda m: (m.particle_count, m.momenta))
    return subs


def multiset_subtract(K: MomentumMultiset, M: MomentumMultiset) -> MomentumMultiset | None:
    """``K - M`` when ``M`` is contained in ``K``, otherwise ``None``."""
    kc = K.counts
    out = dict(kc)
    for k, r in M.entries:
        if kc.get(k, 0) < r:
            return None
        out[k] -= r
    return MomentumMultiset.from_counts(out)


def iter_splittings(K: MomentumMultiset) -> Iterator[Splitting]:
    for K_A in sub_multisets(K):
        rest = multiset_subtract(K, K_A)
        for K_B in sub_multisets(rest):
            yield Splitting(K_A, K_B, multiset_subtract(rest, K_B))


def _check_partition(K: MomentumMultiset, split: Splitting) -> None:
    if split.parent() != K:
        raise MultisetError(f"{split} does not partition {K}")


def bosonic_coefficient(K: MomentumMultiset, split: Splitting) -> float:
    """Coefficient of ``b_A^{K_A} b_B^{K_B} b_C^{K_C}|G>`` in ``|K>``.

    Expanding ``(b_A + b_B + b_C)^r / sqrt(r!)`` per momentum gives
    ``sqrt(r!) / (a! b! c!)`` for each ``k``.
    """
    _check_partition(K, split)
    coef = 1.0
    for k, r in K.entries:
        a, b, c = split.K_A.multiplicity(k), split.K_B.multiplicity(k), split.K_C.multiplicity(k)
        coef *= math.sqrt(math.factorial(r)) / (
            math.factorial(a) * math.factorial(b) * math.factorial(c)
        )
    return coef


def fermionic_sign(K: MomentumMultiset, split: Splitting) -> int:
    """Sign picked up when reordering ``prod_k b_{X(k),k}`` into A, B, C block order.

    The product runs over ``K`` in ascending momentum; within each block the
    canonical order is ascending too, so the sign is the parity of the number
    of pairs ``k < k'`` whose blocks appear in descending order.
    """
    if not K.is_fermionic:
        raise MultisetError(f"fermionic state cannot repeat a momentum: {K}")
    _check_partition(K, split)
    rank = {}
    for block, sub in enumerate((split.K_A, split.K_B, split.K_C)):
        for k in sub.momenta:
            rank[k] = block
    seq = [rank[k] for k in K.momenta]
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


# ---------------------------------------------------------------------------
# momentum expressions that may depend on L


_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div)


def _eval_expr(node, L):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body, L)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Fraction(node.value)
    if isinstance(node, ast.Name) and node.id == "L":
        if L is None:
            raise MultisetError("momentum depends on L but no chain length is given")
        return Fraction(L)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_expr(node.operand, L)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
        lhs, rhs = _eval_expr(node.left, L), _eval_expr(node.right, L)
        if isinstance(node.op, ast.Add):
            return lhs + rhs
        if isinstance(node.op, ast.Sub):
            return lhs - rhs
        if isinstance(node.op, ast.Mult):
            return lhs * rhs
        if rhs == 0:
            raise MultisetError("division by zero in momentum expression")
        return lhs / rhs
    raise MultisetError(f"unsupported momentum expression element: {ast.dump(node)}")


@dataclass(frozen=True)
class MomentumTerm:
    expr: str
    multiplicity: int = 1

    def _tree(self) -> ast.Expression:
        text = self.expr.replace(" ", "")
        # allow "3L/4" as shorthand for "3*L/4"
        for d in "0123456789":
            text = text.replace(f"{d}L", f"{d}*L")
        try:
            return ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise MultisetError(f"cannot parse momentum {self.expr!r}") from exc

    @property
    def depends_on_L(self) -> bool:
        return any(isinstance(n, ast.Name) for n in ast.walk(self._tree()))

    def exact(self, L: int | None) -> Fraction:
        return _eval_expr(self._tree(), L)

    def value(self, L: int | None) -> int:
        v = self.exact(L)
        if v.denominator != 1:
            raise MultisetError(f"momentum {self.expr!r} is not an integer at L={L}")
        return int(v)

    def __str__(self) -> str:
        return self.expr if self.multiplicity == 1 else f"{self.expr}^{self.multiplicity}"


@dataclass(frozen=True)
class MomentumSpec:
    """Unresolved momentum content, e.g. ``"1,L/4"``."""

    terms: tuple[MomentumTerm, ...]

    @classmethod
    def parse(cls, text: str) -> "MomentumSpec":
        text = text.strip()
        if not text:
            return cls(())
        terms = []
        for raw in text.split(","):
            raw = raw.strip()
            if not raw:
                raise MultisetError(f"empty term in momentum list {text!r}")
            expr, caret, mult = raw.partition("^")
            try:
                r = int(mult) if caret else 1
            except ValueError:
                raise MultisetError(f"bad multiplicity in {raw!r}") from None
            if r < 1:
                raise MultisetError(f"multiplicity must be positive in {raw!r}")
            term = MomentumTerm(expr.strip(), r)
            term.exact(64)  # syntax check with a dummy L
            terms.append(term)
        return cls(tuple(terms))

    @property
    def depends_on_L(self) -> bool:
        return any(t.depends_on_L for t in self.terms)

    def resolve(self, L: int | None) -> MomentumMultiset:
        """Evaluate at chain length ``L``; momenta are reduced to ``1..L``."""
        counts: Counter = Counter()
        for t in self.terms:
            k = t.value(L)
            if L is not None:
                k = (k - 1) % L + 1
            counts[k] += t.multiplicity
        return MomentumMultiset.from_counts(counts)

    @property
    def particle_count(self) -> int:
        return sum(t.multiplicity for t in self.terms)

    def __str__(self) -> str:
        return ",".join(str(t) for t in self.terms)
