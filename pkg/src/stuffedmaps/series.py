"""Truncated multivariate formal series over exact rationals.

The formal variables are the weights of elementary 2-cells
(:class:`CellWeightVar`) and ``u``, a square root of the vertex weight
``t = u**2``.  Series are graded by the number of cell factors in a monomial
("cell degree") and truncated above a fixed degree ``D``.  The exponent of
``u`` is not truncated; it may be negative because quantities written in the
Zhukovsky coordinate carry inverse powers of the cut half-width.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import factorial, prod
from typing import Iterable, Mapping, NamedTuple

from .errors import NonUnit, TruncationExceeded


class CellWeightVar(NamedTuple):
    """Weight ``t^h_{l_1...l_k}`` of an elementary 2-cell.

    Perimeters are stored sorted, which is the canonical representative of the
    symmetric weight.
    """

    h: int
    perimeters: tuple[int, ...]

    @classmethod
    def make(cls, h: int, perimeters: Iterable[int]) -> "CellWeightVar":
        perims = tuple(sorted(int(p) for p in perimeters))
        if not perims:
            raise ValueError("a cell needs at least one boundary")
        if any(p < 1 for p in perims):
            raise ValueError(f"perimeters must be positive, got {perims}")
        if h < 0:
            raise ValueError(f"cell genus must be nonnegative, got {h}")
        return cls(int(h), perims)

    @property
    def k(self) -> int:
        return len(self.perimeters)

    def orderings(self) -> list[tuple[int, ...]]:
        """Distinct orderings of the perimeters (terms of the symmetric sum)."""
        return sorted(set(permutations(self.perimeters)))

    def label(self) -> str:
        return f"t{self.h}_" + ",".join(map(str, self.perimeters))


class Monomial(NamedTuple):
    """A product of cell weights (with repetition) times ``u**upow``."""

    cells: tuple[CellWeightVar, ...] = ()
    upow: int = 0

    @property
    def degree(self) -> int:
        return len(self.cells)

    def sort_key(self):
        return (len(self.cells), self.cells, self.upow)


ONE = Monomial((), 0)

Number = int | Fraction


def _as_fraction(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


def _min_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class GradedSeries:
    """Finite map Monomial -> Fraction, truncated at cell degree ``trunc``.

    ``trunc=None`` marks an exact (untruncated) element, used for constants
    and polynomials; combining with a truncated series takes the minimum.
    Instances are treated as immutable.
    """

    __slots__ = ("terms", "trunc")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None, trunc: int | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c and (trunc is None or len(m.cells) <= trunc):
                    clean[m] = _as_fraction(c)
        self.terms = clean
        self.trunc = trunc

    @classmethod
    def _raw(cls, terms: dict, trunc: int | None) -> "GradedSeries":
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.trunc = trunc
        return obj

    # construction helpers
    @classmethod
    def const(cls, c: Number, trunc: int | None = None) -> "GradedSeries":
        return cls({ONE: c}, trunc)

    @classmethod
    def u(cls, power: int = 1, coeff: Number = 1, trunc: int | None = None) -> "GradedSeries":
        return cls({Monomial((), power): coeff}, trunc)

    @classmethod
    def var(cls, cell: CellWeightVar, trunc: int | None = None, upow: int = 0) -> "GradedSeries":
        return cls({Monomial((cell,), upow): 1}, trunc)

    @classmethod
    def coerce(cls, x) -> "GradedSeries":
        if isinstance(x, GradedSeries):
            return x
        return cls.const(x)

    # inspection
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coeff(self, m: Monomial) -> Fraction:
        if self.trunc is not None and m.degree > self.trunc:
            raise TruncationExceeded(f"degree {m.degree} > truncation {self.trunc}")
        return self.terms.get(m, Fraction(0))

    def degree_part(self, d: int) -> "GradedSeries":
        return GradedSeries._raw({m: c for m, c in self.terms.items() if len(m.cells) == d}, self.trunc)

    def min_degree(self) -> int | None:
        return min((len(m.cells) for m in self.terms), default=None)

    def truncate(self, d: int | None) -> "GradedSeries":
        t = _min_trunc(self.trunc, d)
        if t is None:
            return self
        return GradedSeries._raw({m: c for m, c in self.terms.items() if len(m.cells) <= t}, t)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda mc: mc[0].sort_key())

    # ring operations
    def __add__(self, other) -> "GradedSeries":
        other = GradedSeries.coerce(other)
        t = _min_trunc(self.trunc, other.trunc)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v += c
                if v:
                    out[m] = v
                else:
                    del out[m]
        if t is not None and (t != self.trunc or t != other.trunc):
            out = {m: c for m, c in out.items() if len(m.cells) <= t}
        return GradedSeries._raw(out, t)

    __radd__ = __add__

    def __neg__(self) -> "GradedSeries":
        return GradedSeries._raw({m: -c for m, c in self.terms.items()}, self.trunc)

    def __sub__(self, other) -> "GradedSeries":
        return self + (-GradedSeries.coerce(other))

    def __rsub__(self, other) -> "GradedSeries":
        return GradedSeries.coerce(other) + (-self)

    def scale(self, c: Number) -> "GradedSeries":
        if not c:
            return GradedSeries._raw({}, self.trunc)
        c = _as_fraction(c)
        return GradedSeries._raw({m: v * c for m, v in self.terms.items()}, self.trunc)

    def shift_u(self, k: int) -> "GradedSeries":
        """Multiply by ``u**k``."""
        if k == 0:
            return self
        return GradedSeries._raw({Monomial(m.cells, m.upow + k): c for m, c in self.terms.items()}, self.trunc)

    def __mul__(self, other) -> "GradedSeries":
        if not isinstance(other, GradedSeries):
            return self.scale(other)
        t = _min_trunc(self.trunc, other.trunc)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            d1 = len(m1.cells)
            for m2, c2 in other.terms.items():
                if t is not None and d1 + len(m2.cells) > t:
                    continue
                if not m2.cells:
                    cells = m1.cells
                elif not m1.cells:
                    cells = m2.cells
                else:
                    cells = tuple(sorted(m1.cells + m2.cells))
                key = Monomial(cells, m1.upow + m2.upow)
                v = out.get(key)
                out[key] = c1 * c2 if v is None else v + c1 * c2
        return GradedSeries._raw({m: c for m, c in out.items() if c}, t)

    def __rmul__(self, other) -> "GradedSeries":
        return self.scale(other)

    def __pow__(self, n: int) -> "GradedSeries":
        if n < 0:
            return self.invert() ** (-n)
        result = GradedSeries.const(1, self.trunc)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedSeries):
            try:
                other = GradedSeries.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        t = _min_trunc(self.trunc, other.trunc)
        a = self.truncate(t).terms
        b = other.truncate(t).terms
        return a == b

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def _leading_unit(self) -> tuple[Fraction, int, "GradedSeries"]:
        """Split ``self = c * u**k * (1 + r)`` with ``r`` of cell degree >= 1."""
        lead = [(m, c) for m, c in self.terms.items() if not m.cells]
        if len(lead) != 1:
            raise NonUnit("cell-degree-0 part must be a single nonzero monomial c*u^k")
        (m0, c0), = lead
        rest = GradedSeries._raw({m: c for m, c in self.terms.items() if m.cells}, self.trunc)
        r = rest.shift_u(-m0.upow).scale(1 / c0)
        return c0, m0.upow, r

    def invert(self) -> "GradedSeries":
        """Multiplicative inverse up to truncation."""
        c0, k, r = self._leading_unit()
        t = self.trunc
        if t is None:
            if r:
                raise NonUnit("cannot invert an untruncated series with cell terms")
            return GradedSeries.u(-k, 1 / c0)
        total = GradedSeries.const(1, t)
        term = GradedSeries.const(1, t)
        neg_r = -r
        for _ in range(t):
            term = term * neg_r
            if not term:
                break
            total = total + term
        return total.shift_u(-k).scale(1 / c0)

    def sqrt_one_plus(self) -> "GradedSeries":
        """Square root of ``1 + self``; requires a vanishing degree-0 part."""
        if any(not m.cells for m in self.terms):
            raise ValueError("sqrt_one_plus needs an argument with zero cell-degree-0 part")
        t = self.trunc
        total = GradedSeries.const(1, t)
        if t is None:
            if self.terms:
                raise ValueError("cannot take a square root of an untruncated series")
            return total
        term = GradedSeries.const(1, t)
        coef = Fraction(1)
        for j in range(1, t + 1):
            coef = coef * (Fraction(1, 2) - (j - 1)) / j
            term = term * self
            if not term:
                break
            total = total + term.scale(coef)
        return total

    def specialize(self, values: Mapping[CellWeightVar, tuple[Number, int]]) -> "GradedSeries":
        """Substitute cell weights by ``coeff * u**upow``; the result is untruncated."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            kept: list[CellWeightVar] = []
            upow = m.upow
            for cell in m.cells:
                if cell in values:
                    v, p = values[cell]
                    c = c * _as_fraction(v)
                    upow += p
                else:
                    kept.append(cell)
            if not c:
                continue
            key = Monomial(tuple(kept), upow)
            out[key] = out.get(key, Fraction(0)) + c
        return GradedSeries({m: c for m, c in out.items() if c}, None)

    # presentation
    def to_records(self) -> list[dict]:
        return [
            {
                "monomial": {"cells": [[v.h, list(v.perimeters)] for v in m.cells], "upow": m.upow},
                "coeff": f"{c.numerator}/{c.denominator}",
            }
            for m, c in self.sorted_terms()
        ]

    @classmethod
    def from_records(cls, records: list[dict], trunc: int | None = None) -> "GradedSeries":
        terms = {}
        for rec in records:
            mono = rec["monomial"]
            cells = tuple(sorted(CellWeightVar.make(h, p) for h, p in mono["cells"]))
            terms[Monomial(cells, int(mono["upow"]))] = Fraction(rec["coeff"])
        return cls(terms, trunc)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [str(c)]
            factors += [v.label() for v in m.cells]
            if m.upow:
                factors.append(f"u^{m.upow}")
            parts.append("*".join(factors))
        return " + ".join(parts)


def add(a: GradedSeries, b: GradedSeries) -> GradedSeries:
    return a + b


def mul(a: GradedSeries, b: GradedSeries) -> GradedSeries:
    return a * b


def invert(a: GradedSeries) -> GradedSeries:
    return a.invert()


def sqrt_one_plus(a: GradedSeries) -> GradedSeries:
    return a.sqrt_one_plus()


def coeff(a: GradedSeries, m: Monomial) -> Fraction:
    return a.coeff(m)


class WeightSpec:
    """The model: a finite list of active cell weights and a truncation degree.

    ``values`` optionally maps some weights to ``(rational, upow)`` for
    specializing finished results; the solvers always treat active weights
    as formal variables.
    """

    def __init__(self, weights: Iterable[CellWeightVar] = (), truncation: int = 2,
                 values: Mapping[CellWeightVar, tuple[Number, int]] | None = None):
        ws = list(weights)
        if len(set(ws)) != len(ws):
            raise ValueError("active weights must be pairwise distinct")
        if truncation < 0:
            raise ValueError("truncation must be >= 0")
        self.weights: tuple[CellWeightVar, ...] = tuple(sorted(ws))
        self.truncation = int(truncation)
        self.values = dict(values or {})

    @classmethod
    def of(cls, *cells: tuple[int, Iterable[int]], truncation: int = 2) -> "WeightSpec":
        return cls([CellWeightVar.make(h, p) for h, p in cells], truncation)

    def var(self, cell: CellWeightVar) -> GradedSeries:
        return GradedSeries.var(cell, self.truncation)

    def one(self) -> GradedSeries:
        return GradedSeries.const(1, self.truncation)

    def zero(self) -> GradedSeries:
        return GradedSeries({}, self.truncation)

    def cells(self, h: int | None = None, k: int | None = None) -> list[CellWeightVar]:
        return [c for c in self.weights if (h is None or c.h == h) and (k is None or c.k == k)]

    def max_perimeter(self) -> int:
        return max((max(c.perimeters) for c in self.weights), default=0)

    def monomials(self, max_degree: int | None = None) -> list[tuple[CellWeightVar, ...]]:
        """All cell multisets of degree <= max_degree (default: truncation)."""
        d = self.truncation if max_degree is None else max_degree
        out: list[tuple[CellWeightVar, ...]] = [()]
        frontier: list[tuple[CellWeightVar, ...]] = [()]
        for _ in range(d):
            nxt = []
            for mono in frontier:
                start = self.weights.index(mono[-1]) if mono else 0
                for w in self.weights[start:]:
                    nxt.append(mono + (w,))
            out.extend(nxt)
            frontier = nxt
        return out

    def label(self) -> str:
        return "{" + ", ".join(c.label() for c in self.weights) + "}"

    def __repr__(self) -> str:
        return f"WeightSpec({self.label()}, D={self.truncation})"


def symmetry_count(cell: CellWeightVar) -> int:
    """Number of distinct orderings of the cell's perimeters."""
    counts: dict[int, int] = {}
    for p in cell.perimeters:
        counts[p] = counts.get(p, 0) + 1
    return factorial(cell.k) // prod(factorial(c) for c in counts.values())
