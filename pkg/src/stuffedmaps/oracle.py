"""Brute-force Gaussian ground truth.

Moments of traces of a GUE matrix with covariance <M_ij M_kl> = (t/N) d_il d_jk
are computed by Wick's theorem.  The result is a Laurent polynomial in N times
a power of u (t = u^2); it is stored as a dict ``(Npow, upow) -> Fraction``.

Stuffed-map coefficients are obtained by expanding the multi-trace measure to
the requested order in the cell weights, taking the joint Gaussian cumulant of
the boundary traces and the cell insertions, and reading off the genus from the
power of N.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Iterable, NamedTuple

from sympy.utilities.iterables import multiset_partitions

from .errors import CapExceeded, InconsistentGrading
from .series import CellWeightVar, GradedSeries, Monomial, WeightSpec, symmetry_count

DEFAULT_CAP = 16

NPoly = dict  # (Npow, upow) -> Fraction


def npoly_add(a: NPoly, b: NPoly) -> NPoly:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
        if not out[k]:
            del out[k]
    return out


def npoly_mul(a: NPoly, b: NPoly) -> NPoly:
    out: NPoly = {}
    for (n1, u1), c1 in a.items():
        for (n2, u2), c2 in b.items():
            key = (n1 + n2, u1 + u2)
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def npoly_scale(a: NPoly, c, npow: int = 0, upow: int = 0) -> NPoly:
    if not c:
        return {}
    return {(n + npow, u + upow): v * c for (n, u), v in a.items()}


def _check_cap(total: int, cap: int | None) -> None:
    if cap is not None and total > cap:
        raise CapExceeded(f"{total} half-edges exceed the oracle cap {cap}")


@lru_cache(maxsize=None)
def _moment_rec(word: tuple[int, ...]) -> tuple[tuple[int, Fraction], ...]:
    """<prod Tr M^l> as ((Npow, coeff), ...) with the t-power left implicit."""
    zeros = sum(1 for l in word if l == 0)
    word = tuple(sorted((l for l in word if l), reverse=True))
    if not word:
        return ((zeros, Fraction(1)),)
    if sum(word) % 2:
        return ()
    acc: dict[int, Fraction] = {}

    def push(sub: tuple[int, ...], mult: int) -> None:
        for npow, c in _moment_rec(tuple(sorted(sub))):
            acc[npow - 1] = acc.get(npow - 1, 0) + mult * c

    l1, rest = word[0], word[1:]
    # first half-edge of trace 1 paired inside trace 1
    for j in range(l1 - 1):
        push((j, l1 - 2 - j) + rest, 1)
    # paired with one of the l_i half-edges of another trace
    for i, li in enumerate(rest):
        push((l1 + li - 2,) + rest[:i] + rest[i + 1:], li)
    return tuple(sorted((n + zeros, c) for n, c in acc.items() if c))


def gue_moment(word: Iterable[int], cap: int | None = DEFAULT_CAP) -> NPoly:
    """Gaussian expectation of prod_i Tr M^{l_i}."""
    word = tuple(int(l) for l in word)
    if any(l < 0 for l in word):
        raise ValueError("trace powers must be nonnegative")
    _check_cap(sum(word), cap)
    upow = sum(word)
    return {(n, upow): c for n, c in _moment_rec(tuple(sorted(word)))}


def gue_moment_by_matchings(word: Iterable[int], cap: int | None = DEFAULT_CAP) -> NPoly:
    """Same as :func:`gue_moment`, by explicit enumeration of perfect matchings.

    Half-edges of trace i are cyclically ordered; a matching m contributes
    (t/N)^E N^F where F counts cycles of (cyclic successor) o m.
    """
    word = [int(l) for l in word]
    _check_cap(sum(word), cap)
    succ: list[int] = []
    start = 0
    for l in word:
        succ.extend(start + (j + 1) % l for j in range(l))
        start += l
    total = start
    zeros = sum(1 for l in word if l == 0)
    if total % 2:
        return {}
    acc: Counter = Counter()

    def faces(match: list[int]) -> int:
        seen = [False] * total
        count = 0
        for h in range(total):
            if not seen[h]:
                count += 1
                while not seen[h]:
                    seen[h] = True
                    h = succ[match[h]]
        return count

    def rec(match: list[int], free: list[int]) -> None:
        if not free:
            acc[faces(match)] += 1
            return
        a = free[0]
        for idx in range(1, len(free)):
            b = free[idx]
            match[a], match[b] = b, a
            rec(match, free[1:idx] + free[idx + 1:])
        match[a] = -1

    rec([-1] * total, list(range(total)))
    edges = total // 2
    return {(f + zeros - edges, total): Fraction(c) for f, c in acc.items()}


def set_partitions(items: list):
    """All set partitions of a list of distinct labels."""
    if not items:
        yield []
        return
    yield from multiset_partitions(list(items))


def cumulant_from_moments(n: int, moment) -> NPoly:
    """Joint cumulant of n variables from a block-moment oracle.

    ``moment(block)`` returns the NPoly moment of the product of the variables
    in ``block`` (a tuple of indices).
    """
    total: NPoly = {}
    for part in set_partitions(list(range(n))):
        r = len(part)
        term: NPoly = {(0, 0): Fraction((-1) ** (r - 1) * factorial(r - 1))}
        for block in part:
            term = npoly_mul(term, moment(tuple(block)))
            if not term:
                break
        total = npoly_add(total, term)
    return total


def gue_cumulant(word: Iterable[int], cap: int | None = DEFAULT_CAP) -> NPoly:
    """Connected Gaussian correlator of the traces in ``word``."""
    word = tuple(int(l) for l in word)
    _check_cap(sum(word), cap)
    return cumulant_from_moments(len(word), lambda b: gue_moment([word[i] for i in b], cap=None))


class OracleQuery(NamedTuple):
    n: int
    g: int
    perimeters: tuple[int, ...]
    monomial: tuple[CellWeightVar, ...] = ()


def _cell_atom(cell: CellWeightVar) -> tuple[NPoly, tuple[int, ...]]:
    """Prefactor (N/t)^{2-2h-k} * sym/k! / prod(l) and the trace word of one cell copy."""
    k = cell.k
    e = 2 - 2 * cell.h - k
    c = Fraction(symmetry_count(cell), factorial(k) * prod(cell.perimeters))
    return {(e, -2 * e): c}, cell.perimeters


def stuffed_correlator(perimeters: Iterable[int], monomial: Iterable[CellWeightVar] = (),
                       cap: int | None = DEFAULT_CAP) -> dict[int, tuple[int, Fraction]]:
    """Genus decomposition of the coefficient of ``monomial`` in W_n.

    Returns ``{g: (upow, coeff)}``; the coefficient of u^upow times the cell
    monomial in W_n^g(x_1..x_n) at prod x_j^{-(l_j+1)}.
    """
    perimeters = tuple(int(p) for p in perimeters)
    cells = tuple(sorted(monomial))
    n = len(perimeters)
    if n < 1:
        raise ValueError("need at least one boundary")
    _check_cap(sum(perimeters) + sum(sum(c.perimeters) for c in cells), cap)

    atoms: list[tuple[NPoly, tuple[int, ...]]] = [({(0, 0): Fraction(1)}, (p,)) for p in perimeters]
    atoms += [_cell_atom(c) for c in cells]

    def moment(block: tuple[int, ...]) -> NPoly:
        pref: NPoly = {(0, 0): Fraction(1)}
        word: list[int] = []
        for i in block:
            pref = npoly_mul(pref, atoms[i][0])
            word.extend(atoms[i][1])
        return npoly_mul(pref, gue_moment(word, cap=None))

    kappa = cumulant_from_moments(len(atoms), moment)
    sym = prod(factorial(m) for m in Counter(cells).values())
    out: dict[int, tuple[int, Fraction]] = {}
    for (p, q), c in kappa.items():
        if (2 - n - p) % 2:
            raise InconsistentGrading(f"N-power {p} has the wrong parity for n={n}")
        g = (2 - n - p) // 2
        if g < 0:
            raise InconsistentGrading(f"N-power {p} exceeds the planar bound for n={n}")
        if g in out:
            raise InconsistentGrading(f"two t-powers for genus {g}")
        out[g] = (q + 2 * p, c / sym)
    return out


def stuffed_coeff(q: OracleQuery, cap: int | None = DEFAULT_CAP) -> Fraction:
    """Coefficient of the cell monomial in W_n^g at prod x_j^{-(l_j+1)}.

    The u-power is forced by Euler counting; use :func:`stuffed_term` to get it.
    """
    return stuffed_term(q, cap)[1]


def stuffed_term(q: OracleQuery, cap: int | None = DEFAULT_CAP) -> tuple[int, Fraction]:
    if len(q.perimeters) != q.n:
        raise ValueError("perimeters must have length n")
    return stuffed_correlator(q.perimeters, q.monomial, cap).get(q.g, (0, Fraction(0)))


def stuffed_series(n: int, g: int, perimeters: Iterable[int], spec: WeightSpec,
                   cap: int | None = DEFAULT_CAP) -> GradedSeries:
    """Oracle value of a moment of W_n^g as a series in the active weights."""
    terms = {}
    for mono in spec.monomials():
        upow, c = stuffed_term(OracleQuery(n, g, tuple(perimeters), mono), cap)
        if c:
            terms[Monomial(mono, upow)] = c
    return GradedSeries(terms, spec.truncation)


def closed_derivative(cell: CellWeightVar, monomial: Iterable[CellWeightVar] = (),
                      cap: int | None = DEFAULT_CAP) -> dict[int, tuple[int, Fraction]]:
    """Genus decomposition of the coefficient of ``monomial`` in d log Z / d t^h_l.

    The derivative inserts one copy of the cell atom; the connected part with
    the expanded cells gives N**(2-2g) F^g.  Returns ``{g: (upow, coeff)}`` with
    the same t-bookkeeping as :func:`stuffed_correlator`.
    """
    cells = tuple(sorted(monomial))
    _check_cap(sum(cell.perimeters) + sum(sum(c.perimeters) for c in cells), cap)
    atoms = [_cell_atom(cell)] + [_cell_atom(c) for c in cells]

    def moment(block: tuple[int, ...]) -> NPoly:
        pref: NPoly = {(0, 0): Fraction(1)}
        word: list[int] = []
        for i in block:
            pref = npoly_mul(pref, atoms[i][0])
            word.extend(atoms[i][1])
        return npoly_mul(pref, gue_moment(word, cap=None))

    kappa = cumulant_from_moments(len(atoms), moment)
    sym = prod(factorial(m) for m in Counter(cells).values())
    out: dict[int, tuple[int, Fraction]] = {}
    for (p, q), c in kappa.items():
        if p % 2 or p > 2:
            raise InconsistentGrading(f"N-power {p} impossible for a closed surface")
        g = (2 - p) // 2
        if g in out:
            raise InconsistentGrading(f"two t-powers for genus {g}")
        out[g] = (q + 2 * p, c / sym)
    return out


def closed_derivative_series(g: int, cell: CellWeightVar, spec: WeightSpec,
                             cap: int | None = DEFAULT_CAP) -> GradedSeries:
    """Oracle value of dF^g / d t^h_l as a series in the active weights."""
    terms = {}
    for mono in spec.monomials():
        upow, c = closed_derivative(cell, mono, cap).get(g, (0, Fraction(0)))
        if c:
            terms[Monomial(mono, upow)] = c
    return GradedSeries(terms, spec.truncation)


class InducedWeight(NamedTuple):
    """One induced weight t^h_l = coeff * alpha^alpha_pow * gamma^gamma_pow * u^upow."""

    cell: CellWeightVar
    coeff: Fraction
    alpha_pow: int
    gamma_pow: int
    upow: int


def induced_moments(alpha_order: int, cap: int | None = DEFAULT_CAP) -> dict[tuple[int, ...], NPoly]:
    """Check-T_l = alpha^{sum l} <prod Tr M2^{l_i}>_c for a Gaussian second matrix.

    Keys are sorted perimeter tuples with sum(l) <= alpha_order; the alpha power
    equals sum(l) and is left implicit.  Vanishing cumulants are omitted.
    """
    _check_cap(alpha_order, cap)
    out: dict[tuple[int, ...], NPoly] = {}
    for total in range(1, alpha_order + 1):
        for part in _integer_partitions(total):
            kappa = gue_cumulant(part, cap=None)
            if kappa:
                out[tuple(sorted(part))] = kappa
    return out


def induce_weights(alpha_order: int, cap: int | None = DEFAULT_CAP) -> list[InducedWeight]:
    """Cell weights of the multi-trace model induced by a Gaussian second matrix.

    Matching sum_h (N/t)^{2-2h-k} t^h_l = gamma^k * check-T_l gives
    t^h_l = gamma^k [N^{2-2h-k}] check-T_l * t^{2-2h-k}.
    """
    out = []
    for perims, kappa in induced_moments(alpha_order, cap).items():
        k = len(perims)
        for (p, upow), c in sorted(kappa.items()):
            if (2 - k - p) % 2 or 2 - k - p < 0:
                raise InconsistentGrading(f"N-power {p} impossible for a {k}-boundary cell")
            h = (2 - k - p) // 2
            out.append(InducedWeight(CellWeightVar.make(h, perims), c, sum(perims), k, upow + 2 * p))
    return out


def induced_spec(alpha_order: int, alpha, gamma, truncation: int = 1,
                 cap: int | None = DEFAULT_CAP) -> WeightSpec:
    """WeightSpec of the induced weights, with numeric values for given alpha, gamma."""
    ws = induce_weights(alpha_order, cap)
    values = {w.cell: (w.coeff * Fraction(alpha) ** w.alpha_pow * Fraction(gamma) ** w.gamma_pow, w.upow)
              for w in ws}
    return WeightSpec([w.cell for w in ws], truncation, values)


def _integer_partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _integer_partitions(n - first, first):
            yield (first,) + rest
