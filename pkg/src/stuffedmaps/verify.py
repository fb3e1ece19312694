"""Exact residual checks for computed correlators.

Every check returns a :class:`ResidualReport`; ``passed`` means every retained
coefficient of the residual is exactly zero.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import factorial, prod
from typing import Iterable

from .errors import CapExceeded, StuffedMapsError
from .oracle import DEFAULT_CAP, stuffed_series
from .series import GradedSeries, WeightSpec
from .spectral import cylinder_residual, disk_residual
from .toprec import TopRec, is_stable, labels_for, set_partitions, _compositions
from .zforms import ZForm, local_expand, local_valuation_bound


@dataclass
class ResidualReport:
    equation: str
    n: int
    g: int
    passed: bool
    residual: object = None
    first_failure: dict | None = None
    spec: str = ""
    skipped: list = field(default_factory=list)
    checked: int = 0

    def to_record(self) -> dict:
        return {
            "equation": self.equation,
            "spec": self.spec,
            "n": self.n,
            "g": self.g,
            "passed": self.passed,
            "checked": self.checked,
            "skipped": [list(s) if isinstance(s, tuple) else s for s in self.skipped],
            "first_failure": self.first_failure,
        }


def _first_series_failure(s: GradedSeries) -> dict | None:
    for mono, c in s.sorted_terms():
        return {"monomial": mono.cells and [[c_.h, list(c_.perimeters)] for c_ in mono.cells] or [],
                "upow": mono.upow, "coeff": str(c)}
    return None


def _first_form_failure(f: ZForm) -> dict | None:
    if f.pairs:
        name, v = sorted(f.pairs.items())[0]
        return {"kernel": name, **(_first_series_failure(v) or {})}
    for key in sorted(f.terms, key=repr):
        return {"pole": [list(k) for k in key], **(_first_series_failure(f.terms[key]) or {})}
    return None


def _form_report(eq: str, n: int, g: int, residual: ZForm, spec: WeightSpec) -> ResidualReport:
    zero = residual.is_zero()
    return ResidualReport(eq, n, g, zero, residual, None if zero else _first_form_failure(residual), spec.label(),
                          checked=1)


# linear loop equation

def linear_loop_check(engine: TopRec, n: int, g: int) -> ResidualReport:
    """S_z omega + O_z omega + d_z V = 0 in the first variable (O-tilde for (1,0))."""
    if (n, g) == (1, 0):
        res = disk_residual(engine.disk, engine.op)
    elif (n, g) == (2, 0):
        res = cylinder_residual(engine.cyl, engine.op)
    else:
        w = engine.omega(n, g)
        res = w.op_S("z1") + engine.op.apply_O(w, "z1") + engine.dV(n, g)
    return _form_report("linear_loop", n, g, res.truncate(engine.D), engine.spec)


# quadratic loop equation

def _shifted(engine: TopRec, n: int, g: int, first: str, spectators: tuple, iota: bool) -> ZForm:
    """omega-breve (omega20 = B + C) with the first variable renamed and optionally pulled back by iota."""
    labs = labels_for(n)
    f = engine.omega(n, g).rename({labs[0]: first, **dict(zip(labs[1:], spectators))})
    return f.iota(first) if iota else f


def quadratic_terms(engine: TopRec, n: int, g: int) -> list[tuple[ZForm, ...]]:
    I = labels_for(n)[1:]
    out: list[tuple[ZForm, ...]] = []
    if g >= 1:
        L = labels_for(n + 1)
        f = engine.omega(n + 1, g - 1).rename({L[0]: "z", L[1]: "w", **dict(zip(L[2:], I))})
        out.append((f.iota("w").restrict_diagonal("z", "w"),))
    for r in range(len(I) + 1):
        for J in combinations(I, r):
            rest = tuple(l for l in I if l not in J)
            for f in range(g + 1):
                a, b = (len(J) + 1, f), (n - len(J), g - f)
                if not all(is_stable(*x) or x in ((1, 0), (2, 0)) for x in (a, b)):
                    continue
                out.append((_shifted(engine, *a, "z", J, False), _shifted(engine, *b, "z", rest, True)))
    return out


def quadratic_local(engine: TopRec, terms: list[tuple[ZForm, ...]], alpha: int, order: int = 1) -> dict[int, ZForm]:
    """Coefficients of s**m, m <= order, of the quadratic differential at z = alpha + s."""
    acc: dict[int, ZForm] = {}
    for factors in terms:
        vs = [local_valuation_bound(f, "z", alpha) for f in factors]
        loc = None
        for f, v in zip(factors, vs):
            lf = local_expand(f, "z", alpha, order - (sum(vs) - v))
            loc = lf if loc is None else loc.mul(lf)
        for m, c in loc.coeffs.items():
            if m <= order:
                acc[m] = acc[m] + c.reorder(acc[m].labels) if m in acc else c
    return acc


def quadratic_loop_check(engine: TopRec, n: int, g: int, extra: list | None = None) -> ResidualReport:
    """Q_n^g has a double zero at z = +1 and z = -1."""
    terms = quadratic_terms(engine, n, g) + list(extra or [])
    bad = None
    residual = {}
    for alpha in (1, -1):
        loc = quadratic_local(engine, terms, alpha)
        for m in sorted(loc):
            c = loc[m].truncate(engine.D)
            if not c.is_zero():
                residual[(alpha, m)] = c
                if bad is None:
                    bad = {"point": alpha, "s_power": m, **(_first_form_failure(c) or {})}
    return ResidualReport("quadratic_loop", n, g, bad is None, residual, bad, engine.spec.label(), checked=2)


# Schwinger-Dyson equations in moment space

SDE_TERMS = ("coincident", "bilinear", "derivative", "cells")


def _moment(engine: TopRec, n: int, g: int, ps: tuple) -> GradedSeries:
    if n < 1 or g < 0 or not (is_stable(n, g) or (n, g) in ((1, 0), (2, 0))):
        return GradedSeries({}, engine.D)
    if any(p < 0 for p in ps):
        return GradedSeries({}, engine.D)
    return engine.moment(n, g, ps)


def _cell_orderings(engine: TopRec):
    """(h, ordered perimeters, weight series) including the Gaussian term as h=0, [2], weight -1."""
    spec = engine.spec
    yield 0, (2,), GradedSeries.const(-1, engine.D)
    for cell in spec.weights:
        var = spec.var(cell)
        for order in cell.orderings():
            yield cell.h, order, var.scale(Fraction(1, factorial(cell.k - 1) * prod(order[1:])))


def sde_value(engine: TopRec, n: int, g: int, P: int, ls: tuple, drop: Iterable[str] = ()) -> GradedSeries:
    """Coefficient of x**-P prod x_i**-(l_i+1) of the Schwinger-Dyson equation at (n, g)."""
    drop = set(drop)
    D = engine.D
    tot = GradedSeries({}, D)
    k_spect = len(ls)
    if "coincident" not in drop and g >= 1:
        for a in range(P - 1):
            tot = tot + _moment(engine, n + 1, g - 1, (a, P - 2 - a) + ls)
    if "bilinear" not in drop:
        idx = range(k_spect)
        for r in range(k_spect + 1):
            for J in combinations(idx, r):
                rest = tuple(i for i in idx if i not in J)
                for f in range(g + 1):
                    for a in range(P - 1):
                        x = _moment(engine, r + 1, f, (a,) + tuple(ls[i] for i in J))
                        if not x:
                            continue
                        tot = tot + x * _moment(engine, n - r, g - f, (P - 2 - a,) + tuple(ls[i] for i in rest))
    if "derivative" not in drop:
        for i, l in enumerate(ls):
            others = ls[:i] + ls[i + 1:]
            tot = tot + _moment(engine, n - 1, g, (l + P - 2,) + others).scale(l)
    if "cells" not in drop:
        for h, order, wt in _cell_orderings(engine):
            k = len(order)
            for part in set_partitions(list(range(k))):
                nb = len(part)
                fsum = g - h - k + nb
                if fsum < 0:
                    continue
                part = sorted(part, key=lambda b: 0 not in b)  # block with boundary 0 first
                for fs in _compositions(fsum, nb):
                    for assign in _assignments(k_spect, nb):
                        term = wt
                        for bi, block in enumerate(part):
                            ps = tuple(order[j] + (P - 2 if j == 0 else 0) for j in block)
                            ps += tuple(ls[i] for i, a in enumerate(assign) if a == bi)
                            term = term * _moment(engine, len(ps), fs[bi], ps)
                            if not term:
                                break
                        tot = tot + term
    return tot


def _assignments(k: int, nb: int):
    if k == 0:
        yield ()
        return
    from itertools import product
    yield from product(range(nb), repeat=k)


def sde_residual(engine: TopRec, n: int, g: int, pmax: int = 6, lmax: int = 3,
                 drop: Iterable[str] = ()) -> ResidualReport:
    """All SDE coefficients with 1 <= P <= pmax and spectator perimeters 1..lmax."""
    bad = None
    checked = 0
    worst = GradedSeries({}, engine.D)
    for P in range(1, pmax + 1):
        for ls in _nondecreasing(n - 1, 1, lmax):
            v = sde_value(engine, n, g, P, ls, drop)
            checked += 1
            if v and bad is None:
                worst = v
                bad = {"P": P, "perimeters": list(ls), **(_first_series_failure(v) or {})}
    return ResidualReport("sde", n, g, bad is None, worst, bad, engine.spec.label(), checked=checked)


def _nondecreasing(n: int, lo: int, hi: int):
    if n == 0:
        yield ()
        return
    for first in range(lo, hi + 1):
        for rest in _nondecreasing(n - 1, first, hi):
            yield (first,) + rest


# oracle comparison

def moment_table(engine: TopRec, n: int, g: int, lmax: int) -> dict[tuple, GradedSeries]:
    lo = 0 if n == 1 else 1
    return {(n, g, ps): engine.moment(n, g, ps) for ps in _nondecreasing(n, lo, lmax)}


def oracle_compare(table: dict[tuple, GradedSeries], spec: WeightSpec, cap: int | None = DEFAULT_CAP,
                   n: int = 0, g: int = 0) -> ResidualReport:
    """Every entry (n, g, perimeters) -> series must equal the oracle; entries over the cap are skipped."""
    skipped, checked, bad, diff = [], 0, None, None
    for key in sorted(table):
        nn, gg, ps = key
        try:
            want = stuffed_series(nn, gg, ps, spec, cap=cap)
        except CapExceeded:
            skipped.append((nn, gg, list(ps)))
            continue
        checked += 1
        d = table[key] - want
        if d and bad is None:
            diff = d
            bad = {"n": nn, "g": gg, "perimeters": list(ps), **(_first_series_failure(d) or {})}
    return ResidualReport("oracle", n, g, bad is None, diff, bad, spec.label(), skipped, checked)


# mutation helpers (harness self-tests)

def mutated_engine(engine: TopRec, n: int, g: int, delta: ZForm) -> TopRec:
    """Shallow copy of the engine with omega_n^g replaced by omega_n^g + delta."""
    other = copy.copy(engine)
    other.store = dict(engine.store)
    other._pm_cache = {}
    other.potentials = {}
    other.phis = {}
    other.store[(n, g)] = (engine.omega(n, g) + delta.reorder(engine.omega(n, g).labels)).truncate(engine.D)
    return other


def pole_mutation(engine: TopRec, n: int, g: int, point: int = 1, order: int = 1) -> ZForm:
    """t * (z1 - point)**-order dz1 tensored with (z_i - point)**-2 in the spectators."""
    f = ZForm.monomial("z1", (point, order), GradedSeries.u(2, trunc=engine.D))
    for lab in labels_for(n)[1:]:
        f = f.tensor(ZForm.monomial(lab, (point, 2)))
    return f


# standard suite

def standard_specs(truncation: int = 2) -> list[WeightSpec]:
    cells = [(0, [3]), (0, [4]), (0, [1, 1]), (0, [2, 2]), (1, [2]), (0, [1, 1, 2])]
    return [WeightSpec([], truncation)] + [WeightSpec.of(c, truncation=truncation) for c in cells]


def topologies(chi_max: int) -> list[tuple[int, int]]:
    out = [(1, 0), (2, 0)]
    for chi in range(1, chi_max + 1):
        for g in range(0, chi // 2 + 2):
            n = chi + 2 - 2 * g
            if n >= 1:
                out.append((n, g))
    return out


def run_checks(engine: TopRec, chi_max: int, oracle_lmax: int | None = None,
               cap: int | None = DEFAULT_CAP) -> list[ResidualReport]:
    engine.compute_all(chi_max)
    reports = []
    for n, g in topologies(chi_max):
        reports.append(sde_residual(engine, n, g))
        reports.append(linear_loop_check(engine, n, g))
        if is_stable(n, g):
            reports.append(quadratic_loop_check(engine, n, g))
            ok = engine.omega(n, g).pole_check({1, -1})
            reports.append(ResidualReport("pole_check", n, g, ok, None, None if ok else {"poles": "outside +-1"},
                                          engine.spec.label(), checked=1))
        if oracle_lmax is not None:
            reports.append(oracle_compare(moment_table(engine, n, g, oracle_lmax), engine.spec, cap, n, g))
    return reports


def standard_suite(truncation: int = 2, chi_max: int = 2, oracle_lmax: int | None = 4,
                   cap: int | None = DEFAULT_CAP) -> list[ResidualReport]:
    reports = []
    for spec in standard_specs(truncation):
        reports.extend(run_checks(TopRec(spec), chi_max, oracle_lmax, cap))
    return reports
