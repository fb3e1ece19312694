"""Shifted topological recursion for stuffed maps.

Correlators are stored as forms in the labels z1..zn.  For (n, g) stable,

    omega_n^g(z1; zI) = Phi_n^g(z1; zI)
                        + sum_{a = +1, -1} Res_{z -> a} K(z1, z) E_n^g(z; zI)

with K = -(1/2) Delta_z G(z1, z) / Delta_z omega10(z) and
Phi_n^g(z1; zI) = oint_z omega20(z1, z) V_n^g(z; zI).  Residues are computed
from exact Laurent expansions at the branch points.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from math import factorial, prod
from typing import Iterable, NamedTuple

from sympy.utilities.iterables import multiset_partitions

from .errors import MissingDependency, PoleLeak
from .series import CellWeightVar, GradedSeries, WeightSpec
from .spectral import (CauchyKernel, CylinderSolution, DiskSolution, MasterOperator, build_operator,
                       check_simple_zero, solve_cylinder, solve_disk)
from .zforms import (LocalSeries, ZForm, basis_eval, bergman, contract, local_expand,
                     local_scalar_inverse, local_valuation_bound)


def labels_for(n: int) -> tuple[str, ...]:
    return tuple(f"z{i}" for i in range(1, n + 1))


def is_stable(n: int, g: int) -> bool:
    return 2 * g - 2 + n > 0


def set_partitions(items: list):
    if not items:
        yield []
        return
    yield from multiset_partitions(list(items))


class CorrelatorForm(NamedTuple):
    n: int
    g: int
    form: ZForm


class MomentKey(NamedTuple):
    n: int
    g: int
    perimeters: tuple[int, ...]


class TopRec:
    """Engine holding the disk, cylinder and kernel of one WeightSpec, and the computed correlators."""

    def __init__(self, spec: WeightSpec, disk: DiskSolution | None = None,
                 cylinder: CylinderSolution | None = None):
        self.spec = spec
        self.D = spec.truncation
        self.disk = disk if disk is not None else solve_disk(spec)
        self.op: MasterOperator = build_operator(spec, self.disk)
        self.cyl = cylinder if cylinder is not None else solve_cylinder(spec, self.disk, self.op)
        self.G = CauchyKernel(self.cyl, "z1", "z")
        self.store: dict[tuple[int, int], ZForm] = {
            (1, 0): self.disk.w10("z1"),
            (2, 0): self.cyl.omega20("z1", "z2"),
        }
        self.potentials: dict[tuple[int, int], ZForm] = {}
        self.phis: dict[tuple[int, int], ZForm] = {}
        self.trace: dict[tuple[int, int], set[tuple[int, int]]] = {}
        self._pm_cache: dict = {}
        self._kernel_cache: dict[int, LocalSeries] = {}

    # access
    def omega(self, n: int, g: int) -> ZForm:
        try:
            return self.store[(n, g)]
        except KeyError:
            raise MissingDependency(f"omega_{n}^{g} has not been computed") from None

    def W_form(self, n: int, g: int) -> ZForm:
        """Generating-series form: omega except for (2,0) where the Bergman part is replaced by J."""
        if (n, g) == (2, 0):
            return self.cyl.W20("z1", "z2")
        return self.omega(n, g)

    def _use(self, target, dep) -> None:
        if target is not None:
            self.trace.setdefault(target, set()).add(dep)

    def partial_moment(self, n: int, g: int, powers: tuple[int, ...], spectators: tuple, target=None) -> ZForm:
        """oint prod_j x(zeta_j)**powers_j W_n^g(zeta, z_spectators) over the first len(powers) variables."""
        if len(powers) + len(spectators) != n:
            raise ValueError("arity mismatch in partial moment")
        self._use(target, (n, g))
        key = (n, g, tuple(sorted(powers)), tuple(spectators))
        hit = self._pm_cache.get(key)
        if hit is not None:
            return hit
        form = self.W_form(n, g)
        labs = labels_for(n)
        for lab, p in zip(labs, sorted(powers)):
            form = form.pair(lab, self.disk.frame.x(lab, p))
        form = form.rename(dict(zip(labs[len(powers):], spectators)))
        self._pm_cache[key] = form
        return form

    def moment(self, n: int, g: int, perimeters: Iterable[int]) -> GradedSeries:
        perimeters = tuple(perimeters)
        return self.partial_moment(n, g, perimeters, ()).value()

    # potentials
    def potential(self, n: int, g: int) -> ZForm:
        """V_n^g(z; z2..zn): a function of z1 and a form in the spectators."""
        if (n, g) in self.potentials:
            return self.potentials[(n, g)]
        frame = self.disk.frame
        labs = labels_for(n)
        if (n, g) == (1, 0):
            f = frame.x("z1", 2).scale(Fraction(-1, 2))
            for cell in self.spec.cells(h=0, k=1):
                m = cell.perimeters[0]
                f = f + frame.x("z1", m).scale(self.spec.var(cell).scale(Fraction(1, m)))
            self.potentials[(n, g)] = f.truncate(self.D)
            return self.potentials[(n, g)]
        if (n, g) == (2, 0):
            raise ValueError("V_2^0 = -1/(x - x2) is not a separable form; use its differential")
        I = labs[1:]
        total = ZForm(labs)
        for cell in self.spec.weights:
            k, h = cell.k, cell.h
            var = self.spec.var(cell)
            for order in cell.orderings():
                pref = var.scale(Fraction(1, factorial(k - 1) * prod(order)))
                head = frame.x("z1", order[0])
                for part in set_partitions(list(range(1, k))):
                    nb = len(part)
                    fsum = g - h - (k - 1) + nb
                    if fsum < 0:
                        continue
                    if nb == 0:
                        if fsum == 0 and not I:
                            total = total + head.scale(pref)
                        continue
                    for fs in _compositions(fsum, nb):
                        for assign in iproduct(range(nb), repeat=len(I)):
                            blocks = []
                            skip = False
                            for bi, block in enumerate(part):
                                J = tuple(l for l, a in zip(I, assign) if a == bi)
                                nn, gg = len(block) + len(J), fs[bi]
                                if (nn, gg) == (n, g):
                                    skip = True  # the O W_n^g term is excluded
                                    break
                                if not (is_stable(nn, gg) or (nn, gg) in ((1, 0), (2, 0))):
                                    skip = True
                                    break
                                blocks.append((nn, gg, tuple(order[j] for j in block), J))
                            if skip:
                                continue
                            term = head.scale(pref)
                            for nn, gg, pw, J in blocks:
                                pm = self.partial_moment(nn, gg, pw, J, target=(n, g))
                                term = term.tensor(pm)
                                if term.is_zero():
                                    break
                            if not term.is_zero():
                                total = total + term.reorder(labs)
        total = total.truncate(self.D)
        self.potentials[(n, g)] = total
        return total

    def dV(self, n: int, g: int) -> ZForm:
        """d_{z1} V_n^g (for (2,0): -(B - J))."""
        if (n, g) == (2, 0):
            return -(bergman("z1", "z2") - ZForm.kernel("z1", "z2", "J"))
        return self.potential(n, g).d("z1")

    # shift
    def phi(self, n: int, g: int) -> ZForm:
        """Phi_n^g(z1; zI) = oint_z omega20(z1, z) V_n^g(z; zI), z1 outside the contour."""
        if (n, g) in self.phis:
            return self.phis[(n, g)]
        V = self.potential(n, g)
        labs = labels_for(n)
        # Bergman part: -d principal part of V in its first variable
        out = -(V.part("z1", "principal").d("z1"))
        Vz = V.rename({"z1": "z"})
        out = out + contract(self.cyl.C("z1", "z"), Vz, "z").reorder(labs)
        out = out.truncate(self.D)
        self.phis[(n, g)] = out
        return out

    # recursion kernel
    def Yxp(self, label="z") -> ZForm:
        """Y(z) x'(z) with Delta omega10 = Y dx."""
        return self.disk.Y(label) * self.disk.frame.dx(label)

    def kernel_local(self, alpha: int, order: int) -> LocalSeries:
        """K(z1, alpha + s) up to s**order."""
        cached = self._kernel_cache.get(alpha)
        if cached is not None and cached.order >= order:
            return cached
        den = local_expand(self.Yxp("z"), "z", alpha, order + 3)
        check_simple_zero(den.get(2).value(), alpha)
        inv = local_scalar_inverse(den)
        dg = self.G.local_delta(alpha, order + 2)
        K = dg.mul(inv).scale(Fraction(-1, 2))
        self._kernel_cache[alpha] = K
        return K

    def _local(self, form: ZForm, alpha: int, order: int) -> LocalSeries:
        return local_expand(form, "z", alpha, order)

    def _first_at(self, n: int, g: int, spectators: tuple, iota: bool, target) -> ZForm:
        """omega_n^g(z or iota z, spectators) as a form in z."""
        self._use(target, (n, g))
        labs = labels_for(n)
        f = self.omega(n, g).rename({labs[0]: "z", **dict(zip(labs[1:], spectators))})
        return f.iota("z") if iota else f

    def e_terms(self, n: int, g: int) -> list[tuple[ZForm, ...]]:
        """Factors of E_n^g(z; zI): a list of one- or two-factor products."""
        labs = labels_for(n)
        I = labs[1:]
        target = (n, g)
        terms: list[tuple[ZForm, ...]] = []
        if g >= 1:
            nn = n + 1
            self._use(target, (nn, g - 1))
            f = self.omega(nn, g - 1)
            L = labels_for(nn)
            f = f.rename({L[0]: "z", L[1]: "w", **dict(zip(L[2:], I))}).iota("w")
            terms.append((f.restrict_diagonal("z", "w"),))
        for r in range(len(I) + 1):
            for J in _subsets(I, r):
                rest = tuple(l for l in I if l not in J)
                for f in range(g + 1):
                    if (len(J), f) == (0, 0) or (len(J), f) == (len(I), g):
                        continue
                    a = (len(J) + 1, f)
                    b = (n - len(J), g - f)
                    if not (is_stable(*a) or a in ((1, 0), (2, 0))):
                        continue
                    if not (is_stable(*b) or b in ((1, 0), (2, 0))):
                        continue
                    terms.append((self._first_at(*a, J, False, target), self._first_at(*b, rest, True, target)))
        return terms

    def residue_with_kernel(self, n: int, g: int, terms: list[tuple[ZForm, ...]], alpha: int) -> ZForm:
        labs = labels_for(n)
        vK = -1
        total = ZForm(labs)
        plans = []
        max_k = -10 ** 9
        for factors in terms:
            vs = [local_valuation_bound(f, "z", alpha) for f in factors]
            ords = [-1 - vK - (sum(vs) - v) for v in vs]
            ok = -1 - sum(vs)
            plans.append((factors, ords, ok))
            max_k = max(max_k, ok)
        if not plans:
            return total
        K = self.kernel_local(alpha, max_k)
        for factors, ords, ok in plans:
            loc = None
            for f, o in zip(factors, ords):
                lf = self._local(f, alpha, o)
                loc = lf if loc is None else loc.mul(lf)
            Kt = LocalSeries(alpha, {m: c for m, c in K.coeffs.items() if m <= ok}, ok, K.labels)
            res = Kt.mul(loc).residue()
            if not res.is_zero():
                total = total + res.reorder(labs)
        return total

    def step(self, n: int, g: int) -> ZForm:
        """toprecStep: omega_n^g from lower topologies."""
        if not is_stable(n, g):
            raise ValueError(f"({n},{g}) is not stable")
        if (n, g) in self.store:
            return self.store[(n, g)]
        self.trace.setdefault((n, g), set())
        out = self.phi(n, g)
        terms = self.e_terms(n, g)
        for alpha in (1, -1):
            out = out + self.residue_with_kernel(n, g, terms, alpha)
        out = out.truncate(self.D)
        if not out.pole_check({1, -1}):
            raise PoleLeak(f"omega_{n}^{g} has poles outside +-1")
        self.store[(n, g)] = out
        return out

    def compute_all(self, chi_max: int) -> list[tuple[int, int]]:
        """All stable (n, g) with 2g - 2 + n <= chi_max, in increasing order."""
        done = []
        for chi in range(1, chi_max + 1):
            for g in range(0, (chi + 2) // 2 + 1):
                n = chi + 2 - 2 * g
                if n >= 1:
                    self.step(n, g)
                    done.append((n, g))
        return done

    def repsa(self, n: int, g: int) -> ZForm:
        """Phi_n^g - (1/4) sum_a Res_{z -> a} Delta_z G(z1, z) Delta_z omega_n^g(z, zI), from the stored omega."""
        labs = labels_for(n)
        dw = self.omega(n, g).rename({"z1": "z"}).op_Delta("z")
        out = self.phi(n, g)
        for alpha in (1, -1):
            v = local_valuation_bound(dw, "z", alpha)
            res = self.G.local_delta(alpha, -1 - v).mul(local_expand(dw, "z", alpha, -2)).residue()
            out = out + res.scale(Fraction(-1, 4)).reorder(labs)
        return out.truncate(self.D)


def _subsets(items: tuple, r: int):
    from itertools import combinations
    return combinations(items, r)


def _compositions(total: int, parts: int):
    """Tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def toprec_step(engine: TopRec, n: int, g: int) -> CorrelatorForm:
    return CorrelatorForm(n, g, engine.step(n, g))


def potential_vng(engine: TopRec, n: int, g: int) -> ZForm:
    return engine.potential(n, g)


def phi_shift(engine: TopRec, n: int, g: int) -> ZForm:
    return engine.phi(n, g)


# closed forms for Euler characteristic -1

def _pair_first_with_omega20(engine: TopRec, f: ZForm, label, out_label) -> ZForm:
    """oint_zeta omega20(out, zeta) f(zeta, ...) over ``label`` of f."""
    moved = f.rename({label: out_label})
    res = -(moved.part(out_label, "principal").d(out_label))
    g = f.rename({label: "zeta"})
    return res + contract(engine.cyl.C(out_label, "zeta"), g, "zeta").reorder(res.labels)


def phi11_direct(engine: TopRec) -> ZForm:
    """Phi_1^1 from the cell data: genus-1 cells glued to disks, and genus-0 cells with one cylinder."""
    spec, frame, D = engine.spec, engine.disk.frame, engine.D
    pot = ZForm(("zeta",))
    for cell in spec.weights:
        k = cell.k
        var = spec.var(cell)
        for order in cell.orderings():
            base = var.scale(Fraction(1, prod(order)))
            if cell.h == 1:
                c = base.scale(Fraction(1, factorial(k - 1)))
                for l in order[1:]:
                    c = c * engine.disk.moment(l)
                pot = pot + frame.x("zeta", order[0]).scale(c)
            elif cell.h == 0 and k >= 3:
                # choose the pair of boundaries glued to one cylinder: C(k-1, 2) unordered pairs
                c = base.scale(Fraction(1, 2 * factorial(k - 3)))
                for l in order[3:]:
                    c = c * engine.disk.moment(l)
                cyl = engine.partial_moment(2, 0, (order[1], order[2]), ()).value()
                pot = pot + frame.x("zeta", order[0]).scale(c * cyl)
    pot = pot.truncate(D)
    return _pair_first_with_omega20(engine, pot, "zeta", "z1").truncate(D)


def phi30_direct(engine: TopRec) -> ZForm:
    """Phi_3^0 from genus-0 cells with k >= 3 boundaries, three of them glued to cylinders."""
    spec, frame, D = engine.spec, engine.disk.frame, engine.D
    labs = labels_for(3)
    out = ZForm(labs)
    for cell in spec.cells(h=0):
        k = cell.k
        if k < 3:
            continue
        var = spec.var(cell)
        for order in cell.orderings():
            c = var.scale(Fraction(1, factorial(k - 3) * prod(order)))
            for l in order[3:]:
                c = c * engine.disk.moment(l)
            term = ZForm.scalar(c)
            for l, z in zip(order[:3], labs):
                f = frame.x("zeta", l)
                term = term.tensor(_pair_first_with_omega20(engine, f, "zeta", z))
            out = out + term.reorder(labs)
    return out.truncate(D)


def kernel_local_direct(engine: TopRec, alpha: int, order: int) -> LocalSeries:
    """K(z1, z) = (1/2) int_{iota z}^{z} omega20(z1, .) / (omega10(z) - omega10(iota z)).

    The integral is taken termwise on the local expansion of omega20 in the
    second variable, with iota z = alpha + w(s).
    """
    from .zforms import local_iota_param, local_power
    w20 = engine.cyl.omega20("z1", "z")
    loc = local_expand(w20, "z", alpha, order + 2)
    # primitive in s, then evaluate at s and at w(s)
    prim = {n + 1: c.scale(Fraction(1, n + 1)) for n, c in loc.coeffs.items()}
    if any(n <= 0 for n in prim):
        raise ValueError("omega20 is singular at the branch point")
    P = LocalSeries(alpha, prim, order + 3, ("z1",))
    w = local_iota_param(alpha, order + 3)
    acc = LocalSeries(alpha, {}, order + 3, ("z1",))
    wn = LocalSeries(alpha, {0: ZForm.scalar(1)}, order + 3)
    for m in range(1, order + 4):
        wn = wn.mul(w)
        c = P.get(m)
        if not c.is_zero():
            acc = acc + wn.mul(LocalSeries(alpha, {0: c}, order + 3, ("z1",)))
    integral = P + (-acc)
    den = local_expand(engine.Yxp("z"), "z", alpha, order + 3)
    inv = local_scalar_inverse(den)
    return integral.mul(inv).scale(Fraction(1, 2))


def omega11_closed(engine: TopRec) -> ZForm:
    """omega_1^1 = Phi_1^1 + sum Res K(z1, z) omega20(z, iota z), via independent kernel and shift."""
    D = engine.D
    diag = engine.cyl.omega20("z", "w").iota("w").restrict_diagonal("z", "w")
    out = phi11_direct(engine)
    for alpha in (1, -1):
        v = local_valuation_bound(diag, "z", alpha)
        K = kernel_local_direct(engine, alpha, -1 - v)
        e = local_expand(diag, "z", alpha, 0)
        out = out + K.mul(e).residue().reorder(("z1",))
    return out.truncate(D)


def omega30_closed(engine: TopRec) -> ZForm:
    """Phi_3^0 + sum_a prod_i omega20(a, zi) / (x''(a) y'(a)) with y = (W(iota z) - W(z))/2.

    omega20(a, .) is the dz-coefficient at z = a; x'' (a) y'(a) = -x''(a) Y'(a) / 2.
    """
    D = engine.D
    labs = labels_for(3)
    out = phi30_direct(engine)
    frame = engine.disk.frame
    Y = engine.disk.Y("z")
    xp = frame.dx("z")
    for alpha in (1, -1):
        x2 = local_expand(xp, "z", alpha, 1).get(1).value()
        y1 = local_expand(Y, "z", alpha, 1).get(1).value()
        check_simple_zero(x2 * y1, alpha)
        denom = (x2 * y1).invert().scale(-2)
        term = ZForm.scalar(denom)
        for zi in labs:
            term = term.tensor(omega20_at(engine, alpha, zi))
        out = out + term.reorder(labs)
    return out.truncate(D)


def omega20_at(engine: TopRec, alpha: int, label) -> ZForm:
    """dz-coefficient of omega20(z, label) evaluated at z = alpha, as a form in ``label``."""
    b = ZForm.monomial(label, (alpha, 2))  # 1/(alpha - w)**2 = (w - alpha)**-2
    c = engine.cyl.C("z", label).evaluate({"z": Fraction(alpha)})
    return b + c


# moments and closed-surface derivatives

def moment_extract(engine: TopRec, n: int, g: int, perimeters: Iterable[int]) -> GradedSeries:
    """Coefficient of prod x_j^{-(l_j+1)} in W_n^g."""
    return engine.moment(n, g, tuple(perimeters))


def moment_table(engine: TopRec, n: int, g: int, lmax: int) -> dict[MomentKey, GradedSeries]:
    """All moments of W_n^g with nondecreasing perimeters 0 < l <= lmax (l >= 0 for n = 1)."""
    out = {}
    lo = 0 if n == 1 else 1
    for ps in _nondecreasing(n, lo, lmax):
        out[MomentKey(n, g, ps)] = engine.moment(n, g, ps)
    return out


def _nondecreasing(n: int, lo: int, hi: int):
    if n == 0:
        yield ()
        return
    for first in range(lo, hi + 1):
        for rest in _nondecreasing(n - 1, first, hi):
            yield (first,) + rest


def fg_derivative(engine: TopRec, g: int, cell: CellWeightVar) -> GradedSeries:
    """(-1)^k Res...Res prod x_i^{m_i} dx_i sum_{K, f} prod W^{f_i}_{|K_i|}(x_{K_i}).

    Each residue at oo of x^m W dx contributes -[x^{-m-1}] W, so the result is the
    plain sum of products of moments.
    """
    k, h = cell.k, cell.h
    ms = cell.perimeters
    total = GradedSeries({}, engine.D)
    for part in set_partitions(list(range(k))):
        nb = len(part)
        fsum = g - h - k + nb
        if fsum < 0:
            continue
        for fs in _compositions(fsum, nb):
            term = GradedSeries.const(1, engine.D)
            for block, f in zip(part, fs):
                nn = len(block)
                if not (is_stable(nn, f) or (nn, f) in ((1, 0), (2, 0))):
                    term = None
                    break
                term = term * engine.moment(nn, f, tuple(ms[i] for i in block))
            if term is not None:
                total = total + term
    return total


def log_z_derivative(engine: TopRec, g: int, cell: CellWeightVar) -> GradedSeries:
    """dF^g / d t^h_m with the cell's Boltzmann normalization sym / (k! prod m) restored."""
    from .series import symmetry_count
    norm = Fraction(symmetry_count(cell), factorial(cell.k) * prod(cell.perimeters))
    return fg_derivative(engine, g, cell).scale(norm)
