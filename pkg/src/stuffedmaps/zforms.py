"""Rational functions and forms of the Zhukovsky variable.

A one-variable rational function with poles in {0, +1, -1, oo} is stored in
partial-fraction normal form over the basis

    (0, k)  ->  z**k           (k any integer)
    (p, j)  ->  (z - p)**(-j)  (p = +1 or -1, j >= 1)

with :class:`GradedSeries` coefficients.  Several variables are handled as
finite sums of tensor products of basis elements; each variable carries a
label.  A two-variable object may in addition carry the two non-separable
kernels

    B(z1, z2) = dz1 dz2 / (z1 - z2)**2,    J(z1, z2) = dz1 dz2 / (1 - z1 z2)**2,

with J = -iota_1^* B.  Whether a variable carries a differential is not
tracked: callers say so when pulling back by iota.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Iterable, Mapping

from .errors import ResidueObstruction
from .series import GradedSeries

Key = tuple[int, int]
ONE_KEY: Key = (0, 0)
POINTS = (1, -1)


def gbinom(k: int, n: int) -> Fraction:
    """Generalized binomial coefficient k(k-1)...(k-n+1)/n! for any integer k."""
    num = 1
    for i in range(n):
        num *= k - i
    return Fraction(num, factorial(n))


def _acc(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _combine(*parts: tuple[Fraction, Mapping[Key, Fraction]]) -> dict[Key, Fraction]:
    out: dict[Key, Fraction] = {}
    for c, d in parts:
        for k, v in d.items():
            _acc(out, k, c * v)
    return out


@lru_cache(maxsize=None)
def _bmul(a: Key, b: Key) -> tuple[tuple[Key, Fraction], ...]:
    if (b[0] == 0, b) > (a[0] == 0, a):
        a, b = b, a
    pa, ia = a
    pb, ib = b
    if pa == 0 and pb == 0:
        return (((0, ia + ib), Fraction(1)),)
    if pa == 0:
        # z**m * (z - p)**(-j)
        m, p, j = ia, pb, ib
        if m == 0:
            return ((b, Fraction(1)),)
        lower = (p, j - 1) if j > 1 else ONE_KEY
        if m > 0:
            # z = (z - p) + p
            rest = (0, m - 1)
            out = _combine((Fraction(1), basis_mul(rest, lower)), (Fraction(p), basis_mul(rest, b)))
        else:
            # 1/(z (z - p)) = (1/p) (1/(z - p) - 1/z)
            up = (0, m + 1)
            out = _combine((Fraction(1, p), basis_mul(up, b)),
                           (Fraction(-1, p), basis_mul((0, m), lower)))
        return tuple(sorted(out.items()))
    if pa == pb:
        return (((pa, ia + ib), Fraction(1)),)
    # 1/((z - p)(z - q)) = (1/(p - q)) (1/(z - p) - 1/(z - q))
    p, i, q, j = pa, ia, pb, ib
    a1 = (p, i - 1) if i > 1 else ONE_KEY
    b1 = (q, j - 1) if j > 1 else ONE_KEY
    c = Fraction(1, p - q)
    out = _combine((c, basis_mul(a, b1)), (-c, basis_mul(a1, b)))
    return tuple(sorted(out.items()))


def basis_mul(a: Key, b: Key) -> dict[Key, Fraction]:
    """Product of two basis elements in normal form."""
    return dict(_bmul(a, b))


@lru_cache(maxsize=None)
def _biota(key: Key, form: bool) -> tuple[tuple[Key, Fraction], ...]:
    p, j = key
    if p == 0:
        out = {(0, -j): Fraction(1)}
    else:
        # (1/z - p)**(-j) = (-p)**(-j) z**j (z - p)**(-j)   since 1/p = p
        out = {k: v * Fraction(-p) ** j for k, v in basis_mul((0, j), key).items()}
    if form:
        jac: dict[Key, Fraction] = {}
        for k, v in out.items():
            for k2, c in basis_mul(k, (0, -2)).items():
                _acc(jac, k2, -v * c)
        out = jac
    return tuple(sorted(out.items()))


def basis_iota(key: Key, form: bool) -> dict[Key, Fraction]:
    """Pullback of a basis element by z -> 1/z (with Jacobian -1/z**2 for forms)."""
    return dict(_biota(key, form))


def basis_deriv(key: Key) -> dict[Key, Fraction]:
    p, j = key
    if p == 0:
        return {(0, j - 1): Fraction(j)} if j else {}
    return {(p, j + 1): Fraction(-j)}


def basis_prim(key: Key) -> dict[Key, Fraction]:
    """Rational primitive; raises on logarithmic terms."""
    p, j = key
    if p == 0:
        if j == -1:
            raise ResidueObstruction("dz/z has no rational primitive")
        return {(0, j + 1): Fraction(1, j + 1)}
    if j == 1:
        raise ResidueObstruction(f"dz/(z - {p}) has no rational primitive")
    return {(p, j - 1): Fraction(-1, j - 1)}


def basis_eval(key: Key, z: Fraction) -> Fraction:
    p, j = key
    if p == 0:
        return Fraction(z) ** j
    return Fraction(z - p) ** (-j)


def basis_local(key: Key, alpha: int, order: int) -> dict[int, Fraction]:
    """Expansion of a basis element in s = z - alpha, powers <= order."""
    p, j = key
    if p == 0:
        return {n: gbinom(j, n) * Fraction(alpha) ** (j - n) for n in range(0, order + 1)
                if gbinom(j, n)}
    if p == alpha:
        return {-j: Fraction(1)} if -j <= order else {}
    two = Fraction(2 * alpha)
    return {n: two ** (-j) * gbinom(-j, n) / two ** n for n in range(0, order + 1)}


def basis_local_valuation(key: Key, alpha: int) -> int:
    p, j = key
    return -j if p == alpha else 0


def basis_at_infinity(key: Key, order: int) -> dict[int, Fraction]:
    """Expansion at z = oo as {power: coeff}, powers >= -order."""
    p, j = key
    if p == 0:
        return {j: Fraction(1)} if j >= -order else {}
    return {-j - n: Fraction(comb(n + j - 1, j - 1) * p ** n) for n in range(0, order - j + 1)}


def _is_principal(key: Key) -> bool:
    return key[0] != 0 or key[1] < 0


def _residue_weight(key: Key, point) -> int:
    if point == 0:
        return 1 if key == (0, -1) else 0
    if point in POINTS:
        return 1 if key == (point, 1) else 0
    if point == "inf":
        return -1 if key in ((0, -1), (1, 1), (-1, 1)) else 0
    raise ValueError(f"unknown point {point!r}")


def _series_zero(trunc) -> GradedSeries:
    return GradedSeries({}, trunc)


class ZForm:
    """Finite sum of tensor products of basis elements with series coefficients.

    ``labels`` names the variables, ``terms`` maps tuples of keys (aligned
    with ``labels``) to nonzero GradedSeries, ``pairs`` holds the
    coefficients of the B and J kernels (two variables only).
    """

    __slots__ = ("labels", "terms", "pairs")

    def __init__(self, labels: Iterable, terms: Mapping | None = None, pairs: Mapping | None = None):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels {self.labels}")
        self.terms: dict[tuple[Key, ...], GradedSeries] = {}
        for k, v in (terms or {}).items():
            if len(k) != len(self.labels):
                raise ValueError("key arity does not match labels")
            v = GradedSeries.coerce(v)
            if v:
                self.terms[tuple(k)] = v
        self.pairs: dict[str, GradedSeries] = {}
        for name, v in (pairs or {}).items():
            if name not in ("B", "J"):
                raise ValueError(f"unknown kernel {name}")
            v = GradedSeries.coerce(v)
            if v:
                if len(self.labels) != 2:
                    raise ValueError("B/J kernels need exactly two variables")
                self.pairs[name] = v

    # construction
    @classmethod
    def zero(cls, labels: Iterable = ()) -> "ZForm":
        return cls(labels)

    @classmethod
    def scalar(cls, c) -> "ZForm":
        return cls((), {(): GradedSeries.coerce(c)})

    @classmethod
    def one_var(cls, label, coeffs: Mapping[Key, object]) -> "ZForm":
        return cls((label,), {(k,): v for k, v in coeffs.items()})

    @classmethod
    def monomial(cls, label, key: Key, c=1) -> "ZForm":
        return cls((label,), {(key,): c})

    @classmethod
    def kernel(cls, a, b, name: str, c=1) -> "ZForm":
        return cls((a, b), pairs={name: c})

    # inspection
    @property
    def nvars(self) -> int:
        return len(self.labels)

    def is_zero(self) -> bool:
        return not self.terms and not self.pairs

    def __bool__(self) -> bool:
        return not self.is_zero()

    def value(self) -> GradedSeries:
        """The coefficient of a zero-variable form."""
        if self.labels:
            raise ValueError("value() needs a zero-variable form")
        v = self.terms.get(())
        return v if v is not None else GradedSeries({})

    def coeffs(self) -> dict[Key, GradedSeries]:
        """One-variable view key -> series."""
        if self.nvars != 1 or self.pairs:
            raise ValueError("coeffs() needs a separable one-variable form")
        return {k[0]: v for k, v in self.terms.items()}

    def coeff(self, *keys: Key) -> GradedSeries:
        return self.terms.get(tuple(keys), GradedSeries({}))

    def min_degree(self) -> int | None:
        ds = [v.min_degree() for v in list(self.terms.values()) + list(self.pairs.values())]
        ds = [d for d in ds if d is not None]
        return min(ds, default=None)

    def _index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no variable {label!r} in {self.labels}") from None

    # label management
    def reorder(self, labels: Iterable) -> "ZForm":
        labels = tuple(labels)
        if labels == self.labels:
            return self
        if sorted(map(repr, labels)) != sorted(map(repr, self.labels)):
            raise ValueError(f"cannot reorder {self.labels} as {labels}")
        perm = [self._index(l) for l in labels]
        terms = {tuple(k[i] for i in perm): v for k, v in self.terms.items()}
        return ZForm(labels, terms, self.pairs)

    def rename(self, mapping: Mapping) -> "ZForm":
        return ZForm(tuple(mapping.get(l, l) for l in self.labels), self.terms, self.pairs)

    # linear structure
    def _aligned(self, other: "ZForm") -> "ZForm":
        return other if other.labels == self.labels else other.reorder(self.labels)

    def __add__(self, other: "ZForm") -> "ZForm":
        if not self.labels and self.is_zero():
            return other
        if not other.labels and other.is_zero():
            return self
        other = self._aligned(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            w = terms.get(k)
            terms[k] = v if w is None else w + v
        pairs = dict(self.pairs)
        for k, v in other.pairs.items():
            w = pairs.get(k)
            pairs[k] = v if w is None else w + v
        return ZForm(self.labels, terms, pairs)

    def __neg__(self) -> "ZForm":
        return ZForm(self.labels, {k: -v for k, v in self.terms.items()},
                     {k: -v for k, v in self.pairs.items()})

    def __sub__(self, other: "ZForm") -> "ZForm":
        return self + (-other)

    def scale(self, c) -> "ZForm":
        if isinstance(c, GradedSeries):
            return ZForm(self.labels, {k: v * c for k, v in self.terms.items()},
                         {k: v * c for k, v in self.pairs.items()})
        c = Fraction(c)
        return ZForm(self.labels, {k: v.scale(c) for k, v in self.terms.items()},
                     {k: v.scale(c) for k, v in self.pairs.items()})

    def truncate(self, d: int | None) -> "ZForm":
        return ZForm(self.labels, {k: v.truncate(d) for k, v in self.terms.items()},
                     {k: v.truncate(d) for k, v in self.pairs.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZForm):
            return NotImplemented
        if set(self.labels) != set(other.labels):
            return (self - ZForm(self.labels)).is_zero() and other.is_zero() and not self.terms
        return (self - other.reorder(self.labels)).is_zero()

    __hash__ = None

    # products
    def tensor(self, other: "ZForm") -> "ZForm":
        """Product of forms in disjoint variable sets."""
        if set(self.labels) & set(other.labels):
            raise ValueError(f"tensor needs disjoint labels: {self.labels} {other.labels}")
        if (self.pairs and other.labels) or (other.pairs and self.labels):
            raise NotImplementedError("B/J kernels cannot be tensored with further variables")
        labels = self.labels + other.labels
        terms: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                p = v1 * v2
                if p:
                    key = k1 + k2
                    w = terms.get(key)
                    terms[key] = p if w is None else w + p
        pairs: dict = {}
        if self.pairs:
            c = other.value()
            pairs = {k: v * c for k, v in self.pairs.items()}
        elif other.pairs:
            c = self.value()
            pairs = {k: v * c for k, v in other.pairs.items()}
        return ZForm(labels, terms, pairs)

    def map_var(self, label, fn: Callable[[Key], Mapping[Key, Fraction]]) -> "ZForm":
        """Apply a linear map on the basis of one variable (separable part only)."""
        i = self._index(label)
        cache: dict[Key, Mapping[Key, Fraction]] = {}
        acc: dict[tuple, dict] = {}
        for key, v in self.terms.items():
            img = cache.get(key[i])
            if img is None:
                img = cache[key[i]] = fn(key[i])
            for k2, c in img.items():
                nk = key[:i] + (k2,) + key[i + 1:]
                acc.setdefault(nk, []).append(v.scale(c))
        terms = {}
        for nk, vs in acc.items():
            s = vs[0]
            for v in vs[1:]:
                s = s + v
            terms[nk] = s
        return ZForm(self.labels, terms)

    def mul_var(self, label, f: "ZForm") -> "ZForm":
        """Multiply by a one-variable separable form f in the variable ``label``."""
        if f.nvars != 1 or f.pairs:
            raise ValueError("mul_var needs a separable one-variable factor")
        if self.pairs:
            raise NotImplementedError("cannot multiply B/J kernels by functions")
        i = self._index(label)
        fc = f.coeffs()
        acc: dict = {}
        for key, v in self.terms.items():
            for fk, fv in fc.items():
                prod_v = v * fv
                if not prod_v:
                    continue
                for k2, c in basis_mul(key[i], fk).items():
                    nk = key[:i] + (k2,) + key[i + 1:]
                    w = acc.get(nk)
                    acc[nk] = prod_v.scale(c) if w is None else w + prod_v.scale(c)
        return ZForm(self.labels, acc)

    def __mul__(self, other: "ZForm") -> "ZForm":
        """Product of one-variable forms in the same variable (or scalars)."""
        if isinstance(other, (GradedSeries, int, Fraction)):
            return self.scale(other)
        if not self.labels:
            return other.scale(self.value())
        if not other.labels:
            return self.scale(other.value())
        if self.nvars == 1 and other.nvars == 1 and self.labels == other.labels:
            return self.mul_var(self.labels[0], other)
        raise ValueError("use tensor() or mul_var() for multi-variable products")

    def restrict_diagonal(self, keep, drop) -> "ZForm":
        """Set variable ``drop`` equal to ``keep`` and multiply the factors."""
        i, j = self._index(keep), self._index(drop)
        out_labels = tuple(l for l in self.labels if l != drop)
        acc: dict = {}
        for key, v in self.terms.items():
            for k2, c in basis_mul(key[i], key[j]).items():
                nk = tuple(k2 if l == keep else key[self.labels.index(l)] for l in out_labels)
                w = acc.get(nk)
                acc[nk] = v.scale(c) if w is None else w + v.scale(c)
        out = ZForm(out_labels, acc)
        if self.pairs:
            if "B" in self.pairs:
                raise ValueError("B(z, z) is singular on the diagonal")
            # J(z, z) = 1/(1 - z**2)**2 = 1/((z - 1)**2 (z + 1)**2)
            jz = ZForm.one_var(keep, basis_mul((1, 2), (-1, 2)))
            out = out + jz.scale(self.pairs["J"])
        return out

    # involution and boundary operators
    def iota(self, label, form: bool = True) -> "ZForm":
        """Pullback by z -> 1/z in one variable."""
        out = self.map_var(label, lambda k: basis_iota(k, form))
        if self.pairs:
            if not form:
                raise ValueError("B/J kernels are forms in both variables")
            # iota^* B = -J, iota^* J = -B in either variable
            swapped = {"J" if k == "B" else "B": -v for k, v in self.pairs.items()}
            out = ZForm(self.labels, out.terms, swapped)
        return out

    def op_S(self, label, form: bool = True) -> "ZForm":
        return self + self.iota(label, form)

    def op_Delta(self, label, form: bool = True) -> "ZForm":
        return self - self.iota(label, form)

    def d(self, label) -> "ZForm":
        if self.pairs:
            raise NotImplementedError("derivative of B/J kernels")
        return self.map_var(label, basis_deriv)

    def primitive(self, label) -> "ZForm":
        if self.pairs:
            raise NotImplementedError("primitive of B/J kernels")
        return self.map_var(label, basis_prim)

    def part(self, label, which: str) -> "ZForm":
        """'principal': poles inside |z| <= 1 (negative powers and +-1 poles); 'poly': z**k, k >= 0."""
        want_principal = which == "principal"
        if which not in ("principal", "poly"):
            raise ValueError(which)
        if self.pairs:
            raise NotImplementedError("parts of B/J kernels")
        return self.map_var(label, lambda k: {k: Fraction(1)} if _is_principal(k) == want_principal else {})

    def power_band(self, label, lo: int | None = None, hi: int | None = None) -> "ZForm":
        """Keep only z**k terms with lo <= k <= hi in one variable (poles at +-1 dropped)."""
        def keep(k: Key):
            if k[0] != 0:
                return {}
            if (lo is not None and k[1] < lo) or (hi is not None and k[1] > hi):
                return {}
            return {k: Fraction(1)}
        return self.map_var(label, keep)

    # residues and contour integrals
    def residue(self, label, point) -> "ZForm":
        """Residue in one variable at 0, +1, -1 or 'inf'; removes that variable."""
        if self.pairs:
            raise NotImplementedError("residues of B/J kernels need a pairing")
        return self._contract(label, lambda k: _residue_weight(k, point))

    def contour(self, label) -> "ZForm":
        """(1/2 pi i) times the integral over |z| = 1 + eps (other variables outside)."""
        return self.pair(label, ZForm.monomial(label, ONE_KEY))

    def _contract(self, label, weight: Callable[[Key], object]) -> "ZForm":
        i = self._index(label)
        out_labels = self.labels[:i] + self.labels[i + 1:]
        acc: dict = {}
        cache: dict = {}
        for key, v in self.terms.items():
            w = cache.get(key[i])
            if w is None:
                w = cache[key[i]] = weight(key[i])
            if not w:
                continue
            nk = key[:i] + key[i + 1:]
            add = v * w if isinstance(w, GradedSeries) else v.scale(w)
            prev = acc.get(nk)
            acc[nk] = add if prev is None else prev + add
        return ZForm(out_labels, acc)

    def pair(self, label, f: "ZForm") -> "ZForm":
        """Contour integral over |z| = 1 + eps in ``label`` of f(z) times self.

        f is a one-variable function of the same label.  Kernels are handled
        with the other variable outside the contour:
        oint f B(., w) = -d f_principal(w),  oint f J(., w) = -iota^* d f_poly (w).
        """
        fc = f.coeffs()
        if not fc:
            return ZForm(tuple(l for l in self.labels if l != label))

        def weight(key: Key):
            tot = None
            for fk, fv in fc.items():
                r = sum((c for k2, c in basis_mul(key, fk).items()
                         if k2 in ((0, -1), (1, 1), (-1, 1))), Fraction(0))
                if r:
                    tot = fv.scale(r) if tot is None else tot + fv.scale(r)
            return tot if tot is not None else 0

        out = self._contract(label, weight)
        if self.pairs:
            other = [l for l in self.labels if l != label][0]
            fo = f.rename({label: other})
            if "B" in self.pairs:
                out = out + (-fo.part(other, "principal").d(other)).scale(self.pairs["B"])
            if "J" in self.pairs:
                out = out + (-fo.part(other, "poly").d(other).iota(other, True)).scale(self.pairs["J"])
        return out

    # expansions and checks
    def at_infinity(self, label, order: int) -> dict[int, "ZForm"]:
        """Expansion at z = oo in one variable: {power: coefficient form}."""
        if self.pairs:
            raise NotImplementedError("expansion of B/J kernels")
        i = self._index(label)
        rest = self.labels[:i] + self.labels[i + 1:]
        acc: dict[int, dict] = {}
        for key, v in self.terms.items():
            for pw, c in basis_at_infinity(key[i], order).items():
                nk = key[:i] + key[i + 1:]
                bucket = acc.setdefault(pw, {})
                prev = bucket.get(nk)
                bucket[nk] = v.scale(c) if prev is None else prev + v.scale(c)
        return {pw: ZForm(rest, b) for pw, b in acc.items()}

    def poles(self, label) -> set:
        """Points where the form has a pole in one variable: subset of {0, 1, -1, 'inf'}."""
        i = self._index(label)
        pts = set()
        for key in self.terms:
            p, j = key[i]
            if p:
                pts.add(p)
            elif j < 0:
                pts.add(0)
            elif j > 0:
                pts.add("inf")
        return pts

    def pole_check(self, allowed: Iterable, form: bool = True) -> bool:
        """True iff in every variable all poles on |z| >= 1 - eps lie in ``allowed``.

        The points examined are +1, -1 and oo; for a form, dz has a double
        pole at oo, so z**k dz is regular there iff k <= -2.
        """
        allowed = set(allowed)
        for label in self.labels:
            i = self._index(label)
            for key in self.terms:
                p, j = key[i]
                if p and p not in allowed:
                    return False
                if p == 0 and "inf" not in allowed and j > (-2 if form else 0):
                    return False
        if self.pairs and "diagonal" not in allowed:
            return False
        return True

    def evaluate(self, values: Mapping) -> "ZForm":
        """Substitute rational values for some variables (coefficients of dz for forms)."""
        out = self
        if self.pairs:
            raise NotImplementedError("evaluate B/J kernels via evaluate_kernels")
        for label, z in values.items():
            z = Fraction(z)
            out = out._contract(label, lambda k, z=z: basis_eval(k, z))
        return out

    # serialization
    def to_json(self) -> dict:
        def key_json(k: Key):
            return ["z", k[1]] if k[0] == 0 else [k[0], k[1]]
        return {
            "labels": [str(l) for l in self.labels],
            "terms": [{"basis": [key_json(k) for k in key], "series": v.to_records()}
                      for key, v in sorted(self.terms.items())],
            "kernels": [{"name": n, "series": v.to_records()} for n, v in sorted(self.pairs.items())],
        }

    def to_zrational_json(self) -> dict:
        """One-variable layout {poly: [[power, series]], poles: [[point, order, series]]}."""
        c = self.coeffs()
        return {
            "poly": [[k[1], v.to_records()] for k, v in sorted(c.items()) if k[0] == 0],
            "poles": [[k[0], k[1], v.to_records()] for k, v in sorted(c.items()) if k[0] != 0],
        }

    def __repr__(self) -> str:
        parts = []
        for key, v in sorted(self.terms.items()):
            fs = []
            for l, (p, j) in zip(self.labels, key):
                fs.append(f"{l}^{j}" if p == 0 else f"({l}{'-' if p > 0 else '+'}1)^-{j}")
            parts.append(f"({v})*" + "*".join(fs))
        for n, v in self.pairs.items():
            parts.append(f"({v})*{n}{self.labels}")
        return " + ".join(parts) if parts else f"0[{','.join(map(str, self.labels))}]"


def laurent(label, coeffs: Mapping[int, object]) -> ZForm:
    """One-variable Laurent polynomial sum c_k z**k."""
    return ZForm.one_var(label, {(0, k): v for k, v in coeffs.items()})


def bergman(a, b, c=1) -> ZForm:
    return ZForm.kernel(a, b, "B", c)


# local expansions at the branch points

class LocalSeries:
    """Laurent expansion in s = z - alpha with ZForm coefficients, powers <= ``order``."""

    __slots__ = ("alpha", "coeffs", "order", "labels")

    def __init__(self, alpha: int, coeffs: Mapping[int, ZForm], order: int, labels: Iterable = ()):
        self.alpha = alpha
        self.order = order
        self.labels = tuple(labels)
        self.coeffs = {n: c for n, c in coeffs.items() if n <= order and not c.is_zero()}

    def valuation(self) -> int | None:
        return min(self.coeffs, default=None)

    def get(self, n: int) -> ZForm:
        return self.coeffs.get(n, ZForm(self.labels))

    def __add__(self, other: "LocalSeries") -> "LocalSeries":
        order = min(self.order, other.order)
        labels = self.labels if self.coeffs or not other.coeffs else other.labels
        out = {}
        for n in set(self.coeffs) | set(other.coeffs):
            if n > order:
                continue
            if n in self.coeffs and n in other.coeffs:
                out[n] = self.coeffs[n] + other.coeffs[n]
            else:
                out[n] = self.coeffs.get(n) or other.coeffs[n]
        return LocalSeries(self.alpha, out, order, labels)

    def __neg__(self) -> "LocalSeries":
        return LocalSeries(self.alpha, {n: -c for n, c in self.coeffs.items()}, self.order, self.labels)

    def scale(self, c) -> "LocalSeries":
        return LocalSeries(self.alpha, {n: v.scale(c) for n, v in self.coeffs.items()}, self.order, self.labels)

    def mul(self, other: "LocalSeries") -> "LocalSeries":
        """Product; coefficient forms are tensored (disjoint spectator labels)."""
        v1 = self.valuation()
        v2 = other.valuation()
        labels = self.labels + other.labels
        if v1 is None or v2 is None:
            order = min(self.order + (v2 if v2 is not None else 0), other.order + (v1 if v1 is not None else 0))
            return LocalSeries(self.alpha, {}, order, labels)
        order = min(self.order + v2, other.order + v1)
        out: dict[int, ZForm] = {}
        for n1, c1 in self.coeffs.items():
            for n2, c2 in other.coeffs.items():
                n = n1 + n2
                if n > order:
                    continue
                t = c1.tensor(c2)
                out[n] = t if n not in out else out[n] + t
        return LocalSeries(self.alpha, out, order, labels)

    def residue(self) -> ZForm:
        if self.order < -1:
            raise ValueError("expansion too short for a residue")
        return self.get(-1)


def local_expand(f: ZForm, label, alpha: int, order: int) -> LocalSeries:
    """Expansion of f in s = z_label - alpha; other variables become coefficients.

    B(z, w) and J(z, w) are expanded with w a spectator away from alpha:
    1/(z - w)**2 = sum (n+1) s**n (w - alpha)**(-n-2),
    1/(1 - z w)**2 = sum (n+1) s**n w**n (1 - alpha w)**(-n-2).
    """
    i = f._index(label)
    rest = f.labels[:i] + f.labels[i + 1:]
    acc: dict[int, dict] = {}
    for key, v in f.terms.items():
        nk = key[:i] + key[i + 1:]
        for n, c in basis_local(key[i], alpha, order).items():
            bucket = acc.setdefault(n, {})
            prev = bucket.get(nk)
            bucket[nk] = v.scale(c) if prev is None else prev + v.scale(c)
    out = {n: ZForm(rest, b) for n, b in acc.items()}
    if f.pairs:
        (w,) = rest
        for n in range(0, order + 1):
            extra = ZForm((w,))
            if "B" in f.pairs:
                extra = extra + ZForm.monomial(w, (alpha, n + 2), f.pairs["B"].scale(n + 1))
            if "J" in f.pairs:
                # (1 - alpha w)**(-m) = (-alpha)**(-m) (w - alpha)**(-m)
                m = n + 2
                base = {k: c * Fraction(-alpha) ** (-m) * (n + 1) for k, c in basis_mul((0, n), (alpha, m)).items()}
                extra = extra + ZForm.one_var(w, base).scale(f.pairs["J"])
            if not extra.is_zero():
                out[n] = out[n] + extra if n in out else extra
    return LocalSeries(alpha, out, order, rest)


def local_valuation_bound(f: ZForm, label, alpha: int) -> int:
    i = f._index(label)
    v = min((basis_local_valuation(k[i], alpha) for k in f.terms), default=0)
    return min(v, 0)


def local_scalar_inverse(ls: LocalSeries) -> LocalSeries:
    """Inverse of a zero-variable local series with a unit leading coefficient."""
    if ls.labels:
        raise ValueError("only zero-variable series can be inverted")
    v = ls.valuation()
    if v is None:
        raise ZeroDivisionError("inverse of zero local series")
    n_terms = ls.order - v
    a = [ls.get(v + k).value() for k in range(n_terms + 1)]
    inv0 = a[0].invert()
    b = [inv0]
    for k in range(1, n_terms + 1):
        s = None
        for j in range(1, k + 1):
            if a[j]:
                term = a[j] * b[k - j]
                s = term if s is None else s + term
        b.append(-(s * inv0) if s is not None else GradedSeries({}, inv0.trunc))
    return LocalSeries(ls.alpha, {-v + k: ZForm.scalar(bk) for k, bk in enumerate(b)}, -v + n_terms)


def local_iota_param(alpha: int, order: int) -> LocalSeries:
    """w = 1/z - alpha as a series in s = z - alpha."""
    coeffs = {m: ZForm.scalar(Fraction((-1) ** m * alpha ** (m + 1))) for m in range(1, order + 1)}
    return LocalSeries(alpha, coeffs, order)


def local_power(ls: LocalSeries, n: int) -> LocalSeries:
    out = LocalSeries(ls.alpha, {0: ZForm.scalar(1)}, ls.order if n else 10 ** 9)
    for _ in range(n):
        out = out.mul(ls)
    return out


def contract(a: ZForm, b: ZForm, label) -> ZForm:
    """oint over |z| = 1 + eps of the product a*b in the shared variable ``label``.

    The remaining variables of a and b must be disjoint; kernels are not
    supported here.
    """
    if a.pairs or b.pairs:
        raise NotImplementedError("contract() does not handle B/J kernels")
    ia, ib = a._index(label), b._index(label)
    rest_a = a.labels[:ia] + a.labels[ia + 1:]
    rest_b = b.labels[:ib] + b.labels[ib + 1:]
    if set(rest_a) & set(rest_b):
        raise ValueError("contract() needs disjoint spectator labels")
    inside = ((0, -1), (1, 1), (-1, 1))
    acc: dict = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            r = sum((c for k2, c in basis_mul(ka[ia], kb[ib]).items() if k2 in inside), Fraction(0))
            if not r:
                continue
            nk = ka[:ia] + ka[ia + 1:] + kb[:ib] + kb[ib + 1:]
            v = (va * vb).scale(r)
            prev = acc.get(nk)
            acc[nk] = v if prev is None else prev + v
    return ZForm(rest_a + rest_b, acc)


def expand_at_infinity(f: ZForm, order: int) -> tuple[dict[int, GradedSeries], list[GradedSeries]]:
    """One-variable function at z = oo: ({k: c_k} for k > 0, [c_0, c_-1, ..., c_-order])."""
    (label,) = f.labels
    exp = f.at_infinity(label, order)
    trunc = None
    unbounded = {k: v.value() for k, v in sorted(exp.items()) if k > 0}
    zero = GradedSeries({}, trunc)
    bounded = [exp[-k].value() if -k in exp else zero for k in range(order + 1)]
    return unbounded, bounded
