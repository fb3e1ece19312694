"""Disk and cylinder solutions on the Zhukovsky plane.

The disk problem is solved as a one-cut usual-map problem with effective face
weights tau_m, iterated in the cell grading.  With x(z) = alpha + gamma(z + 1/z)
and Q(z) = x(z) - sum_m tau_m x(z)**(m-1), the resolvent on the physical sheet
is W(z) = sum_{j>=1} q_j z**-j where q_j are the coefficients of Q; the
endpoint conditions are q_0 = 0 and gamma q_1 = t.

The cylinder omega20 = B + C solves S_1 omega20 + O_1 omega20 = B - J with C a
Laurent polynomial in negative powers; it is obtained by iterating
C <- [-O_1(B + C)]_{z1 powers <= -2}.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import cached_property
from math import factorial, prod

from .errors import DegenerateBranchPoint, NonConvergence
from .series import CellWeightVar, GradedSeries, WeightSpec
from .zforms import (LocalSeries, ZForm, bergman, laurent, local_expand, local_iota_param,
                     local_power, local_scalar_inverse)


class ZhukovskyFrame:
    """x(z) = alpha + gamma (z + 1/z)."""

    def __init__(self, alpha: GradedSeries, gamma: GradedSeries):
        self.alpha = alpha
        self.gamma = gamma
        self._pow: dict[int, dict[int, GradedSeries]] = {0: {0: GradedSeries.const(1, gamma.trunc)}}

    @classmethod
    def gaussian(cls, truncation: int | None = None) -> "ZhukovskyFrame":
        return cls(GradedSeries({}, truncation), GradedSeries.u(1, trunc=truncation))

    def x_laurent(self, n: int = 1) -> dict[int, GradedSeries]:
        """Coefficients of x(z)**n as {power: series}."""
        if n not in self._pow:
            prev = self.x_laurent(n - 1)
            out: dict[int, GradedSeries] = {}
            step = {-1: self.gamma, 0: self.alpha, 1: self.gamma}
            for k, v in prev.items():
                for j, w in step.items():
                    if w:
                        p = v * w
                        out[k + j] = p if k + j not in out else out[k + j] + p
            self._pow[n] = {k: v for k, v in out.items() if v}
        return self._pow[n]

    def x(self, label="z", n: int = 1) -> ZForm:
        return laurent(label, self.x_laurent(n))

    def dx(self, label="z") -> ZForm:
        """gamma (1 - z**-2) dz."""
        return laurent(label, {0: self.gamma, -2: -self.gamma})

    def dx_power(self, label, n: int) -> ZForm:
        """d(x(z)**n)."""
        return self.x(label, n).d(label)

    def specialize_u(self):
        return self.alpha, self.gamma


def catalan(m: int) -> int:
    return factorial(2 * m) // (factorial(m) * factorial(m + 1))


def effective_weights(spec: WeightSpec, moments: dict[int, GradedSeries]) -> dict[int, GradedSeries]:
    """tau_m = t0_m + sum_{k>=2} 1/(k-1)! sum_{(m, m2..mk)} t0/(m2...mk) prod G_{mi}."""
    D = spec.truncation
    tau: dict[int, GradedSeries] = {}

    def add(m, v):
        tau[m] = v if m not in tau else tau[m] + v

    for cell in spec.cells(h=0):
        var = spec.var(cell)
        if cell.k == 1:
            add(cell.perimeters[0], var)
            continue
        for order in cell.orderings():
            m, rest = order[0], order[1:]
            c = GradedSeries.const(Fraction(1, factorial(cell.k - 1) * prod(rest)), D)
            for l in rest:
                c = c * moments[l]
            add(m, var * c)
    return {m: v for m, v in tau.items() if v}


class DiskSolution:
    """Planar one-boundary generating series on the Zhukovsky plane."""

    def __init__(self, spec: WeightSpec, frame: ZhukovskyFrame, tau: dict[int, GradedSeries],
                 resolvent: dict[int, GradedSeries], rounds: int):
        self.spec = spec
        self.frame = frame
        self.tau = tau
        self.resolvent = resolvent  # W(z) = sum_j resolvent[j] z**-j
        self.rounds = rounds
        self._moments: dict[int, GradedSeries] = {}

    @property
    def truncation(self) -> int:
        return self.spec.truncation

    def W(self, label="z") -> ZForm:
        return laurent(label, {-j: q for j, q in self.resolvent.items()})

    def w10(self, label="z") -> ZForm:
        """omega_1^0(z) = W(x(z)) dx(z)."""
        return self.W(label) * self.frame.dx(label)

    def moment(self, l: int) -> GradedSeries:
        """G_l: coefficient of x**-(l+1) in W_1^0."""
        if l not in self._moments:
            self._moments[l] = self.w10("z").pair("z", self.frame.x("z", l)).value()
        return self._moments[l]

    def moments(self, lmax: int) -> dict[int, GradedSeries]:
        return {l: self.moment(l) for l in range(lmax + 1)}

    def T10_derivative(self, label="z") -> ZForm:
        """d_z T_1^0(x(z)) with T_1^0(x) = -x**2/2 + sum_m t0_m x**m / m."""
        D = self.truncation
        f = self.frame.x(label, 1).scale(-1)
        for cell in self.spec.cells(h=0, k=1):
            m = cell.perimeters[0]
            f = f + self.frame.x(label, m - 1).scale(self.spec.var(cell))
        return f.truncate(D) * self.frame.dx(label)

    def Y(self, label="z") -> ZForm:
        """W(z) - W(1/z); Delta omega_1^0 = Y dx."""
        w = self.W(label)
        return w.op_Delta(label, form=False)


def _solve_frame(spec: WeightSpec, frame: ZhukovskyFrame, tau: dict[int, GradedSeries]):
    """One update of (alpha, gamma) from the endpoint conditions."""
    D = spec.truncation
    u = GradedSeries.u(1, trunc=D)
    q0 = GradedSeries({}, D)
    s1 = GradedSeries({}, D)
    for m, tm in tau.items():
        xl = frame.x_laurent(m - 1)
        if 0 in xl:
            q0 = q0 + tm * xl[0]
        if 1 in xl:
            s1 = s1 + tm * xl[1]
    alpha = q0
    # gamma**2 - gamma s1 = u**2 with gamma = u (1 + delta)
    ratio = (frame.gamma * s1).shift_u(-2)
    gamma = u * ratio.sqrt_one_plus()
    return ZhukovskyFrame(alpha, gamma)


def _resolvent(frame: ZhukovskyFrame, tau: dict[int, GradedSeries]) -> dict[int, GradedSeries]:
    q = dict(frame.x_laurent(1))
    for m, tm in tau.items():
        for k, v in frame.x_laurent(m - 1).items():
            q[k] = q.get(k, GradedSeries({})) - tm * v
    return {-k: v for k, v in q.items() if k < 0 and v}


def solve_disk(spec: WeightSpec, max_rounds: int | None = None) -> DiskSolution:
    """Graded fixed point for the endpoints, resolvent and effective weights."""
    D = spec.truncation
    lmax = spec.max_perimeter()
    frame = ZhukovskyFrame.gaussian(D)
    tau: dict[int, GradedSeries] = {}
    disk = DiskSolution(spec, frame, tau, _resolvent(frame, tau), 0)
    limit = (D + 3) if max_rounds is None else max_rounds
    prev = None
    for rnd in range(1, limit + 1):
        G = disk.moments(lmax)
        tau = effective_weights(spec, G)
        frame = _solve_frame(spec, disk.frame, tau)
        disk = DiskSolution(spec, frame, tau, _resolvent(frame, tau), rnd)
        state = (frame.alpha, frame.gamma, tuple(sorted(disk.resolvent.items(), key=lambda kv: kv[0])),
                 tuple(sorted(tau.items())))
        if prev is not None and _same_state(prev, state):
            return disk
        prev = state
    raise NonConvergence(f"disk fixed point did not stabilize in {limit} rounds")


def _same_state(a, b) -> bool:
    if a[0] != b[0] or a[1] != b[1]:
        return False
    for x, y in ((a[2], b[2]), (a[3], b[3])):
        dx, dy = dict(x), dict(y)
        if set(dx) != set(dy) or any(dx[k] != dy[k] for k in dx):
            return False
    return True


class MasterOperator:
    """The linear operators O (1/(k-2)!) and O-tilde (1/(k-1)!) built from h = 0 cells, k >= 2.

    Kernel data: for each (l1, l2) the series coefficient of
    d(x(z)**l1) (x) oint x(zeta)**l2 phi(zeta), summed over cells and the
    remaining perimeters (which are glued to disks, giving moments G).
    """

    def __init__(self, spec: WeightSpec, disk: DiskSolution):
        self.spec = spec
        self.disk = disk
        self.kernel = self._kernel(tilde=False)
        self.kernel_tilde = self._kernel(tilde=True)

    def _kernel(self, tilde: bool) -> dict[tuple[int, int], GradedSeries]:
        D = self.spec.truncation
        out: dict[tuple[int, int], GradedSeries] = {}
        for cell in self.spec.cells(h=0):
            k = cell.k
            if k < 2:
                continue
            var = self.spec.var(cell)
            sym = factorial(k - 1) if tilde else factorial(k - 2)
            for order in cell.orderings():
                c = GradedSeries.const(Fraction(1, sym * prod(order)), D)
                for l in order[2:]:
                    c = c * self.disk.moment(l)
                key = (order[0], order[1])
                v = var * c
                out[key] = v if key not in out else out[key] + v
        return {k: v for k, v in out.items() if v}

    def is_trivial(self) -> bool:
        return not self.kernel

    def _apply(self, phi: ZForm, label, kernel) -> ZForm:
        frame = self.disk.frame
        out = None
        by_l2: dict[int, list[tuple[int, GradedSeries]]] = {}
        for (l1, l2), c in kernel.items():
            by_l2.setdefault(l2, []).append((l1, c))
        for l2, items in by_l2.items():
            paired = phi.pair(label, frame.x(label, l2))
            if paired.is_zero():
                continue
            left = None
            for l1, c in items:
                term = frame.dx_power(label, l1).scale(c)
                left = term if left is None else left + term
            t = left.tensor(paired).reorder(phi.labels)
            out = t if out is None else out + t
        return out if out is not None else ZForm(phi.labels)

    def apply_O(self, phi: ZForm, label="z") -> ZForm:
        return self._apply(phi, label, self.kernel)

    def apply_O_tilde(self, phi: ZForm, label="z") -> ZForm:
        return self._apply(phi, label, self.kernel_tilde)


def build_operator(spec: WeightSpec, disk: DiskSolution) -> MasterOperator:
    return MasterOperator(spec, disk)


def disk_residual(disk: DiskSolution, op: MasterOperator) -> ZForm:
    """S omega10 + O-tilde omega10 + dT_1^0; identically zero for a solution."""
    w = disk.w10("z")
    return w.op_S("z") + op.apply_O_tilde(w, "z") + disk.T10_derivative("z")


def y_function(disk: DiskSolution, label="z") -> ZForm:
    """y with y dx = Delta(omega10)/2, checked to have simple zeros at z = +1, -1."""
    y = disk.Y(label).scale(Fraction(1, 2))
    for alpha in (1, -1):
        loc = local_expand(y, label, alpha, 1)
        if loc.get(0).value():
            raise DegenerateBranchPoint(f"y does not vanish at z = {alpha}")
        check_simple_zero(loc.get(1).value(), alpha)
    return y


def check_simple_zero(lead: GradedSeries, alpha: int) -> None:
    """The Gaussian-order part of a first-order coefficient must be nonzero."""
    if not lead.degree_part(0):
        raise DegenerateBranchPoint(f"non-simple branch point at z = {alpha}")


class CylinderSolution:
    """omega20(z1, z2) = B(z1, z2) + C(z1, z2) with C separable."""

    LABELS = ("z1", "z2")

    def __init__(self, correction: ZForm, rounds: int):
        self.correction = correction.reorder(self.LABELS) if correction.labels else ZForm(self.LABELS)
        self.rounds = rounds

    def omega20(self, a="z1", b="z2") -> ZForm:
        return (bergman("z1", "z2") + self.correction).rename({"z1": a, "z2": b}) if (a, b) != self.LABELS \
            else bergman("z1", "z2") + self.correction

    def C(self, a="z1", b="z2") -> ZForm:
        return self.correction.rename({"z1": a, "z2": b})

    def W20(self, a="z1", b="z2") -> ZForm:
        """omega20 - dx dx/(x - x)**2 = C + J: the generating series part."""
        return self.C(a, b) + ZForm.kernel(a, b, "J")


def cylinder_step(op: MasterOperator, C: ZForm, inhomogeneous: bool = True) -> ZForm:
    """One fixed-point round C <- [-O_1(B + C)]_{z1 powers <= -2}."""
    phi = C + bergman("z1", "z2") if inhomogeneous else C
    rhs = -op.apply_O(phi, "z1")
    return rhs.power_band("z1", hi=-2)


def solve_cylinder(spec: WeightSpec, disk: DiskSolution, op: MasterOperator,
                   max_rounds: int | None = None) -> CylinderSolution:
    D = spec.truncation
    C = ZForm(CylinderSolution.LABELS)
    limit = (D + 3) if max_rounds is None else max_rounds
    for rnd in range(1, limit + 1):
        new = cylinder_step(op, C).truncate(D)
        if new == C:
            return CylinderSolution(new, rnd)
        C = new
    raise NonConvergence(f"cylinder fixed point did not stabilize in {limit} rounds")


def cylinder_residual(cyl: CylinderSolution, op: MasterOperator) -> ZForm:
    """S_1 omega20 + O_1 omega20 - (B - J); identically zero for a solution."""
    w = cyl.omega20()
    target = bergman("z1", "z2") - ZForm.kernel("z1", "z2", "J")
    return w.op_S("z1") + op.apply_O(w, "z1") - target


def random_cylinder_seed(spec: WeightSpec, rng: random.Random, size: int = 4) -> ZForm:
    """A random separable Laurent form with powers <= -2 in both variables."""
    D = spec.truncation
    terms = {}
    monos = spec.monomials()
    for _ in range(size):
        key = ((0, -rng.randint(2, 6)), (0, -rng.randint(2, 6)))
        cells = rng.choice(monos)
        c = GradedSeries.const(Fraction(rng.randint(-9, 9), rng.randint(1, 5)), D)
        for cell in cells:
            c = c * spec.var(cell)
        terms[key] = c.shift_u(rng.randint(-3, 3))
    return ZForm(CylinderSolution.LABELS, terms)


def homogeneous_cylinder(spec: WeightSpec, op: MasterOperator, seed: ZForm) -> list[ZForm]:
    """Iterates of the cylinder map with zero inhomogeneity; the last one must vanish."""
    D = spec.truncation
    it = [seed.truncate(D)]
    for _ in range(D + 1):
        it.append(cylinder_step(op, it[-1], inhomogeneous=False).truncate(D))
    return it


class CauchyKernel:
    """G(z0, z) = dz0/(z - z0) - int^z C(z0, .), a form in z0 and a function of z."""

    def __init__(self, cyl: CylinderSolution, z0="z0", z="z"):
        self.z0 = z0
        self.z = z
        self.separable = -cyl.C(z0, z).primitive(z)

    def dG(self) -> ZForm:
        """d_z G = -omega20(z0, z)."""
        cauchy = -bergman(self.z0, self.z)
        return cauchy + self.separable.d(self.z)

    def local(self, alpha: int, order: int) -> LocalSeries:
        """G(z0, alpha + s) as a series in s with z0-coefficients."""
        loc = local_expand(self.separable, self.z, alpha, order)
        # 1/(z - z0) = -sum_n s**n (z0 - alpha)**(-n-1)
        cau = LocalSeries(alpha, {n: ZForm.monomial(self.z0, (alpha, n + 1), -1) for n in range(order + 1)},
                          order, (self.z0,))
        return cau + loc

    def local_iota(self, alpha: int, order: int) -> LocalSeries:
        """G(z0, 1/(alpha + s))."""
        loc = local_expand(self.separable.iota(self.z, form=False), self.z, alpha, order)
        w = local_iota_param(alpha, order)
        acc = LocalSeries(alpha, {}, order, (self.z0,))
        wn = LocalSeries(alpha, {0: ZForm.scalar(1)}, order)
        for n in range(order + 1):
            coef = LocalSeries(alpha, {0: ZForm.monomial(self.z0, (alpha, n + 1), -1)}, order, (self.z0,))
            acc = acc + wn.mul(coef)
            wn = wn.mul(w)
        return acc + loc

    def local_delta(self, alpha: int, order: int) -> LocalSeries:
        return self.local(alpha, order) + (-self.local_iota(alpha, order))


def cauchy_kernel(cyl: CylinderSolution, z0="z0", z="z") -> CauchyKernel:
    return CauchyKernel(cyl, z0, z)
