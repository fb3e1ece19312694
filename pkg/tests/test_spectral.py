import random
from fractions import Fraction

import pytest

from stuffedmaps.errors import DegenerateBranchPoint, NonConvergence
from stuffedmaps.oracle import stuffed_series
from stuffedmaps.series import CellWeightVar, GradedSeries, WeightSpec
from stuffedmaps.spectral import (DiskSolution, ZhukovskyFrame, build_operator, catalan, cauchy_kernel,
                                  cylinder_residual, disk_residual, effective_weights, homogeneous_cylinder,
                                  random_cylinder_seed, solve_cylinder, solve_disk, y_function)
from stuffedmaps.zforms import ZForm, bergman, laurent, local_expand

from conftest import battery, cells_key, engine_for

U = lambda p, c=1: GradedSeries.u(p, coeff=c, trunc=2)


def test_effective_weights():
    spec = WeightSpec.of((0, [3]), (0, [1]), truncation=2)
    tau = effective_weights(spec, {})
    assert tau == {3: spec.var(spec.weights[1]), 1: spec.var(spec.weights[0])}
    spec = WeightSpec.of((0, [2, 2]), truncation=1)
    G = solve_disk(WeightSpec([], 1)).moments(4)
    tau = effective_weights(spec, G)
    assert tau[2] == spec.var(spec.weights[0]) * U(4, Fraction(1, 2))
    assert all(v.min_degree() >= 1 for v in tau.values())


def test_gaussian_disk():
    disk = solve_disk(WeightSpec([], 2))
    assert disk.frame.alpha.is_zero() and disk.frame.gamma == GradedSeries.u(1)
    for m in range(6):
        assert disk.moment(2 * m) == U(2 * m + 2, catalan(m))
        assert disk.moment(2 * m + 1).is_zero()


@pytest.mark.parametrize("spec", battery(), ids=lambda s: s.label())
def test_disk_against_oracle(spec):
    disk = solve_disk(spec)
    op = build_operator(spec, disk)
    assert disk_residual(disk, op).is_zero()
    for l in range(0, 9):
        assert disk.moment(l) == stuffed_series(1, 0, [l], spec, cap=None)


@pytest.mark.parametrize("cell", [(0, [2]), (0, [2, 2])])
def test_disk_first_order(cell):
    spec = WeightSpec.of(cell, truncation=1)
    disk = solve_disk(spec)
    g2 = disk.moment(2)
    assert g2.degree_part(1) and g2 == stuffed_series(1, 0, [2], spec)


def test_w10_residue_at_infinity():
    for spec in battery():
        w = solve_disk(spec).w10("z")
        assert w.residue("z", "inf").value() == U(2, -1)
        assert w.poles("z") <= {0, "inf"}


def test_disk_nonconvergence():
    with pytest.raises(NonConvergence):
        solve_disk(WeightSpec.of((0, [3]), truncation=2), max_rounds=1)


def test_operator_examples():
    spec = WeightSpec.of((0, [3]), truncation=2)
    disk = solve_disk(spec)
    op = build_operator(spec, disk)
    assert op.is_trivial() and op.apply_O(laurent("z", {-2: 1})).is_zero()
    spec = WeightSpec.of((0, [1, 1]), truncation=1)
    disk = solve_disk(spec)
    op = build_operator(spec, disk)
    t = spec.var(spec.weights[0])
    phi = laurent("z", {-2: 1})
    assert op.apply_O(phi) == disk.frame.dx("z").scale(t * GradedSeries.u(1))
    assert op.apply_O_tilde(phi) == op.apply_O(phi)
    assert op.apply_O_tilde(disk.w10("z")).truncate(1).is_zero()  # G_1 = 0 at Gaussian order


def test_operator_linear_and_degree_raising():
    spec = WeightSpec.of((0, [1, 1, 2]), truncation=2)
    disk = solve_disk(spec)
    op = build_operator(spec, disk)
    rng = random.Random(3)
    for _ in range(10):
        f = laurent("z", {-rng.randint(1, 5): Fraction(rng.randint(-4, 4)), -1: 1})
        g = ZForm.monomial("z", (rng.choice([1, -1]), rng.randint(1, 3)), 2)
        assert op.apply_O(f + g) == op.apply_O(f) + op.apply_O(g)
        out = op.apply_O(f)
        assert out.is_zero() or out.min_degree() >= 1


def test_y_function():
    for spec in battery():
        disk = solve_disk(spec)
        y = y_function(disk)
        assert y.op_S("z", form=False).is_zero()


def test_degenerate_branch_point():
    frame = ZhukovskyFrame.gaussian(1)
    disk = DiskSolution(WeightSpec([], 1), frame, {}, {1: GradedSeries.u(1, 3), 3: GradedSeries.u(1, -1)}, 0)
    with pytest.raises(DegenerateBranchPoint):
        y_function(disk)


def test_gaussian_cylinder():
    eng = engine_for((), 2)
    assert eng.cyl.correction.is_zero()
    assert eng.moment(2, 0, (2, 2)) == U(4, 2)


@pytest.mark.parametrize("spec", battery(), ids=lambda s: s.label())
def test_cylinder(spec):
    eng = engine_for(cells_key(spec), 2)
    assert cylinder_residual(eng.cyl, eng.op).is_zero()
    C = eng.cyl.C("z1", "z2")
    assert C.rename({"z1": "z2", "z2": "z1"}).reorder(("z1", "z2")) == C
    assert eng.cyl.omega20().pole_check({"diagonal"})
    for a in range(1, 6):
        for b in range(a, 6):
            if a + b <= 8:
                assert eng.moment(2, 0, (a, b)) == stuffed_series(2, 0, [a, b], spec, cap=None)


@pytest.mark.parametrize("spec", battery(), ids=lambda s: s.label())
def test_cylinder_uniqueness(spec):
    eng = engine_for(cells_key(spec), 2)
    seed = random_cylinder_seed(spec, random.Random(11))
    its = homogeneous_cylinder(spec, eng.op, seed)
    assert its[-1].is_zero()


def test_cauchy_kernel():
    eng = engine_for((), 2)
    G = cauchy_kernel(eng.cyl, "z0", "z")
    assert G.separable.is_zero()
    for cells in [((0, (2, 2)),), ((0, (1, 1, 2)),)]:
        eng = engine_for(cells, 2)
        G = cauchy_kernel(eng.cyl, "z0", "z")
        assert G.dG() == -eng.cyl.omega20("z0", "z")
        loc = G.local_delta(1, 3)
        assert loc.get(0).is_zero()  # Delta G vanishes at the fixed point


def test_cylinder_first_order_separable():
    spec = WeightSpec.of((0, [1, 1]), truncation=1)
    eng = engine_for(cells_key(spec), 1, 1)
    C = eng.cyl.correction
    assert set(C.terms) == {((0, -2), (0, -2))}
