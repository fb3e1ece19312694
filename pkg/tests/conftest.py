from functools import lru_cache

import pytest

from stuffedmaps.series import CellWeightVar, WeightSpec
from stuffedmaps.toprec import TopRec

BATTERY_CELLS = [(0, [3]), (0, [4]), (0, [1, 1]), (0, [2, 2]), (1, [2]), (0, [1, 1, 2])]


def battery(truncation=2, gaussian=True):
    specs = [WeightSpec.of(c, truncation=truncation) for c in BATTERY_CELLS]
    return ([WeightSpec([], truncation)] if gaussian else []) + specs


@lru_cache(maxsize=None)
def engine_for(cells: tuple, truncation: int = 2, chi_max: int = 2) -> TopRec:
    spec = WeightSpec([CellWeightVar.make(h, p) for h, p in cells], truncation)
    eng = TopRec(spec)
    eng.compute_all(chi_max)
    return eng


def cells_key(spec: WeightSpec) -> tuple:
    return tuple((c.h, c.perimeters) for c in spec.weights)


@pytest.fixture(params=battery(), ids=lambda s: s.label())
def battery_engine(request):
    return engine_for(cells_key(request.param), request.param.truncation)


@pytest.fixture
def gaussian_engine():
    return engine_for((), 2)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance")
        for n in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[n])
