"""Run the recursion for a cubic face weight and compare moment tables with brute-force enumeration."""
from stuffedmaps.oracle import stuffed_series
from stuffedmaps.series import WeightSpec
from stuffedmaps.toprec import TopRec, omega11_closed

spec = WeightSpec.of((0, [3]), truncation=2)
engine = TopRec(spec)
engine.compute_all(2)

print("omega_1^1 =", engine.omega(1, 1))
print("matches the closed form:", engine.omega(1, 1) == omega11_closed(engine))

for n, g, ps in [(1, 0, (3,)), (1, 1, (4,)), (2, 0, (1, 2)), (3, 0, (1, 1, 1)), (2, 1, (2, 2))]:
    got = engine.moment(n, g, ps)
    print(f"W_{n}^{g}{list(ps)} = {got}   oracle agrees: {got == stuffed_series(n, g, ps, spec, cap=None)}")
