"""Planar Gaussian disk: Catalan numbers from the Zhukovsky frame, checked against Wick counting."""
from stuffedmaps.oracle import stuffed_series
from stuffedmaps.series import WeightSpec
from stuffedmaps.spectral import catalan, solve_disk

spec = WeightSpec([], 0)
disk = solve_disk(spec)
print("frame: alpha =", disk.frame.alpha, " gamma =", disk.frame.gamma)

for m in range(7):
    got = disk.moment(2 * m)
    wick = stuffed_series(1, 0, [2 * m], spec, cap=None)
    print(f"G_{2 * m:<2} = {got}    Cat_{m} = {catalan(m):<4} wick agrees: {got == wick}")
