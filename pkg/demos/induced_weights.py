"""Multi-trace weights induced by integrating out a Gaussian second matrix, then fed to the disk solver."""
from fractions import Fraction

from stuffedmaps.oracle import induce_weights, induced_moments, induced_spec
from stuffedmaps.spectral import solve_disk

for perims, terms in induced_moments(4).items():
    pretty = " + ".join(f"{c} N^{p} u^{q}" for (p, q), c in sorted(terms.items()))
    print(f"<tr M2^{list(perims)}>_c = {pretty}")

for w in induce_weights(2):
    print("induced", w.cell, "coeff", w.coeff, "alpha^%d gamma^%d u^%d" % (w.alpha_pow, w.gamma_pow, w.upow))

spec = induced_spec(2, Fraction(1, 3), Fraction(1, 2), truncation=2)
disk = solve_disk(spec)
for l in range(5):
    print(f"G_{l} =", disk.moment(l).specialize(spec.values))
