"""Loop equations as exact residual checks, and what a corrupted correlator looks like to them."""
from stuffedmaps.series import WeightSpec
from stuffedmaps.toprec import TopRec
from stuffedmaps.verify import (linear_loop_check, mutated_engine, pole_mutation, quadratic_loop_check,
                                sde_residual)

spec = WeightSpec.of((0, [2, 2]), truncation=2)
engine = TopRec(spec)
engine.compute_all(2)


def show(eng, n, g):
    for rep in (sde_residual(eng, n, g), linear_loop_check(eng, n, g), quadratic_loop_check(eng, n, g)):
        print(f"  {rep.equation:<15} passed={rep.passed}  first failure: {rep.first_failure}")


print("computed omega_1^1:")
show(engine, 1, 1)

bad = mutated_engine(engine, 1, 1, pole_mutation(engine, 1, 1))
print("omega_1^1 plus t dz/(z-1):")
show(bad, 1, 1)
