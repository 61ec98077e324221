"""
Finite filtered spaces and conditional averaging
================================================

A filtered space is a finite set of weighted points together with a
tower of partitions, each level refining the one before it.  Averaging
a function over the partition cells gives a conditional expectation;
coarser levels see blurrier versions of the function.
"""

import numpy as np

from filtermax import (
    FilteredSpace,
    cond_exp,
    integrate,
    sigma_from_omega,
    weighted_cond_exp,
)

# Four points of equal mass, refined in three stages: everything, two
# halves, then singletons.  This is the smallest space with interesting
# structure and reappears throughout the demos.
space = FilteredSpace(
    masses=[0.25, 0.25, 0.25, 0.25],
    levels=[
        [[0, 1, 2, 3]],
        [[0, 1], [2, 3]],
        [[0], [1], [2], [3]],
    ],
)
print(space)
print("atoms per level:", [len(space.level_atoms(i)) for i in range(space.n_levels)])

# A spike at the first point.
f = np.array([1.0, 0.0, 0.0, 0.0])

# Conditional expectation replaces f by its mass-weighted average on
# each cell of the chosen level.
for i in range(space.n_levels):
    print(f"E_{i}(f) =", cond_exp(space, f, i))

# The average over the whole space is the integral divided by total mass.
assert cond_exp(space, f, 0)[0] == integrate(space, f) / integrate(space, np.ones(4))

# Tower rule: averaging at level 2 and then at level 1 is the same as
# averaging at level 1 directly.
e2 = cond_exp(space, f, 2)
assert np.array_equal(cond_exp(space, e2, 1), cond_exp(space, f, 1))
print("tower rule holds: E_1(E_2(f)) == E_1(f)")

# Averages can also be taken with respect to a weight: each point
# contributes in proportion to its sigma-mass.  With sigma constant this
# reduces to the plain average.
sigma = np.array([3.0, 1.0, 1.0, 1.0])
print("weighted E_1(f):", weighted_cond_exp(space, f, sigma, 1))
print("plain    E_1(f):", cond_exp(space, f, 1))
assert np.array_equal(
    weighted_cond_exp(space, f, np.ones(4), 1), cond_exp(space, f, 1)
)

# Dual weights: a weight omega and exponent p determine a companion
# weight sigma = omega^(-1/(p-1)), and applying the rule again with the
# dual exponent returns the original weight.
omega = np.array([4.0, 1.0, 0.25, 1.0])
p = 2.0
sigma = sigma_from_omega(omega, p)
print("omega:", omega)
print("sigma:", sigma)
back = sigma_from_omega(sigma, p / (p - 1.0))
assert np.allclose(back, omega)
print("duality round trip returns the original weight")
