"""
Maximal operators, one function and two
=======================================

The maximal operator records, at each point, the largest conditional
average the point ever sees across the filtration.  The bilinear
version does the same for a product of two averages, and the tailed
version only looks from a chosen level onward.
"""

import numpy as np

from filtermax import (
    Exponents,
    FilteredSpace,
    bilinear_maximal,
    lp_norm,
    maximal,
    tailed_bilinear_maximal,
    weighted_maximal,
)

space = FilteredSpace(
    masses=[0.25, 0.25, 0.25, 0.25],
    levels=[
        [[0, 1, 2, 3]],
        [[0, 1], [2, 3]],
        [[0], [1], [2], [3]],
    ],
)

f = np.array([1.0, 0.0, 0.0, 0.0])
g = np.array([0.0, 1.0, 0.0, 0.0])

# Point 0 sees averages 1/4 (level 0), 1/2 (level 1), 1 (level 2); the
# maximal function keeps the largest.  Point 2 never sees more than the
# global average 1/4.
print("M(f)      =", maximal(space, f))
assert maximal(space, f).tolist() == [1.0, 0.5, 0.25, 0.25]

# The operator uses absolute values, so flipping the sign changes nothing.
assert np.array_equal(maximal(space, -f), maximal(space, f))

# Two functions: at each point take the best product of averages over a
# single common level.
print("M(f,g)    =", bilinear_maximal(space, f, g))
assert bilinear_maximal(space, f, g).tolist() == [0.25, 0.25, 0.0625, 0.0625]

# Feeding the same function twice squares the one-function operator,
# exactly, because both maximize the same quantity.
m = maximal(space, f)
assert np.array_equal(bilinear_maximal(space, f, f), m * m)
print("M(f,f) == M(f)^2 exactly")

# Tailed version: only levels >= 1 compete.  On the left half both
# averages are 1/2 at level 1; at level 2 the averages are the spikes
# themselves, whose product vanishes.  The right half sees nothing once
# the global level 0 is excluded.
print("M_1(f,g)  =", tailed_bilinear_maximal(space, 1, f, g))
assert tailed_bilinear_maximal(space, 1, f, g).tolist() == [0.25, 0.25, 0.0, 0.0]

# Starting the tail at level 0 recovers the full operator.
assert np.array_equal(
    tailed_bilinear_maximal(space, 0, f, g), bilinear_maximal(space, f, g)
)

# The weighted maximal operator uses sigma-weighted averages.  Its norm
# bound is the classical one: for exponent p the operator norm on the
# sigma-weighted space is at most the dual exponent p'.
sigma = np.array([3.0, 1.0, 1.0, 1.0])
p = Exponents(2.0, 2.0).p1
lhs = lp_norm(space, weighted_maximal(space, f, sigma), sigma, p)
rhs = (p / (p - 1.0)) * lp_norm(space, f, sigma, p)
print(f"||M^sigma f||_p = {lhs:.6f} <= p' ||f||_p = {rhs:.6f}")
assert lhs <= rhs
