"""
Where does a point of R^5 sit?
==============================

A point p belongs to the orbit space exactly when the P-matrix at p is
positive semidefinite, and its rank is the dimension of the stratum through
it.  The relations attached to each stratum tell same-dimension strata apart.
"""
import numpy as np

from orbitstrata.example_o3 import load_bundle
from orbitstrata.pmatrix import classify_point

bundle = load_bundle()
pm = bundle.pmatrix()

# images of the typical point of every stratum
for label, spec in bundle.strata.items():
    p = bundle.mib.evaluate_float(spec.typical_point)
    v = classify_point(pm, p, rules=bundle.rules)
    print(f"{label:4s} typical point -> {v.describe()}")

# a random image p(x) is almost surely in the principal stratum
x = np.random.default_rng(1).normal(size=8)
print("random p(x) ->", classify_point(pm, bundle.mib.evaluate_float(x), rules=bundle.rules).describe())

# p1 = |x|^2 cannot be negative
print("(-1, 0, 0, 0, 0) ->", classify_point(pm, [-1, 0, 0, 0, 0]).describe())
