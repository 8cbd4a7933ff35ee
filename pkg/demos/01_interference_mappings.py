"""Fixed points of standard interference mappings, on toy examples.

A mapping T is standard interference (SI) when it is coordinatewise monotone
and scalable; then p <- T(p) converges to the unique fixed point whenever one
exists, and the budget-normalized variant always converges.  This script
walks through both iterations and the sampling-based axiom checker.
"""

import numpy as np

from cfmimo import (
    InterferenceMapping,
    MonotoneNormSpec,
    check_si_axioms,
    iterate_fixed_point,
    iterate_normalized_fixed_point,
)

# A 2-user affine mapping: each user's required power is half the other's
# plus a unit of noise.  Solving p = T(p) by hand gives (2, 2).
mapping = InterferenceMapping(2, lambda p: np.array([0.5 * p[1] + 1, 0.5 * p[0] + 1]))
trace = iterate_fixed_point(mapping, np.array([1.0, 1.0]), tol=1e-12)
print("plain iteration:", trace.status.value, "fixed point:", trace.p)
print("step residuals shrink geometrically:", trace.residuals[:6])

# The same mapping under a max-norm budget of 1: the normalized iteration
# balances the users on the budget boundary.
norm = MonotoneNormSpec.linf()
trace = iterate_normalized_fixed_point(mapping, norm, 1.0, np.array([0.3, 0.9]))
print("\nnormalized iteration:", trace.status.value, "balanced point:", trace.p)
print("max-norm of the solution:", max(trace.p))

# An infeasible mapping (growth factor 2 per step) has no fixed point; the
# engine reports divergence instead of looping forever.
runaway = InterferenceMapping(1, lambda p: 2.0 * p + 1.0)
trace = iterate_fixed_point(runaway, np.array([1.0]))
print("\nrunaway mapping:", trace.status.value, "after", trace.n_iterations, "steps")

# The axiom checker accepts genuine SI maps and flags violations otherwise.
concave = InterferenceMapping(2, lambda p: np.full(2, min(p[0], p[1]) + 1.0))
print("\nconcave positive map violations:", len(check_si_axioms(concave, 2000, 0).violations))
square = InterferenceMapping(1, lambda p: p**2 + 1.0)
report = check_si_axioms(square, 2000, 0)
print("square map violations:", len(report.violations), "first kind:", report.violations[0].kind)
