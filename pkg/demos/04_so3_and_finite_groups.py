"""
Dropping reflections, and finite residual groups
================================================

Under SO(3) a sixth invariant p6 appears.  It is not independent: its
square is fixed by the other five through the active factor of det P.
"""
from orbitstrata.example_o3 import load_bundle, reynolds_failures, verify_bundle
from orbitstrata.polyring import format_poly
from orbitstrata.pmatrix import verify_relation

bundle = load_bundle()
print("relation:", format_poly(bundle.so3_relation), "= 0")
print("holds on p(x):", verify_relation(bundle.so3_relation, bundle.mib6).holds)

print(verify_bundle(bundle, only=["lattice"]).to_text())

# every K-invariant built by averaging a monomial rewrites in the lambda basis
for label, spec in bundle.strata.items():
    if spec.extra.get("k_order"):
        order, bad = reynolds_failures(spec)
        print(f"{label}: |K| = {order}, non-rewritable averages: {bad or 'none'}")
