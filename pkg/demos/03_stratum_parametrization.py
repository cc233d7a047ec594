"""
Parametrizing a stratum
=======================

Each singular stratum is the image of a simpler orbit space: the fixed
space V of its isotropy group, divided by the residual group K.  The basis
invariants of K on V give coordinates lambda, and phi(lambda) lands on the
stratum.  The P-matrix then factors as J Lambda J^T.
"""
from orbitstrata.example_o3 import load_bundle
from orbitstrata.polyring import format_poly
from orbitstrata.strata_param import sample_delta, verify_factorization

bundle = load_bundle()
pm = bundle.pmatrix()
s4 = bundle.param("S4")

print("lambda basis:")
for name, f in zip(s4.spec.lambda_names, s4.spec.lambda_polys):
    print(f"  {name} = {format_poly(f)}")
print("phi:")
for name, f in zip(bundle.mib.names, s4.phi):
    print(f"  {name} = {format_poly(f)}")
print("Delta:", "; ".join(f"{format_poly(g)} > 0" for g in s4.delta_ineqs))

verdict = verify_factorization(s4, pm, active=bundle.active)
print("P(phi) = J Lambda J^T:", verdict.holds, " A(phi) = 0:", verdict.active_vanishes)

res = sample_delta(s4, 5, seed=0)
for lam in res.points:
    print("lambda", [round(v, 3) for v in lam], "-> p", s4.phi_float(lam).round(3).tolist())
