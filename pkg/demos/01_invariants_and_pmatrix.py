"""
Invariants and the P-matrix
===========================

O(3) acts on a traceless symmetric tensor Q (5 components) and a polar
vector P (3 components).  The ring of invariants is generated by five
polynomials p1..p5, and the Gram matrix of their gradients can itself be
written as a polynomial matrix in p1..p5.
"""
from orbitstrata.example_o3 import load_bundle
from orbitstrata.polyring import format_poly

bundle = load_bundle()

# the basis, in the coordinates x1..x8
for name, f in zip(bundle.mib.names, bundle.mib.polys):
    print(f"{name} (degree {f.wdegree()}) = {format_poly(f)}")

# rewriting every gradient product in terms of p gives the P-matrix
pm = bundle.pmatrix()
print()
for a in range(pm.q):
    for b in range(a, pm.q):
        print(f"P{a + 1}{b + 1} = {format_poly(pm.hat[a][b])}")

# evaluated at p(x) it equals the Gram matrix of gradients at x
x = [1, 0, 2, 0, -1, 1, 1, 0]
p = bundle.mib.evaluate(x)
print()
print("p(x) =", [str(v) for v in p])
print("P(p(x)) row 1:", [str(v) for v in pm.at(p)[0]])
