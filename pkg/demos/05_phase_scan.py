"""
Ground states of a Landau potential
===================================

Minimize an invariant potential on each stratum separately and keep the
lowest.  As a1 grows the ground state moves from S2A to the origin.
"""
from orbitstrata.example_o3 import load_bundle
from orbitstrata.phase_min import Potential, parse_grid, phase_scan

bundle = load_bundle()
pot = Potential.from_text("a1*p1 + p1^2 - 2*p2 + 1/5*p3 + 1/5*p4 + 1/10*p5", bundle.pvars)

labels = ["S0", "S1", "S2A", "S2B", "S3", "S4"]
for r in phase_scan(pot, bundle, parse_grid("a1=-1:3:9"), seeds=8, labels=labels):
    print(f"a1 = {r.params['a1']:5.2f}  winner {r.winner:4s} value {r.value: .6f}")
