"""Limiting probabilities for the number of points in the box, against an exact Hecke-orbit average."""
from shortsol.lattices import enumerate_hecke_orbit, hecke_average
from shortsol.montecarlo import theory_summary
from shortsol.solver import BoxSpec

for a in (1.0, 2.0):
    t = theory_summary(a, 9)
    print(f"a={a}: " + " ".join(f"c(r={r})={t.entries[r]:.6f}" for r in (1, 3, 5, 7, 9)))
    print(f"  nontrivial {t.p_nontrivial:.6f}  primitive at least {t.primitive_lower_bound:.6f}")

box = BoxSpec.square(1.0)
limit = theory_summary(1.0).entries[1]
for p in (101, 1009, 10007):
    avg = hecke_average(enumerate_hecke_orbit(2, 1, p), box, 1)
    print(f"p={p}: orbit average of r=1 is {avg:.6f}, limit {limit:.6f}")
