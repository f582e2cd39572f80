"""Sample random congruences modulo random primes and compare with the limiting law."""
from shortsol.montecarlo import compare_to_theory, pick_moduli, simulate_primitive_fraction, simulate_r_distribution
from shortsol.solver import BoxSpec

moduli = [m.value for m in pick_moduli("prime", 10**5, 10**6, 3, seed=1)]
box = BoxSpec.square(1.0)
dist = simulate_r_distribution(2, 1, moduli, box, 3000, seed=1)
comp = compare_to_theory(dist, 1.0)
print("moduli", moduli)
print(" r    freq    theory      z")
for r, count, freq, th, dev, se, z in comp.rows[:9:2]:
    print(f"{r:2d}  {freq:.4f}   {th:.4f}  {z:6.2f}")

# for a prime every nonzero multiple is primitive, so use composites here
composites = [m.value for m in pick_moduli("squarefree-composite", 10**5, 10**6, 3, seed=1)]
prim = simulate_primitive_fraction(composites, 1.0, 3000, seed=1)
print("moduli", composites)
print(f"nontrivial {prim.fraction_nontrivial:.4f}, primitive {prim.fraction_primitive:.4f}")
