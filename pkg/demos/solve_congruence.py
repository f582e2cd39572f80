"""Shortest nonzero solution of a x + b y = 0 mod N, and the short solutions in a box."""
from shortsol.solver import BoxSpec, CongruenceSystem, count_solutions_in_box, short_solution_census, shortest_nontrivial

N = 1009
row = (123, 457)
system = CongruenceSystem([row], N)
p = shortest_nontrivial(system)
print(f"{row[0]} x + {row[1]} y = 0 mod {N}")
print("shortest nonzero solution:", p.coords, "sup-norm", p.sup_norm, "bound", int(N**0.5))

box = BoxSpec.square(1.0)
print("points in the square box (zero included):", count_solutions_in_box(system, box))
for k, d, point in short_solution_census(*row, N, box):
    print(f"  k={k:5d} gcd(k,N)={d} point={point}")

system3 = CongruenceSystem([(1, 2, 3), (0, 1, 4)], 30)
print("two congruences in three unknowns mod 30:", shortest_nontrivial(system3).coords)
