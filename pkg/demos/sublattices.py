"""Index-N sublattices of Z^2, their Smith forms, and Hecke orbits in higher rank."""
from shortsol.arith import factorize
from shortsol.lattices import count_L, enumerate_D_N, enumerate_hecke_orbit, grassmannian_size, is_cyclic_quotient, snf_2x2

N = 12
bases = enumerate_D_N(N)
cyclic = [b for b in bases if is_cyclic_quotient(b)]
print(f"N={N}: {len(bases)} sublattices (sigma = {factorize(N).sigma}), {len(cyclic)} with cyclic quotient")
for b in bases:
    s = snf_2x2(b)
    print(f"  d={b.d:2d} a={b.a:2d} Smith form ({s.d1}, {s.d2})")

for n, j, N in ((3, 1, 30), (3, 2, 30), (4, 2, 6)):
    orbit = enumerate_hecke_orbit(n, j, N)
    print(f"n={n} j={j} N={N}: orbit {len(orbit)}, product formula {count_L(n, j, N)}")
print("subspaces of dimension 2 in F_5^4:", grassmannian_size(4, 2, 5))
