"""Binomial exponential sums over the multiplicative group and the bounds they satisfy."""
from shortsol.expsums import binomial_sum, bound_experiment, discrete_log, minimize_exponents, primitive_root

p, h1, h2 = 1009, 11, 101
g = primitive_root(p)
r1, r2 = discrete_log(p, g, h1), discrete_log(p, g, h2)
ku, Mu, ks, Ms = minimize_exponents(p, r1, r2)
S = binomial_sum(p, 3, 5, h1, h2)
print(f"p={p} g={g} logs ({r1}, {r2}); smallest exponents: unsigned {Mu}, signed {Ms}")
print(f"|S| = {abs(S):.4f}, sqrt(p) M = {p**0.5 * Mu:.1f}, y-form gives {abs(binomial_sum(p, 3, 5, h1, h2, 'y')):.4f}")

summary = bound_experiment(1000, 10000, 20, 1.0, 10, seed=7)
print(f"{len(summary.records)} records, Weil bound held: {summary.weil_ok}")
print(f"fraction with the improved exponent condition: {summary.fraction_improved:.3f}")
