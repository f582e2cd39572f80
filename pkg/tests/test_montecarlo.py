import itertools
import math
from collections import Counter

import pytest
from scipy.stats import chisquare

from shortsol.arith import derive_stream, factorize, rank_mod_p
from shortsol.errors import DomainError, InvalidInputError, NotFoundError
from shortsol.montecarlo import (
    c2r_closed,
    compare_counts,
    compare_to_theory,
    pick_moduli,
    random_modulus,
    sample_congruence,
    simulate_primitive_fraction,
    simulate_r_distribution,
    theory_aspect,
    theory_summary,
    total_variation,
)
from shortsol.solver import BoxSpec, CongruenceSystem, brute_force_solutions

P3 = 3 / math.pi**2


def test_c2r_values():
    assert c2r_closed(1, 2) == 0
    assert round(c2r_closed(1, 1), 6) == 0.696036
    assert round(c2r_closed(1, 3), 6) == 0.227973
    assert round(c2r_closed(1, 5), 6) == 0.042217
    assert c2r_closed(1, 3) == pytest.approx(P3 * 0.75, rel=1e-15)
    assert c2r_closed(1, 5) == pytest.approx(P3 * (1 / 4 - 1 / 9), rel=1e-15)


def test_c2r_domain():
    for a in (0, -1, 2.0001, 3):
        with pytest.raises(DomainError):
            c2r_closed(a, 1)
    with pytest.raises(InvalidInputError):
        c2r_closed(1, 0)
    assert c2r_closed(2, 1) == pytest.approx(1 - 6 / math.pi**2)


def test_theory_summary_values():
    t = theory_summary(2)
    assert round(t.p_nontrivial, 6) == 0.607927
    t = theory_summary(1)
    assert round(t.primitive_lower_bound, 6) == 0.089029
    assert round(t.p_nontrivial, 6) == 0.303964
    assert t.p_nontrivial == pytest.approx(1 - t.entries[1], abs=1e-15)
    assert all(t.entries[r] == 0 for r in t.entries if r % 2 == 0)


@pytest.mark.parametrize("a", [0.01, 0.5, 1.0, 1.37, 2.0])
def test_theory_telescopes(a):
    t = theory_summary(a, 10**5)
    assert abs(t.total() - 1) < 1e-12
    # partial sums through r = 2k+1 leave (3a/pi^2)/(k+1)^2
    for k in (1, 2, 5, 40):
        part = math.fsum(t.entries[r] for r in range(1, 2 * k + 2))
        assert part == pytest.approx(1 - 3 * a / math.pi**2 / (k + 1) ** 2, abs=1e-14)


def test_theory_aspect():
    assert theory_aspect(BoxSpec.square(1.5), 2, 1) == 1.5
    assert theory_aspect(BoxSpec.rect(0.5), 2, 1) == 0.5
    assert theory_aspect(BoxSpec.cube(0.5), 2, 1) == 1.0
    assert theory_aspect(BoxSpec.cube(0.9), 2, 1) is None
    assert theory_aspect(BoxSpec.cube(0.5), 3, 1) is None


# -- sampling -------------------------------------------------------------------


def test_sample_gcd_condition():
    s = derive_stream(0, 0)
    for _ in range(2000):
        row = sample_congruence(2, 1, 4, s).rows[0]
        assert not (row[0] % 2 == 0 and row[1] % 2 == 0)


def test_sample_uniform_over_admissible_rows():
    admissible = [(x, y) for x in range(4) for y in range(4) if math.gcd(x, y, 4) == 1]
    assert len(admissible) == 12
    s = derive_stream(1, 0)
    counts = Counter(sample_congruence(2, 1, 4, s).rows[0] for _ in range(10**5))
    assert set(counts) == set(admissible)
    assert chisquare([counts[r] for r in admissible]).pvalue > 0.001


def test_sample_rank_condition():
    s = derive_stream(2, 0)
    for _ in range(300):
        rows = [list(r) for r in sample_congruence(3, 2, 6, s).rows]
        assert rank_mod_p(rows, 2) == 2 and rank_mod_p(rows, 3) == 2


def test_sample_systems_uniform():
    # ordered pairs of independent nonzero rows in F_2^3: 7 * 6 of them
    vecs = [v for v in itertools.product(range(2), repeat=3) if any(v)]
    admissible = [(a, b) for a in vecs for b in vecs if rank_mod_p([list(a), list(b)], 2) == 2]
    assert len(admissible) == 42
    s = derive_stream(3, 0)
    counts = Counter(sample_congruence(3, 2, 2, s).rows for _ in range(20000))
    assert set(counts) == set(admissible)
    assert chisquare([counts[r] for r in admissible]).pvalue > 0.001


def test_sample_arguments():
    with pytest.raises(InvalidInputError):
        sample_congruence(2, 2, 5, derive_stream(0, 0))


def test_rows_with_equal_solution_sets_are_unit_multiples():
    for N in range(2, 61):
        groups = Counter()
        for A in range(N):
            for B in range(N):
                if math.gcd(A, B, N) == 1:
                    g = (B % N, -A % N)
                    # canonical orbit key of the solution set
                    groups[min(((u * g[0]) % N, (u * g[1]) % N) for u in range(1, N + 1) if math.gcd(u, N) == 1)] += 1
        phi = factorize(N).euler_phi
        assert set(groups.values()) == {phi}
        if N <= 12:
            sets = Counter(
                frozenset(brute_force_solutions(CongruenceSystem([(A, B)], N)))
                for A in range(N) for B in range(N) if math.gcd(A, B, N) == 1
            )
            assert set(sets.values()) == {phi} and len(sets) == len(groups)


# -- moduli ------------------------------------------------------------------------


def test_random_modulus():
    s = derive_stream(5, 0)
    M = random_modulus("prime", 100, 200, s)
    assert M.is_prime and 100 <= M.value <= 200
    assert random_modulus("prime", 100, 200, derive_stream(5, 0)) == M
    assert random_modulus("squarefree", 100, 200, derive_stream(6, 0)).is_squarefree
    with pytest.raises(NotFoundError):
        random_modulus("prime", 24, 28, derive_stream(7, 0))
    c = random_modulus("squarefree-composite", 10**5, 10**6, derive_stream(8, 0))
    assert c.is_squarefree and not c.is_prime
    p = random_modulus("prime", 10**5, 10**6, derive_stream(8, 0))
    assert p.is_prime
    with pytest.raises(InvalidInputError):
        random_modulus("cube", 100, 200, derive_stream(0, 0))


def test_pick_moduli_distinct_and_deterministic():
    a = pick_moduli("prime", 10**5, 10**6, 10, 42)
    assert len({m.value for m in a}) == 10
    assert a == pick_moduli("prime", 10**5, 10**6, 10, 42)
    with pytest.raises(NotFoundError):
        pick_moduli("prime", 100, 110, 5, 0)


# -- experiments -------------------------------------------------------------------


def test_rdist_invariants():
    d = simulate_r_distribution(2, 1, [1009, 1001], BoxSpec.square(1.0), 500, 3)
    assert sum(d.counts.values()) == d.samples == 1000
    assert all(r % 2 == 1 for r in d.counts)
    assert sum(d.by_modulus[1009].values()) == 500


def test_rdist_n3():
    d = simulate_r_distribution(3, 1, [101], BoxSpec.cube(0.8), 300, 0)
    assert sum(d.counts.values()) == 300
    assert all(r % 2 == 1 for r in d.counts)


def test_rdist_matches_closed_form_at_one_prime():
    d = simulate_r_distribution(2, 1, [100003], BoxSpec.square(1.0), 20000, 1)
    big = 1 - d.freq(1)
    assert abs(big - 0.303964) <= 0.015
    comp = compare_to_theory(d, 1.0)
    for r in (1, 3, 5):
        assert abs(comp.row(r)[6]) <= 4


def test_rdist_reproducible_across_workers():
    box = BoxSpec.square(1.0)
    a = simulate_r_distribution(2, 1, [10007, 10009], box, 2500, 9, workers=1)
    b = simulate_r_distribution(2, 1, [10007, 10009], box, 2500, 9, workers=3)
    assert a.counts == b.counts and a.by_modulus == b.by_modulus


def test_primitive_fraction():
    res = simulate_primitive_fraction([100003], 1.0, 20000, 1)
    assert res.fraction_primitive <= res.fraction_nontrivial
    assert abs(res.fraction_nontrivial - 0.3040) <= 0.015
    assert res.fraction_primitive >= 0.089
    assert sum(res.d_distribution.values()) == res.nontrivial


def test_primitive_fraction_composite_and_rect():
    res = simulate_primitive_fraction([30030, 4620], 1.0, 3000, 2, shape="rect")
    assert res.fraction_primitive <= res.fraction_nontrivial
    assert set(res.d_distribution) <= set(factorize(30030).divisors()) | set(factorize(4620).divisors())
    # same streams as the histogram experiment
    d = simulate_r_distribution(2, 1, [30030, 4620], BoxSpec.rect(1.0), 3000, 2)
    assert res.nontrivial == d.samples - d.counts[1]


def test_compare_proportional_dist():
    samples = 10**6
    counts = {r: c2r_closed(1, r) * samples for r in range(1, 12)}
    comp = compare_counts(counts, samples, 1.0, 11)
    assert comp.max_deviation < 1e-15


def test_compare_z_definition():
    counts = Counter({1: 700, 3: 230, 5: 40, 7: 30})
    comp = compare_counts(counts, 1000, 1.0)
    for r, cnt, freq, th, dev, se, z in comp.rows:
        assert freq == cnt / 1000
        if th > 0:
            assert se == pytest.approx(math.sqrt(th * (1 - th) / 1000))
            assert z == pytest.approx((freq - th) / se)
        else:
            assert se == 0
    assert comp.row(2)[6] == 0.0


def test_total_variation():
    assert total_variation(Counter({1: 5}), Counter({1: 9})) == 0
    assert total_variation(Counter({1: 1}), Counter({3: 1})) == 1
    assert total_variation(Counter({1: 1, 3: 1}), Counter({1: 1})) == pytest.approx(0.5)
