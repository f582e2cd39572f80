"""
Closed-form short-solution probabilities for one congruence in two
variables, and seeded Monte Carlo experiments for general moduli.

Every sample ``i`` of an experiment draws from ``derive_stream(seed, i)``
with ``i = modulus_index * samples_per_modulus + sample_index``, so results
do not depend on how the work is split between processes.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .arith import Modulus, ModulusLike, SeededStream, as_modulus, derive_stream, is_prime, rank_mod_p
from .errors import DomainError, InvalidInputError, NotFoundError, SamplingError
from .solver import BoxSpec, CongruenceSystem, count_solutions_in_box, short_solution_census

MAX_REJECTIONS = 10**6
MAX_MODULUS_TRIALS = 10**6
# stream indices reserved for picking moduli, disjoint from the sample indices
MODULUS_STREAM_OFFSET = 1 << 62
_SMALL_RANGE = 10**4
_CHUNK = 2000

SIX_OVER_PI2 = 6 / math.pi**2


def _check_a(a: float) -> None:
    if not 0 < a <= 2:
        raise DomainError(f"a must lie in (0, 2], got {a}")


def c2r_closed(a: float, r: int) -> float:
    """Limiting probability of exactly ``r`` short solutions in a box of area ``a N``."""
    _check_a(a)
    if r < 1:
        raise InvalidInputError(f"r must be positive, got {r}")
    p = 3 * a / math.pi**2
    if r % 2 == 0:
        return 0.0
    if r == 1:
        return 1 - p
    k = (r - 1) // 2
    return p * (1 / k**2 - 1 / (k + 1) ** 2)


@dataclass(frozen=True)
class TheoryTable:
    a: float
    entries: dict[int, float]
    p_nontrivial: float
    primitive_lower_bound: float
    tail: float

    def total(self) -> float:
        return math.fsum(self.entries.values()) + self.tail


def theory_summary(a: float, r_max: int = 9) -> TheoryTable:
    _check_a(a)
    p = 3 * a / math.pi**2
    entries = {r: c2r_closed(a, r) for r in range(1, r_max + 1)}
    k_last = (max((r for r in entries if r % 2), default=1) - 1) // 2
    return TheoryTable(
        a=a,
        entries=entries,
        p_nontrivial=p,
        primitive_lower_bound=p * (1 - 1 / math.sqrt(2)),
        tail=p / (k_last + 1) ** 2,
    )


def theory_aspect(box: BoxSpec, n: int, j: int) -> float | None:
    """Area-per-``N`` of a planar box when the closed form applies, else None."""
    if n != 2 or j != 1:
        return None
    if box.shape in ("rect", "square"):
        return box.a
    a = 4 * box.D**2
    return a if a <= 2 else None


# -- sampling ------------------------------------------------------------------


def sample_congruence(n: int, j: int, N: ModulusLike, stream: SeededStream) -> CongruenceSystem:
    """Uniform draw from the normalized ``j x n`` systems modulo ``N``.

    Rows are redrawn until coprime to ``N``; for ``j > 1`` a matrix that drops
    rank modulo some prime divisor is discarded whole.
    """
    if not 1 <= j <= n - 1:
        raise InvalidInputError(f"need 1 <= j <= n-1, got n={n}, j={j}")
    M = as_modulus(N)
    Nv = M.value
    rejections = 0
    while True:
        rows = []
        while len(rows) < j:
            row = stream.vector(0, Nv, n)
            if math.gcd(Nv, *row) == 1:
                rows.append(row)
                continue
            rejections += 1
            if rejections > MAX_REJECTIONS:
                raise SamplingError(f"no admissible row after {MAX_REJECTIONS} rejections")
        if j == 1 or all(rank_mod_p(rows, p) == j for p in M.primes):
            return CongruenceSystem(rows, M, check=False)
        rejections += 1
        if rejections > MAX_REJECTIONS:
            raise SamplingError(f"no full-rank system after {MAX_REJECTIONS} rejections")


_KINDS = ("prime", "squarefree", "squarefree-composite", "any")


def _kind_ok(kind: str, m: int) -> bool:
    if kind == "any":
        return True
    if kind == "prime":
        return is_prime(m)
    M = as_modulus(m)
    if kind == "squarefree":
        return M.is_squarefree
    return M.is_squarefree and not M.is_prime


def random_modulus(kind: str, lo: int, hi: int, stream: SeededStream) -> Modulus:
    """A modulus in ``[lo, hi]`` of the requested kind, deterministic in ``stream``.

    Small ranges are listed exhaustively and one candidate is drawn; large
    ones use rejection sampling with at most 10**6 trials.
    """
    if kind not in _KINDS:
        raise InvalidInputError(f"unknown modulus kind {kind!r}")
    if lo < 2 or hi < lo:
        raise InvalidInputError(f"need 2 <= lo <= hi, got [{lo}, {hi}]")
    if hi - lo < _SMALL_RANGE:
        cands = [m for m in range(lo, hi + 1) if _kind_ok(kind, m)]
        if not cands:
            raise NotFoundError(f"no {kind} modulus in [{lo}, {hi}]")
        return as_modulus(cands[stream.integers(0, len(cands))])
    for _ in range(MAX_MODULUS_TRIALS):
        m = stream.integers(lo, hi + 1)
        if _kind_ok(kind, m):
            return as_modulus(m)
    raise NotFoundError(f"no {kind} modulus in [{lo}, {hi}] after {MAX_MODULUS_TRIALS} trials")


def pick_moduli(kind: str, lo: int, hi: int, count: int, seed: int, distinct: bool = True) -> list[Modulus]:
    """``count`` moduli drawn from the reserved modulus streams of ``seed``."""
    out: list[Modulus] = []
    seen = set()
    i = 0
    while len(out) < count:
        M = random_modulus(kind, lo, hi, derive_stream(seed, MODULUS_STREAM_OFFSET + i))
        i += 1
        if distinct and M.value in seen:
            if i > 100 * count + 1000:
                raise NotFoundError(f"fewer than {count} distinct {kind} moduli in [{lo}, {hi}]")
            continue
        seen.add(M.value)
        out.append(M)
    return out


# -- experiments -----------------------------------------------------------------


@dataclass
class RDistribution:
    counts: Counter
    samples: int
    moduli: list[int]
    box: BoxSpec
    seed: int
    n: int = 2
    j: int = 1
    by_modulus: dict[int, Counter] = field(default_factory=dict)

    def freq(self, r: int) -> float:
        return self.counts.get(r, 0) / self.samples


def _shards(n_moduli: int, per: int):
    for mi in range(n_moduli):
        for start in range(0, per, _CHUNK):
            yield mi, start, min(per, start + _CHUNK)


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def _rdist_task(task) -> Counter:
    n, j, N, box, seed, base, start, stop = task
    M = as_modulus(N)
    c: Counter = Counter()
    for s in range(start, stop):
        system = sample_congruence(n, j, M, derive_stream(seed, base + s))
        c[count_solutions_in_box(system, box)] += 1
    return c


def simulate_r_distribution(
    n: int,
    j: int,
    moduli: Sequence[ModulusLike],
    box: BoxSpec,
    samples_per_modulus: int,
    seed: int,
    workers: int = 1,
) -> RDistribution:
    """Histogram of box solution counts over random normalized systems."""
    box.check_compatible(n, j)
    Ns = [as_modulus(N).value for N in moduli]
    tasks = [
        (n, j, Ns[mi], box, seed, mi * samples_per_modulus, start, stop)
        for mi, start, stop in _shards(len(Ns), samples_per_modulus)
    ]
    by_mod = {N: Counter() for N in Ns}
    for task, c in zip(tasks, _map(_rdist_task, tasks, workers)):
        by_mod[task[2]].update(c)
    total: Counter = Counter()
    for c in by_mod.values():
        total.update(c)
    return RDistribution(
        counts=total,
        samples=len(Ns) * samples_per_modulus,
        moduli=Ns,
        box=box,
        seed=seed,
        n=n,
        j=j,
        by_modulus=by_mod,
    )


@dataclass
class PrimitiveResult:
    samples: int
    nontrivial: int
    primitive: int
    d_distribution: Counter
    by_modulus: dict[int, tuple[int, int, int]]

    @property
    def fraction_nontrivial(self) -> float:
        return self.nontrivial / self.samples

    @property
    def fraction_primitive(self) -> float:
        return self.primitive / self.samples


def _primitive_task(task):
    N, box, seed, base, start, stop = task
    M = as_modulus(N)
    nontriv = prim = 0
    dist: Counter = Counter()
    for s in range(start, stop):
        system = sample_congruence(2, 1, M, derive_stream(seed, base + s))
        r1, r2 = system.rows[0]
        census = short_solution_census(r1, r2, M.value, box)
        if not census:
            continue
        nontriv += 1
        if any(d == 1 for _, d, _ in census):
            prim += 1
        shortest = min(census, key=lambda e: (max(abs(e[2][0]), abs(e[2][1])), e[0]))
        dist[shortest[1]] += 1
    return nontriv, prim, dist


def simulate_primitive_fraction(
    moduli: Sequence[ModulusLike],
    a: float,
    samples_per_modulus: int,
    seed: int,
    workers: int = 1,
    shape: str = "square",
) -> PrimitiveResult:
    """Fractions of random rows with a short solution, and with a primitive one.

    Uses the same streams as `simulate_r_distribution` so both experiments
    see identical congruences.  ``d_distribution`` tallies ``gcd(k, N)`` of
    the shortest solution of each sample that has one.
    """
    _check_a(a)
    box = BoxSpec(shape, a=a)
    Ns = [as_modulus(N).value for N in moduli]
    tasks = [
        (Ns[mi], box, seed, mi * samples_per_modulus, start, stop)
        for mi, start, stop in _shards(len(Ns), samples_per_modulus)
    ]
    by_mod = {N: [samples_per_modulus, 0, 0] for N in Ns}
    dist: Counter = Counter()
    for task, (nt, pr, dd) in zip(tasks, _map(_primitive_task, tasks, workers)):
        by_mod[task[0]][1] += nt
        by_mod[task[0]][2] += pr
        dist.update(dd)
    return PrimitiveResult(
        samples=len(Ns) * samples_per_modulus,
        nontrivial=sum(v[1] for v in by_mod.values()),
        primitive=sum(v[2] for v in by_mod.values()),
        d_distribution=dist,
        by_modulus={N: tuple(v) for N, v in by_mod.items()},
    )


@dataclass(frozen=True)
class TheoryComparison:
    rows: list[tuple[int, int, float, float, float, float, float]]
    max_deviation: float

    def row(self, r: int):
        return next(x for x in self.rows if x[0] == r)


def compare_counts(counts: Counter, samples: int, a: float, r_max: int | None = None) -> TheoryComparison:
    """Per-``r`` rows ``(r, count, freq, theory, |freq - theory|, se, z)``.

    ``se = sqrt(theory (1 - theory) / samples)``; where ``se`` is zero the
    z-score is 0 for an exact match and infinite otherwise.
    """
    top = max([r_max or 1, *counts])
    rows = []
    for r in range(1, top + 1):
        cnt = counts.get(r, 0)
        freq = cnt / samples
        th = c2r_closed(a, r)
        dev = abs(freq - th)
        se = math.sqrt(th * (1 - th) / samples)
        if se > 0:
            z = (freq - th) / se
        else:
            z = 0.0 if dev == 0 else math.inf
        rows.append((r, cnt, freq, th, dev, se, z))
    return TheoryComparison(rows, max(x[4] for x in rows))


def compare_to_theory(dist: RDistribution, a: float, r_max: int | None = None) -> TheoryComparison:
    if dist.n != 2:
        raise InvalidInputError("closed forms exist for n = 2 only")
    return compare_counts(dist.counts, dist.samples, a, r_max)


def total_variation(p: Counter, q: Counter) -> float:
    sp, sq = sum(p.values()), sum(q.values())
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0) / sp - q.get(k, 0) / sq) for k in keys)
