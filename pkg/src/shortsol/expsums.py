"""
Binomial exponential sums ``S = sum_{x in F_p^*} e_p(a1 h1^x + a2 h2^x)``.

Writing ``h_i = g^{r_i}`` for a primitive root ``g`` turns the sum into
``sum_y e_p(a1 y^{r1} + a2 y^{r2})``.  Replacing ``y`` by ``y^k`` for a unit
``k`` mod ``p - 1`` permutes ``F_p^*``, so the exponents may be shrunk by the
best unit before applying a degree bound; that minimization is a short
solution problem for one congruence modulo ``p - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import derive_stream, factorize, is_prime
from .errors import DomainError, InvalidInputError, SamplingError, SizeLimitError
from .montecarlo import _map, pick_moduli

PRIMITIVE_ROOT_LIMIT = 2**32
DIRECT_SUM_LIMIT = 2**20
MAX_A_REJECTIONS = 10**5


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise InvalidInputError(f"{p} is not prime")


def primitive_root(p: int) -> int:
    """Smallest positive generator of ``F_p^*``."""
    _check_prime(p)
    if p > PRIMITIVE_ROOT_LIMIT:
        raise SizeLimitError(f"primitive_root is limited to p <= 2**32, got {p}")
    if p == 2:
        return 1
    qs = factorize(p - 1).primes
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


def discrete_log(p: int, g: int, h: int) -> int:
    """The ``e`` in ``{1, ..., p-1}`` with ``g**e == h (mod p)``, by baby-step giant-step."""
    h %= p
    if h == 0:
        raise DomainError("discrete log of 0 is undefined")
    m = p - 1
    if m == 1:
        return 1
    step = math.isqrt(m - 1) + 1
    baby = {}
    cur = 1
    for i in range(step):
        baby.setdefault(cur, i)
        cur = cur * g % p
    giant = pow(g, -step, p)
    y = h
    for k in range(step + 1):
        i = baby.get(y)
        if i is not None:
            e = (k * step + i) % m
            return e if e else m
        y = y * giant % p
    raise DomainError(f"{h} is not a power of {g} modulo {p}")


def is_in_A(p: int, h1: int, h2: int, g: int | None = None) -> bool:
    """Whether ``h1, h2`` are ``g^{r1}, g^{r2}`` with ``gcd(r1, r2, p-1) = 1``."""
    if h1 % p == 0 or h2 % p == 0:
        raise DomainError("h1 and h2 must be nonzero modulo p")
    if g is None:
        g = primitive_root(p)
    r1 = discrete_log(p, g, h1)
    r2 = discrete_log(p, g, h2)
    return math.gcd(r1, r2, p - 1) == 1


def _powers_of(h: int, p: int) -> np.ndarray:
    """``h**x mod p`` for ``x = 1, ..., p-1``."""
    m = p - 1
    b = math.isqrt(m) + 1
    small = np.empty(b, dtype=np.int64)
    small[0] = 1
    for i in range(1, b):
        small[i] = small[i - 1] * h % p
    hb = pow(h, b, p)
    big = np.empty(b + 1, dtype=np.int64)
    big[0] = 1
    for i in range(1, b + 1):
        big[i] = big[i - 1] * hb % p
    x = np.arange(1, m + 1, dtype=np.int64)
    return big[x // b] * small[x % b] % p


def _power_map(y: np.ndarray, e: int, p: int) -> np.ndarray:
    """Elementwise ``y**e mod p``."""
    out = np.ones_like(y)
    base = y.copy()
    while e:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    return out


def _phase_sum(t: np.ndarray, p: int) -> complex:
    theta = (2 * np.pi / p) * t
    return complex(math.fsum(np.cos(theta)), math.fsum(np.sin(theta)))


def binomial_sum(p: int, a1: int, a2: int, h1: int, h2: int, form: str = "x", g: int | None = None) -> complex:
    """Evaluate the sum directly over ``x`` or, with ``form="y"``, over ``y = g^x``."""
    if p > DIRECT_SUM_LIMIT:
        raise SizeLimitError(f"direct summation is limited to p <= 2**20, got {p}")
    _check_prime(p)
    if h1 % p == 0 or h2 % p == 0:
        raise DomainError("h1 and h2 must be nonzero modulo p")
    a1 %= p
    a2 %= p
    if form == "x":
        t = (a1 * _powers_of(h1 % p, p) + a2 * _powers_of(h2 % p, p)) % p
    elif form == "y":
        if g is None:
            g = primitive_root(p)
        r1 = discrete_log(p, g, h1)
        r2 = discrete_log(p, g, h2)
        y = np.arange(1, p, dtype=np.int64)
        t = (a1 * _power_map(y, r1, p) + a2 * _power_map(y, r2, p)) % p
    else:
        raise InvalidInputError(f"form must be 'x' or 'y', got {form!r}")
    return _phase_sum(t, p)


def minimize_exponents(p: int, r1: int, r2: int) -> tuple[int, int, int, int]:
    """``(k_unsigned, M_unsigned, k_signed, M_signed)`` over units ``k`` mod ``p-1``.

    ``M_unsigned`` takes representatives in ``{1, ..., p-1}``, ``M_signed``
    the absolute values of centered ones.  Ties go to the smallest ``k``.
    """
    m = p - 1
    if math.gcd(r1, r2, m) != 1:
        raise DomainError(f"gcd(r1, r2, p-1) must be 1, got r=({r1}, {r2}), p={p}")
    if m == 1:
        return 1, 1, 1, 0
    k = np.arange(1, m, dtype=np.int64)
    k = k[np.gcd(k, m) == 1]
    e = np.stack([k * (r1 % m) % m, k * (r2 % m) % m])
    unsigned = np.where(e == 0, m, e).max(axis=0)
    centered = np.where(2 * e > m, e - m, e)
    signed = np.abs(centered).max(axis=0)
    iu = int(np.argmin(unsigned))
    is_ = int(np.argmin(signed))
    return int(k[iu]), int(unsigned[iu]), int(k[is_]), int(signed[is_])


@dataclass(frozen=True)
class ExpSumRecord:
    p: int
    g: int
    h1: int
    h2: int
    r1: int
    r2: int
    a1: int
    a2: int
    abs_S: float
    weil_bound: float
    M_unsigned: int
    M_signed: int
    improved_holds: bool
    form_gap: float = 0.0

    @property
    def degenerate(self) -> bool:
        """Phase polynomial vanishes identically, so ``|S| = p - 1``."""
        return (self.a1 == 0 and self.a2 == 0) or (self.h1 == self.h2 and (self.a1 + self.a2) % self.p == 0)


@dataclass(frozen=True)
class BoundSummary:
    records: list[ExpSumRecord]
    a: float
    checked: int
    excluded: int
    weil_ok: bool
    improved_count: int
    improved_bound_ok: bool
    max_form_gap: float

    @property
    def fraction_improved(self) -> float:
        return self.improved_count / len(self.records) if self.records else 0.0


def _improved(M_signed: int, a: float, p: int) -> bool:
    # M <= sqrt(a) sqrt(p-1) / 2, compared without rounding
    return 4 * M_signed * M_signed <= Fraction(a) * (p - 1)


def _expsum_task(task) -> list[ExpSumRecord]:
    p, a, seed, base, samples = task
    g = primitive_root(p)
    out = []
    for s in range(samples):
        stream = derive_stream(seed, base + s)
        for _ in range(MAX_A_REJECTIONS):
            h1, h2 = stream.vector(1, p, 2)
            r1 = discrete_log(p, g, h1)
            r2 = discrete_log(p, g, h2)
            if math.gcd(r1, r2, p - 1) == 1:
                break
        else:
            raise SamplingError(f"no pair in A found modulo {p}")
        a1, a2 = stream.vector(0, p, 2)
        Sx = binomial_sum(p, a1, a2, h1, h2, "x")
        Sy = binomial_sum(p, a1, a2, h1, h2, "y", g=g)
        _, Mu, _, Ms = minimize_exponents(p, r1, r2)
        out.append(
            ExpSumRecord(
                p=p, g=g, h1=h1, h2=h2, r1=r1, r2=r2, a1=a1, a2=a2,
                abs_S=abs(Sx),
                weil_bound=math.sqrt(p) * Mu,
                M_unsigned=Mu,
                M_signed=Ms,
                improved_holds=_improved(Ms, a, p),
                form_gap=abs(Sx - Sy),
            )
        )
    return out


def bound_experiment(
    lo: int,
    hi: int,
    count: int,
    a: float,
    samples_per_prime: int,
    seed: int,
    workers: int = 1,
) -> BoundSummary:
    """Sample ``count`` distinct primes in ``[lo, hi]`` and pairs in A for each.

    Records whose phase polynomial is identically zero are excluded from the
    bound checks; for the rest ``|S| <= sqrt(p) M_unsigned`` is checked, and
    ``|S| <= (sqrt(a)/2) p`` on every record where ``improved_holds``.
    """
    if not 0 < a <= 2:
        raise DomainError(f"a must lie in (0, 2], got {a}")
    if hi > DIRECT_SUM_LIMIT:
        raise SizeLimitError(f"primes must stay below 2**20 for direct summation, got hi={hi}")
    primes = [M.value for M in pick_moduli("prime", lo, hi, count, seed)]
    tasks = [(p, a, seed, i * samples_per_prime, samples_per_prime) for i, p in enumerate(primes)]
    records = [r for chunk in _map(_expsum_task, tasks, workers) for r in chunk]
    live = [r for r in records if not r.degenerate]
    tol = 1e-9
    weil_ok = all(r.abs_S <= r.weil_bound + tol for r in live)
    improved = [r for r in records if r.improved_holds]
    improved_ok = all(r.abs_S <= math.sqrt(a) / 2 * r.p + tol for r in improved if not r.degenerate)
    return BoundSummary(
        records=records,
        a=a,
        checked=len(live),
        excluded=len(records) - len(live),
        weil_ok=weil_ok,
        improved_count=len(improved),
        improved_bound_ok=improved_ok,
        max_form_gap=max((r.form_gap for r in records), default=0.0),
    )
