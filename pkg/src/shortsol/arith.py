"""
Integer and modular arithmetic shared by the rest of the package.

Everything here is deterministic. Random draws go through `SeededStream`,
which wraps numpy's Philox4x64 counter-based generator keyed by
``(master_seed, stream_index)``; the key is 128 bits wide and the counter
256 bits, so each stream is a pure function of its two integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from .errors import InvalidInputError

MAX_MODULUS = 2**63 - 1
TRIAL_DIVISION_LIMIT = 10**6
_MASK64 = 2**64 - 1

# Witness set that makes Miller-Rabin deterministic below 2**64.
_MR_WITNESSES = (2, 325, 9375, 28178, 450775, 9780504, 1795265022)


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended Euclid: return ``(d, u, v)`` with ``d = gcd(a, b) >= 0`` and
    ``a*u + b*v == d``. ``ext_gcd(0, 0) == (0, 0, 0)``."""
    if a == 0 and b == 0:
        return 0, 0, 0
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def gcd_many(values: Iterable[int]) -> int:
    return math.gcd(*values)


def inverse_mod(a: int, n: int) -> int:
    d, u, _ = ext_gcd(a % n, n)
    if d != 1:
        raise InvalidInputError(f"{a} is not invertible modulo {n}")
    return u % n


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every ``n < 2**64``."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=1)
def _small_primes() -> np.ndarray:
    limit = TRIAL_DIVISION_LIMIT
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def _pollard_brent(n: int) -> int:
    """Return a nontrivial factor of the odd composite ``n``."""
    for c in range(1, 200):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise RuntimeError(f"Pollard rho failed to split {n}")


def _factor_large(n: int, out: dict[int, int]) -> None:
    # n has no prime factor below TRIAL_DIVISION_LIMIT
    if n == 1:
        return
    if n < TRIAL_DIVISION_LIMIT**2 or is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    f = _pollard_brent(n)
    _factor_large(f, out)
    _factor_large(n // f, out)


@dataclass(frozen=True)
class Modulus:
    """A modulus ``N >= 2`` together with its prime factorization."""

    value: int
    factorization: tuple[tuple[int, int], ...] = field(compare=False)

    def __post_init__(self):
        if not 2 <= self.value <= MAX_MODULUS:
            raise InvalidInputError(f"modulus must lie in [2, 2**63-1], got {self.value}")
        prod = 1
        last = 1
        for p, e in self.factorization:
            if p <= last or e < 1:
                raise InvalidInputError("factorization must have increasing primes, exponents >= 1")
            prod *= p**e
            last = p
        if prod != self.value:
            raise InvalidInputError("factorization does not multiply out to the modulus")

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factorization)

    @property
    def is_prime(self) -> bool:
        return len(self.factorization) == 1 and self.factorization[0][1] == 1

    @property
    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factorization)

    @property
    def euler_phi(self) -> int:
        phi = 1
        for p, e in self.factorization:
            phi *= (p - 1) * p ** (e - 1)
        return phi

    @property
    def sigma(self) -> int:
        s = 1
        for p, e in self.factorization:
            s *= (p ** (e + 1) - 1) // (p - 1)
        return s

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.factorization:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


@lru_cache(maxsize=4096)
def factorize(n: int) -> Modulus:
    """Factor ``2 <= n <= 2**63 - 1``: trial division by primes up to 10**6,
    then Pollard-Brent on whatever is left."""
    n = int(n)
    if not 2 <= n <= MAX_MODULUS:
        raise InvalidInputError(f"factorize needs 2 <= n <= 2**63-1, got {n}")
    found: dict[int, int] = {}
    m = n
    primes = _small_primes()
    bound = min(TRIAL_DIVISION_LIMIT, math.isqrt(m))
    cand = primes[: np.searchsorted(primes, bound, side="right")]
    if len(cand):
        hits = cand[np.int64(m) % cand == 0]
        for p in hits.tolist():
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m <= TRIAL_DIVISION_LIMIT:
            found[m] = found.get(m, 0) + 1
        else:
            _factor_large(m, found)
    return Modulus(n, tuple(sorted(found.items())))


ModulusLike = Union[int, Modulus]


def as_modulus(N: ModulusLike) -> Modulus:
    if isinstance(N, Modulus):
        return N
    return factorize(int(N))


def centered_rep(x: int, N: ModulusLike) -> int:
    """Representative of ``x mod N`` in ``(-N/2, N/2]``."""
    n = int(N)
    r = x % n
    if 2 * r > n:
        r -= n
    return r


@dataclass(frozen=True)
class SeededStream:
    """Deterministic random stream indexed by ``(master_seed, stream_index)``."""

    master_seed: int
    stream_index: int
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.stream_index < 0 or self.stream_index >= 2**64:
            raise InvalidInputError("stream_index must lie in [0, 2**64)")
        key = (self.master_seed & _MASK64) | (self.stream_index << 64)
        object.__setattr__(self, "_gen", np.random.Generator(np.random.Philox(key=key)))

    def integers(self, low: int, high: int, size=None):
        """Uniform integers in ``[low, high)``; python ints when ``size`` is None."""
        out = self._gen.integers(low, high, size=size, dtype=np.int64)
        if size is None:
            return int(out)
        return out

    def vector(self, low: int, high: int, size: int) -> list[int]:
        return self._gen.integers(low, high, size=size, dtype=np.int64).tolist()

    def random(self) -> float:
        return float(self._gen.random())


def derive_stream(seed: int, shard: int) -> SeededStream:
    return SeededStream(seed, shard)


def integer_root_floor(x: int, k: int) -> int:
    """Largest ``m >= 0`` with ``m**k <= x``."""
    if x < 0:
        raise InvalidInputError("integer_root_floor needs x >= 0")
    if k == 1 or x < 2:
        return x
    if k == 2:
        return math.isqrt(x)
    m = int(round(x ** (1.0 / k)))
    while m**k > x:
        m -= 1
    while (m + 1) ** k <= x:
        m += 1
    return m


def rank_mod_p(rows: list[list[int]], p: int) -> int:
    """Rank of an integer matrix over the field F_p."""
    mat = [[v % p for v in row] for row in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = pow(mat[rank][col], -1, p)
        mat[rank] = [v * inv % p for v in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                c = mat[i][col]
                mat[i] = [(vi - c * vr) % p for vi, vr in zip(mat[i], mat[rank])]
        rank += 1
    return rank
