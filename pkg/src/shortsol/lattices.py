"""
Sublattices of Z^n attached to congruence systems.

Bases are stored column-style: the columns of an upper-triangular integer
matrix ``H`` generate the lattice, ``H[i][i] > 0`` and ``0 <= H[i][k] < H[i][i]``
for ``k > i``.  In dimension two this is ``[[d, a], [0, N/d]]``, i.e. the
lattice ``Z(d, 0) + Z(a, N/d)`` with ``0 <= a < d``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .arith import Modulus, ModulusLike, as_modulus, ext_gcd, inverse_mod
from .errors import (
    DegenerateBasisError,
    FormulaInapplicableError,
    InvalidInputError,
    SizeLimitError,
)
from .solver import BoxSpec, CongruenceSystem, count_points_2d, gauss_reduce_2d, _box_chunks

D_N_LIMIT = 10**7
ORBIT_LIMIT = 10**6

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class SublatticeBasis2D:
    """The index-``N`` lattice ``Z(d, 0) + Z(a, N/d)``."""

    N: int
    d: int
    a: int

    def __post_init__(self):
        if self.N < 1 or self.N % self.d or not 0 <= self.a < self.d:
            raise InvalidInputError(f"need d | N and 0 <= a < d, got N={self.N}, d={self.d}, a={self.a}")

    @property
    def matrix(self) -> Matrix:
        return ((self.d, self.a), (0, self.N // self.d))

    def contains(self, x: int, y: int) -> bool:
        e = self.N // self.d
        return y % e == 0 and (x - (y // e) * self.a) % self.d == 0


@dataclass(frozen=True)
class SnfPair:
    d1: int
    d2: int


@dataclass(frozen=True)
class HeckeOrbit:
    """All ``L`` with ``Z^n / L = (Z/N)^j``; ``members`` has shape ``(m, n, n)``."""

    n: int
    j: int
    N: int
    members: np.ndarray

    def __len__(self) -> int:
        return len(self.members)

    def bases(self) -> list[Matrix]:
        return [tuple(map(tuple, m)) for m in self.members.tolist()]


# -- normal forms --------------------------------------------------------------


def hermite_normal_form(columns: Sequence[Sequence[int]], n: int | None = None) -> Matrix:
    """Canonical basis of the lattice spanned by ``columns`` (full rank required)."""
    cols = [list(map(int, c)) for c in columns]
    if n is None:
        n = len(cols[0])
    pivots: list[list[int] | None] = [None] * n
    for i in range(n - 1, -1, -1):
        while True:
            nz = [c for c in cols if c[i]]
            if len(nz) <= 1:
                break
            p = min(nz, key=lambda c: abs(c[i]))
            for c in nz:
                if c is not p:
                    q = c[i] // p[i]
                    for t in range(n):
                        c[t] -= q * p[t]
        nz = [c for c in cols if c[i]]
        if not nz:
            raise DegenerateBasisError("generators do not span a full-rank lattice")
        p = nz[0]
        cols = [c for c in cols if c is not p and any(c)]
        if p[i] < 0:
            p = [-v for v in p]
        pivots[i] = p
    H = [[pivots[k][i] for k in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(k - 1, -1, -1):
            q = H[i][k] // H[i][i]
            if q:
                for t in range(i + 1):
                    H[t][k] -= q * H[t][i]
    return tuple(tuple(r) for r in H)


def invariant_factors(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Smith invariant factors ``d1 | d2 | ...`` of an integer matrix."""
    A = [list(map(int, r)) for r in matrix]
    rows, cols = len(A), len(A[0])
    out = []
    for t in range(min(rows, cols)):
        entries = [(abs(A[i][k]), i, k) for i in range(t, rows) for k in range(t, cols) if A[i][k]]
        if not entries:
            break
        _, i, k = min(entries)
        A[t], A[i] = A[i], A[t]
        for r in A:
            r[t], r[k] = r[k], r[t]
        while True:
            done = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        done = False
            for k in range(t + 1, cols):
                if A[t][k]:
                    q = A[t][k] // A[t][t]
                    for r in A:
                        r[k] -= q * r[t]
                    if A[t][k]:
                        for r in A:
                            r[t], r[k] = r[k], r[t]
                        done = False
            if not done:
                continue
            bad = next(
                (i for i in range(t + 1, rows) for k in range(t + 1, cols) if A[i][k] % A[t][t]),
                None,
            )
            if bad is None:
                break
            A[t] = [x + y for x, y in zip(A[t], A[bad])]
        out.append(abs(A[t][t]))
    return out


# -- dimension two ---------------------------------------------------------------


def enumerate_D_N(N: ModulusLike) -> list[SublatticeBasis2D]:
    """Every index-``N`` sublattice of Z^2, once each (``sigma(N)`` of them)."""
    M = as_modulus(N)
    if M.sigma > D_N_LIMIT:
        raise SizeLimitError(f"sigma({M.value}) = {M.sigma} exceeds {D_N_LIMIT}")
    return [SublatticeBasis2D(M.value, d, a) for d in M.divisors() for a in range(d)]


def snf_2x2(basis: SublatticeBasis2D) -> SnfPair:
    g = math.gcd(basis.a, basis.d, basis.N // basis.d)
    return SnfPair(g, basis.N // g)


def is_cyclic_quotient(basis: SublatticeBasis2D) -> bool:
    return snf_2x2(basis).d1 == 1


def bad_set_T(N: ModulusLike) -> list[SublatticeBasis2D]:
    """Index-``N`` lattices that are the kernel of no normalized congruence."""
    return [b for b in enumerate_D_N(N) if not is_cyclic_quotient(b)]


def _kernel_generators(rows: Sequence[Sequence[int]], N: int) -> list[list[int]]:
    # integer kernel of [A | N I_j], projected onto the first n coordinates
    j, n = len(rows), len(rows[0])
    B = [list(map(int, r)) + [N if t == i else 0 for t in range(j)] for i, r in enumerate(rows)]
    w = n + j
    U = [[int(i == k) for k in range(w)] for i in range(w)]
    for r in range(j):
        while True:
            nz = [k for k in range(r, w) if B[r][k]]
            if len(nz) <= 1:
                break
            p = min(nz, key=lambda k: abs(B[r][k]))
            for k in nz:
                if k != p:
                    q = B[r][k] // B[r][p]
                    for i in range(j):
                        B[i][k] -= q * B[i][p]
                    for i in range(w):
                        U[i][k] -= q * U[i][p]
        p = next(k for k in range(r, w) if B[r][k])
        for M in (B, U):
            for row in M:
                row[r], row[p] = row[p], row[r]
    return [[U[i][k] for i in range(n)] for k in range(j, w)]


def lattice_from_congruence(system: CongruenceSystem):
    """Canonical basis of ``pi_N^{-1}(H_A)``.

    Returns a `SublatticeBasis2D` for ``n = 2`` and the triangular matrix
    for ``3 <= n <= 4``.
    """
    if system.n > 4:
        raise InvalidInputError("lattice_from_congruence supports n <= 4")
    N = system.N
    gens = _kernel_generators(system.rows, N)
    gens += [[N * int(i == k) for i in range(system.n)] for k in range(system.n)]
    H = hermite_normal_form(gens, system.n)
    if system.n == 2:
        return SublatticeBasis2D(N, H[0][0], H[0][1])
    return H


def congruence_from_lattice(basis: SublatticeBasis2D) -> tuple[int, int] | None:
    """A row ``(N/d, -a + k d)`` with kernel ``basis``, or None when the lattice is in T.

    ``k`` is the smallest nonnegative integer making the row coprime to N.
    """
    N, d, a = basis.N, basis.d, basis.a
    e = N // d
    if math.gcd(a, d, e) != 1:
        return None
    # gcd(e, -a + k d) is periodic in k with period e
    for k in range(e + 1):
        B = -a + k * d
        if math.gcd(e, B) == 1:
            return e % N, B % N
    raise RuntimeError(f"no unit found for {basis}; the lattice should be in T")


# -- counting --------------------------------------------------------------------


def _q_bracket(i: int, p: int) -> int:
    return (p**i - 1) // (p - 1)


def grassmannian_size(n: int, k: int, p: int) -> int:
    """Number of ``k``-dimensional subspaces of ``F_p^n`` (Gaussian binomial)."""
    if not 0 <= k <= n:
        raise InvalidInputError(f"need 0 <= k <= n, got n={n}, k={k}")
    num = math.prod(_q_bracket(i, p) for i in range(1, n + 1))
    den = math.prod(_q_bracket(i, p) for i in range(1, k + 1)) * math.prod(
        _q_bracket(i, p) for i in range(1, n - k + 1)
    )
    return num // den


def count_L(n: int, j: int, N: ModulusLike, square_free_required: bool = True) -> int:
    """Product over ``p | N`` of ``|Gr_n(j, p)|``; exact for square-free ``N``."""
    M = as_modulus(N)
    if square_free_required and not M.is_squarefree:
        raise FormulaInapplicableError(f"N = {M.value} is not square-free")
    return math.prod(grassmannian_size(n, j, p) for p in M.primes)


# -- Hecke orbits ------------------------------------------------------------------


def _diagonals(n: int, target: int, divisors: list[int]):
    if n == 1:
        if target in divisors:
            yield (target,)
        return
    for d in divisors:
        if target % d == 0:
            for rest in _diagonals(n - 1, target // d, divisors):
                yield (d,) + rest


def _expand_diagonal(diag: tuple[int, ...], N: int, budget: int) -> np.ndarray:
    """All triangular bases with this diagonal whose lattice contains ``N Z^n``."""
    n = len(diag)
    F = np.zeros((1, n, n), dtype=np.int64)
    F[0, 0, 0] = diag[0]
    for k in range(1, n):
        m = N // diag[k]
        src = np.arange(len(F))
        Hk = np.zeros((len(F), k), dtype=np.int64)
        Rz = np.zeros((len(F), k), dtype=np.int64)
        for i in range(k - 1, -1, -1):
            di = diag[i]
            g = math.gcd(m, di)
            step = di // g
            t = Rz[:, i]
            ok = t % g == 0
            src, Hk, Rz, t = src[ok], Hk[ok], Rz[ok], t[ok]
            inv = inverse_mod(m // g, step) if step > 1 else 0
            h0 = ((t // g) % step) * inv % step if step > 1 else np.zeros_like(t)
            if g > 1:
                if len(src) * g > budget:
                    raise SizeLimitError(f"orbit enumeration exceeds the guard {ORBIT_LIMIT}")
                shift = np.tile(np.arange(g, dtype=np.int64) * step, len(src))
                src, Hk, Rz, h0 = (np.repeat(x, g, axis=0) for x in (src, Hk, Rz, h0))
                h = h0 + shift
            else:
                h = h0
            Hk = Hk.copy()
            Hk[:, i] = h
            z = (m * h - Rz[:, i]) // di
            Rz = Rz + z[:, None] * F[src, :k, i]
        F = F[src].copy()
        F[:, :k, k] = Hk
        F[:, k, k] = diag[k]
    return F


def _minor_gcd(F: np.ndarray, size: int) -> np.ndarray:
    n = F.shape[1]
    G = np.zeros(len(F), dtype=F.dtype)
    for rs in itertools.combinations(range(n), size):
        for cs in itertools.combinations(range(n), size):
            sub = F[:, rs][:, :, cs]
            G = np.gcd(G, _det_batch(sub))
    return G


def _det_batch(S: np.ndarray) -> np.ndarray:
    k = S.shape[1]
    if k == 1:
        return S[:, 0, 0]
    if k == 2:
        return S[:, 0, 0] * S[:, 1, 1] - S[:, 0, 1] * S[:, 1, 0]
    total = np.zeros(len(S), dtype=S.dtype)
    for c in range(k):
        rest = [x for x in range(k) if x != c]
        sign = -1 if c % 2 else 1
        total = total + sign * S[:, 0, c] * _det_batch(S[:, 1:][:, :, rest])
    return total


def enumerate_hecke_orbit(n: int, j: int, N: ModulusLike, limit: int = ORBIT_LIMIT) -> HeckeOrbit:
    """Every sublattice ``L`` of Z^n with ``Z^n / L`` isomorphic to ``(Z/N)^j``.

    Such an ``L`` contains ``N Z^n`` and has determinant ``N^j``; bases are
    grown column by column keeping only extensions compatible with
    ``N e_k in L``.  Among those, the quotient is ``(Z/N)^j`` exactly when the
    ``(n-j)``-minors of the basis are coprime.
    """
    if not 2 <= n <= 4 or not 1 <= j <= n - 1:
        raise InvalidInputError(f"need 2 <= n <= 4 and 1 <= j <= n-1, got n={n}, j={j}")
    M = as_modulus(N)
    Nv = M.value
    if math.factorial(n - j) * Nv ** (n - j) >= 2**62 or Nv >= 2**31:
        raise SizeLimitError("orbit entries too large for the int64 minor test")
    parts = []
    total = 0
    for diag in _diagonals(n, Nv**j, M.divisors()):
        F = _expand_diagonal(diag, Nv, limit - total)
        F = F[_minor_gcd(F, n - j) == 1]
        total += len(F)
        if total > limit:
            raise SizeLimitError(f"orbit size exceeds the guard {limit}")
        parts.append(F)
    members = np.concatenate(parts) if parts else np.zeros((0, n, n), dtype=np.int64)
    return HeckeOrbit(n, j, Nv, members)


def lattice_point_count(H: Sequence[Sequence[int]], bounds: tuple[int, ...]) -> int:
    """Points of the lattice with triangular basis ``H`` inside ``|x_i| <= bounds[i]``."""
    n = len(H)
    if n == 2:
        b1, b2 = gauss_reduce_2d((H[0][0], H[1][0]), (H[0][1], H[1][1]))
        return count_points_2d(b1, b2, bounds)
    total = 0
    for pts in _box_chunks(tuple(bounds)):
        R = pts.copy()
        ok = np.ones(len(R), dtype=bool)
        for i in range(n - 1, -1, -1):
            ok &= R[:, i] % H[i][i] == 0
            z = R[:, i] // H[i][i]
            for t in range(i + 1):
                R[:, t] -= z * H[t][i]
        total += int(ok.sum())
    return total


def hecke_counts(orbit: HeckeOrbit, box: BoxSpec) -> np.ndarray:
    """Point count of each orbit member inside the ``N^(j/n)``-scaled box."""
    bounds = box.bounds(orbit.N, orbit.n, orbit.j)
    return np.array([lattice_point_count(H, bounds) for H in orbit.members.tolist()], dtype=np.int64)


def hecke_mean(orbit: HeckeOrbit, box: BoxSpec, f: Callable[[int], float]) -> float:
    if not len(orbit):
        raise InvalidInputError("empty orbit")
    counts = hecke_counts(orbit, box)
    return math.fsum(f(int(c)) for c in counts) / len(counts)


def hecke_average(orbit: HeckeOrbit, box: BoxSpec, r: int) -> float:
    """Fraction of orbit members with exactly ``r`` points in the box."""
    if not len(orbit):
        raise InvalidInputError("empty orbit")
    counts = hecke_counts(orbit, box)
    return float(np.count_nonzero(counts == r)) / len(counts)
