"""
Homogeneous linear congruences ``A x = 0 (mod N)``.

A system is a ``j x n`` residue matrix.  Its solutions in ``(Z/N)^n`` form the
group ``H_A``; the integer points reducing into ``H_A`` form the lattice
``L = pi_N^{-1}(H_A)`` of index ``N^j``.  Counting "solutions in a box" means
counting points of ``L`` (zero included) strictly inside a centered box.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .arith import (
    Modulus,
    ModulusLike,
    as_modulus,
    centered_rep,
    ext_gcd,
    integer_root_floor,
    inverse_mod,
    rank_mod_p,
)
from .errors import (
    DegenerateBasisError,
    DomainError,
    InvalidInputError,
    NormalizationError,
    SizeLimitError,
)

BRUTE_FORCE_LIMIT = 10**8
BOX_POINT_LIMIT = 10**9
_CHUNK_POINTS = 2 * 10**6


@dataclass(frozen=True)
class CongruenceSystem:
    """``rows`` is the ``j x n`` coefficient matrix, entries reduced into ``[0, N)``.

    Construction enforces the normalized setup: every row is coprime to
    ``N`` and the matrix has rank ``j`` modulo each prime dividing ``N``.
    """

    modulus: Modulus
    rows: tuple[tuple[int, ...], ...]

    def __init__(self, rows: Sequence[Sequence[int]], modulus: ModulusLike, check: bool = True):
        N = as_modulus(modulus)
        reduced = tuple(tuple(int(v) % N.value for v in row) for row in rows)
        object.__setattr__(self, "modulus", N)
        object.__setattr__(self, "rows", reduced)
        if check:
            self._validate()

    def _validate(self):
        if not self.rows:
            raise InvalidInputError("a system needs at least one row")
        n = len(self.rows[0])
        if n < 2 or any(len(r) != n for r in self.rows):
            raise InvalidInputError("rows must share a length n >= 2")
        if not 1 <= self.j <= n - 1:
            raise InvalidInputError(f"need 1 <= j <= n-1, got j={self.j}, n={n}")
        N = self.modulus.value
        for row in self.rows:
            if math.gcd(N, *row) != 1:
                raise NormalizationError(
                    f"gcd of row {row} with N={N} is {math.gcd(N, *row)}; divide it out first"
                )
        if self.j > 1:
            for p in self.modulus.primes:
                if rank_mod_p([list(r) for r in self.rows], p) != self.j:
                    raise InvalidInputError(f"rows do not have rank {self.j} modulo {p}")

    @property
    def N(self) -> int:
        return self.modulus.value

    @property
    def n(self) -> int:
        return len(self.rows[0])

    @property
    def j(self) -> int:
        return len(self.rows)

    def contains(self, x: Sequence[int]) -> bool:
        N = self.N
        return all(sum(a * xi for a, xi in zip(row, x)) % N == 0 for row in self.rows)


@dataclass(frozen=True)
class SolutionPoint:
    coords: tuple[int, ...]

    @property
    def sup_norm(self) -> int:
        return max(abs(c) for c in self.coords)


@dataclass(frozen=True)
class UnimodularTransform:
    """Integer ``n x n`` matrix with determinant ``det_sign`` (exactly, over Z)."""

    matrix: tuple[tuple[int, ...], ...]
    det_sign: int

    def apply_row(self, row: Sequence[int]) -> list[int]:
        n = len(self.matrix)
        return [sum(row[i] * self.matrix[i][k] for i in range(n)) for k in range(n)]

    def apply_col(self, col: Sequence[int]) -> list[int]:
        return [sum(m * c for m, c in zip(mrow, col)) for mrow in self.matrix]

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=object)


# -- boxes -------------------------------------------------------------------

_SHAPES = ("rect", "square", "cube")


def _max_below_sqrt(X: Fraction) -> int:
    # largest m >= 0 with m*m < X, for X > 0
    return math.isqrt(math.ceil(X) - 1)


@dataclass(frozen=True)
class BoxSpec:
    """An open box centered at the origin, scaled with the modulus.

    ``rect``   ``(-sqrt(N)/2, sqrt(N)/2) x (-a sqrt(N)/2, a sqrt(N)/2)``
    ``square`` ``(-sqrt(aN)/2, sqrt(aN)/2)^2``
    ``cube``   ``(-D N^(j/n), D N^(j/n))^n``
    """

    shape: str
    a: float | None = None
    D: float | None = None

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise InvalidInputError(f"unknown box shape {self.shape!r}")
        if self.shape in ("rect", "square"):
            if self.a is None or not 0 < self.a <= 2:
                raise DomainError(f"box aspect a must lie in (0, 2], got {self.a}")
        elif self.D is None or not 0 < self.D < 1:
            raise DomainError(f"cube scale D must lie in (0, 1), got {self.D}")

    @classmethod
    def rect(cls, a: float) -> "BoxSpec":
        return cls("rect", a=a)

    @classmethod
    def square(cls, a: float) -> "BoxSpec":
        return cls("square", a=a)

    @classmethod
    def cube(cls, D: float) -> "BoxSpec":
        return cls("cube", D=D)

    def check_compatible(self, n: int, j: int) -> None:
        if self.shape != "cube" and n != 2:
            raise InvalidInputError(f"{self.shape} boxes are two-dimensional; got n={n}")

    def bounds(self, N: int, n: int = 2, j: int = 1) -> tuple[int, ...]:
        """Largest admissible ``|x_i|`` per axis, computed exactly.

        Membership is strict, so a coordinate equal to the half-width is out.
        """
        N = int(N)
        self.check_compatible(n, j)
        if self.shape == "rect":
            a = Fraction(self.a)
            return (_max_below_sqrt(Fraction(N, 4)), _max_below_sqrt(a * a * N / 4))
        if self.shape == "square":
            m = _max_below_sqrt(Fraction(self.a) * N / 4)
            return (m, m)
        X = Fraction(self.D) ** n * N**j
        m = integer_root_floor(math.ceil(X) - 1, n)
        return (m,) * n

    def contains(self, x: Sequence[int], N: int, j: int = 1) -> bool:
        b = self.bounds(N, len(x), j)
        return all(abs(c) <= m for c, m in zip(x, b))

    def side_below_modulus(self, N: int, n: int = 2, j: int = 1) -> bool:
        """True when no two distinct box points are congruent mod N."""
        return all(2 * m + 1 <= int(N) for m in self.bounds(N, n, j))


# -- Bezout elimination --------------------------------------------------------


def bezout_elim_2(a: int, b: int, N: ModulusLike | None = None) -> tuple[UnimodularTransform, int]:
    """Return ``(V, d)`` with ``(a, b) V = (d, 0)``, ``d = gcd(a, b)`` and ``det V = -1``.

    ``V = [[u, b/d], [v, -a/d]]`` where ``a u + b v = d``.  ``N`` is accepted
    for symmetry with the other solvers; the identity holds over the integers.
    """
    d, u, v = ext_gcd(a, b)
    if d == 0:
        return UnimodularTransform(((1, 0), (0, -1)), -1), 0
    return UnimodularTransform(((u, b // d), (v, -a // d)), -1), d


def _matmul(X, Y):
    n = len(X)
    m = len(Y[0])
    return tuple(tuple(sum(X[i][t] * Y[t][k] for t in range(len(Y))) for k in range(m)) for i in range(n))


def reduction_matrix(row: Sequence[int], N: ModulusLike | None = None) -> tuple[UnimodularTransform, int]:
    """Unimodular ``M`` with ``row M = (d, 0, ..., 0)``, ``d = gcd(row)``.

    The last two entries are combined first, then the running gcd is pushed
    leftwards one position at a time; ``M`` is the product of the embedded
    2x2 blocks in that order.
    """
    if N is not None:
        row = [int(v) % int(N) for v in row]
    row = [int(v) for v in row]
    n = len(row)
    if n < 2:
        raise InvalidInputError("reduction_matrix needs a row of length >= 2")
    M = tuple(tuple(int(i == k) for k in range(n)) for i in range(n))
    cur = list(row)
    sign = 1
    for pos in range(n - 2, -1, -1):
        V, d = bezout_elim_2(cur[pos], cur[pos + 1])
        block = [[int(i == k) for k in range(n)] for i in range(n)]
        block[pos][pos], block[pos][pos + 1] = V.matrix[0]
        block[pos + 1][pos], block[pos + 1][pos + 1] = V.matrix[1]
        M = _matmul(M, block)
        cur[pos], cur[pos + 1] = d, 0
        sign = -sign
    return UnimodularTransform(M, sign), cur[0]


def _require_single_row(system: CongruenceSystem) -> tuple[int, ...]:
    if system.j != 1:
        raise InvalidInputError("the parametrized path covers single congruences (j = 1) only")
    return system.rows[0]


def solution_parametrization(system: CongruenceSystem) -> Iterator[tuple[int, ...]]:
    """Yield ``M (0, y_1, ..., y_{n-1})^T mod N`` for every ``y``; this is ``H_A``."""
    row = _require_single_row(system)
    N, n = system.N, system.n
    M, _ = reduction_matrix(row)
    cols = [[M.matrix[i][k] % N for i in range(n)] for k in range(1, n)]
    for y in itertools.product(range(N), repeat=n - 1):
        yield tuple(sum(c[i] * yk for c, yk in zip(cols, y)) % N for i in range(n))


def solution_array(system: CongruenceSystem) -> np.ndarray:
    """Vectorized `solution_parametrization`: an ``(N^(n-1), n)`` int64 array."""
    row = _require_single_row(system)
    N, n = system.N, system.n
    M, _ = reduction_matrix(row)
    cols = np.array([[M.matrix[i][k] % N for i in range(n)] for k in range(1, n)], dtype=np.int64)
    grids = _residue_grid(N, n - 1)
    return (grids @ cols) % N


@lru_cache(maxsize=16)
def _residue_grid(N: int, n: int) -> np.ndarray:
    axes = np.meshgrid(*([np.arange(N, dtype=np.int64)] * n), indexing="ij")
    grid = np.stack([ax.ravel() for ax in axes], axis=1)
    grid.setflags(write=False)
    return grid


def brute_force_array(system: CongruenceSystem) -> np.ndarray:
    """All of ``(Z/N)^n`` filtered by ``A x = 0``, as a lexicographically sorted array."""
    N, n = system.N, system.n
    if N**n > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f"N^n = {N**n} exceeds the brute-force guard {BRUTE_FORCE_LIMIT}")
    grid = _residue_grid(N, n)
    A = np.array(system.rows, dtype=np.int64)
    mask = ((grid @ A.T) % N == 0).all(axis=1)
    return grid[mask]


def brute_force_solutions(system: CongruenceSystem) -> set[tuple[int, ...]]:
    return set(map(tuple, brute_force_array(system).tolist()))


def solve_two_var(r1: int, r2: int, N: ModulusLike) -> tuple[int, int]:
    """Generator ``(r2, -r1 mod N)`` of the solutions of ``r1 x + r2 y = 0 (mod N)``."""
    n = int(N)
    if math.gcd(r1, r2, n) != 1:
        raise NormalizationError(f"gcd({r1}, {r2}, {n}) = {math.gcd(r1, r2, n)} > 1")
    return r2 % n, (-r1) % n


# -- two-dimensional lattices ----------------------------------------------------


def kernel_basis_2d(r1: int, r2: int, N: int) -> tuple[int, int]:
    """``(d, a)`` such that ``Z(d, 0) + Z(a, N/d)`` is the kernel lattice of ``(r1, r2)``.

    Needs ``gcd(r1, r2, N) = 1``.  ``N/d = gcd(r1, N)``, and ``a`` solves
    ``(r1/g) a = -r2 (mod d)``.
    """
    g = math.gcd(r1, N)
    d = N // g
    if d == 1:
        return 1, 0
    return d, (-r2 * inverse_mod(r1 // g, d)) % d


def gauss_reduce_2d(b1: Sequence[int], b2: Sequence[int]) -> tuple[tuple[int, int], tuple[int, int]]:
    """Lagrange-Gauss reduction: ``|b1| <= |b2| <= |b2 +- b1|`` (Euclidean)."""
    x1, y1 = int(b1[0]), int(b1[1])
    x2, y2 = int(b2[0]), int(b2[1])
    if x1 * y2 - x2 * y1 == 0:
        raise DegenerateBasisError("basis vectors are linearly dependent")
    n1 = x1 * x1 + y1 * y1
    n2 = x2 * x2 + y2 * y2
    if n2 < n1:
        x1, y1, x2, y2, n1, n2 = x2, y2, x1, y1, n2, n1
    while True:
        dot = x1 * x2 + y1 * y2
        # nearest integer to dot / n1
        q = (2 * dot + n1) // (2 * n1)
        if q:
            x2 -= q * x1
            y2 -= q * y1
            n2 = x2 * x2 + y2 * y2
        if n2 >= n1:
            return (x1, y1), (x2, y2)
        x1, y1, x2, y2, n1, n2 = x2, y2, x1, y1, n2, n1


def _ceil_div(x: int, b: int) -> int:
    return -((-x) // b)


def _u_range(b1, b2, bounds, v):
    lo, hi = None, None
    for i in (0, 1):
        c = v * b2[i]
        b = b1[i]
        m = bounds[i]
        if b == 0:
            if abs(c) > m:
                return 1, 0
            continue
        if b > 0:
            l, h = _ceil_div(-m - c, b), (m - c) // b
        else:
            l, h = _ceil_div(m - c, b), (-m - c) // b
        lo = l if lo is None else max(lo, l)
        hi = h if hi is None else min(hi, h)
    return lo, hi


def _v_bound(b1, b2, bounds) -> int:
    det = abs(b1[0] * b2[1] - b1[1] * b2[0])
    nb1 = b1[0] * b1[0] + b1[1] * b1[1]
    r2 = bounds[0] ** 2 + bounds[1] ** 2
    return math.isqrt(nb1 * r2) // det


def count_points_2d(b1, b2, bounds: tuple[int, int]) -> int:
    """Number of lattice points ``u b1 + v b2`` with ``|x_i| <= bounds[i]``.

    ``(b1, b2)`` should be Gauss reduced; otherwise the count is still exact
    but the loop over ``v`` gets long.
    """
    V = _v_bound(b1, b2, bounds)
    total = 0
    for v in range(-V, V + 1):
        lo, hi = _u_range(b1, b2, bounds, v)
        if hi >= lo:
            total += hi - lo + 1
    return total


def points_2d(b1, b2, bounds: tuple[int, int]) -> list[tuple[int, int]]:
    V = _v_bound(b1, b2, bounds)
    out = []
    for v in range(-V, V + 1):
        lo, hi = _u_range(b1, b2, bounds, v)
        for u in range(lo, hi + 1):
            out.append((u * b1[0] + v * b2[0], u * b1[1] + v * b2[1]))
    return out


def reduced_kernel_basis(r1: int, r2: int, N: int):
    d, a = kernel_basis_2d(r1, r2, N)
    return gauss_reduce_2d((d, 0), (a, N // d))


# -- box points for n >= 3 --------------------------------------------------------


@lru_cache(maxsize=32)
def _box_points(bounds: tuple[int, ...]) -> np.ndarray:
    axes = np.meshgrid(*[np.arange(-m, m + 1, dtype=np.int64) for m in bounds], indexing="ij")
    pts = np.stack([ax.ravel() for ax in axes], axis=1)
    pts.setflags(write=False)
    return pts


def _box_chunks(bounds: tuple[int, ...]) -> Iterator[np.ndarray]:
    total = math.prod(2 * m + 1 for m in bounds)
    if total > BOX_POINT_LIMIT:
        raise SizeLimitError(f"box holds {total} integer points, guard is {BOX_POINT_LIMIT}")
    if total <= _CHUNK_POINTS:
        yield _box_points(bounds)
        return
    rest = _box_points(bounds[1:]) if total // (2 * bounds[0] + 1) <= _CHUNK_POINTS else None
    if rest is None:
        for x0 in range(-bounds[0], bounds[0] + 1):
            for chunk in _box_chunks(bounds[1:]):
                yield np.hstack([np.full((len(chunk), 1), x0, dtype=np.int64), chunk])
        return
    for x0 in range(-bounds[0], bounds[0] + 1):
        yield np.hstack([np.full((len(rest), 1), x0, dtype=np.int64), rest])


def _solution_mask(system: CongruenceSystem, pts: np.ndarray) -> np.ndarray:
    N = system.N
    A = [[centered_rep(v, N) for v in row] for row in system.rows]
    span = int(np.abs(pts).max()) if len(pts) else 0
    if span * sum(abs(v) for row in A for v in row) < 2**62:
        res = pts @ np.array(A, dtype=np.int64).T
    else:
        res = pts.astype(object) @ np.array(A, dtype=object).T
    return (res % N == 0).all(axis=1)


def count_solutions_in_box(system: CongruenceSystem, box: BoxSpec) -> int:
    """Lattice points of ``pi_N^{-1}(H_A)`` strictly inside the box, zero included."""
    n, j, N = system.n, system.j, system.N
    box.check_compatible(n, j)
    bounds = box.bounds(N, n, j)
    if n == 2:
        r1, r2 = system.rows[0]
        b1, b2 = reduced_kernel_basis(r1, r2, N)
        return count_points_2d(b1, b2, bounds)
    return int(sum(int(_solution_mask(system, chunk).sum()) for chunk in _box_chunks(bounds)))


def _canonical_min(points):
    # sign-normalize (first nonzero coordinate positive), then order by (sup-norm, coords)
    best = None
    for p in points:
        lead = next((c for c in p if c), 0)
        if lead <= 0:
            continue
        key = (max(abs(c) for c in p), tuple(p))
        if best is None or key < best:
            best = key
    return best


def shortest_nontrivial(system: CongruenceSystem) -> SolutionPoint:
    """Nonzero lattice point of minimal sup-norm.

    Of the minimizers, ``x`` and ``-x`` are identified by making the first
    nonzero coordinate positive; the survivor with the smallest coordinate
    tuple wins.  The result never exceeds ``N^(j/n)`` in sup-norm.
    """
    n, j, N = system.n, system.j, system.N
    at_bound = integer_root_floor(N**j, n)
    if n == 2:
        r1, r2 = system.rows[0]
        b1, b2 = reduced_kernel_basis(r1, r2, N)
        s = max(abs(b1[0]), abs(b1[1]))
        best = _canonical_min(points_2d(b1, b2, (s, s)))
    else:
        best = None
        s = 1
        while best is None:
            s = min(s, at_bound)
            for chunk in _box_chunks((s,) * n):
                sols = chunk[_solution_mask(system, chunk)]
                cand = _canonical_min(map(tuple, sols.tolist()))
                if cand is not None and (best is None or cand < best):
                    best = cand
            if best is None and s == at_bound:
                break
            s *= 2
    if best is None or best[0] > at_bound:
        raise RuntimeError(f"no nonzero solution of sup-norm <= {at_bound}; Dirichlet bound violated")
    return SolutionPoint(best[1])


def short_solution_census(r1: int, r2: int, N: ModulusLike, box: BoxSpec) -> list[tuple[int, int, tuple[int, int]]]:
    """Nonzero solutions ``k (r2, -r1)`` inside the box as ``(k, gcd(k, N), point)``.

    ``k`` is recovered from the centered point, so the list is sorted by
    ``k`` in ``[1, N)``.  A solution is primitive when ``gcd(k, N) = 1``.
    """
    n = int(N)
    g1, g2 = solve_two_var(r1, r2, n)
    d0, s0, t0 = ext_gcd(g1, g2)
    _, alpha, _ = ext_gcd(d0, n)
    u, v = alpha * s0, alpha * t0
    b1, b2 = reduced_kernel_basis(r1 % n, r2 % n, n)
    out = []
    for x, y in points_2d(b1, b2, box.bounds(n, 2, 1)):
        if x == 0 and y == 0:
            continue
        k = (u * x + v * y) % n
        out.append((k, math.gcd(k, n), (x, y)))
    out.sort()
    return out
