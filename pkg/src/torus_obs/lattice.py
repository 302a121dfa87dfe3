"""Integer points on spheres, their counts, cap statistics and prime products.

Three-square note: emptiness of S_3 holds exactly when n = 4^a (8b + 7)
(Legendre).  One sentence in the source literature places the negation on
the wrong side of that equivalence; the classical direction is implemented
and checked against enumeration.
"""

from dataclasses import dataclass
from fractions import Fraction
import csv
import io
import math

import numpy as np

from .errors import CapExceededError, DomainError

# (d-1)-ball prefix count above which enumeration is refused
ENUMERATION_CAP = 50_000_000
MAX_NORM = 10**12


@dataclass(frozen=True)
class SphereSet:
    """All integer points of Z^d with squared norm ``n``, lexicographically sorted."""

    d: int
    n: int
    points: np.ndarray

    def __len__(self):
        return int(self.points.shape[0])

    @property
    def count(self):
        return len(self)

    @property
    def radius(self):
        return math.sqrt(self.n)

    def tuples(self):
        return [tuple(int(v) for v in p) for p in self.points]

    def to_json(self):
        return {"d": self.d, "n": self.n, "points": [list(p) for p in self.tuples()]}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"k{i + 1}" for i in range(self.d)])
        w.writerows(self.tuples())
        return buf.getvalue()


@dataclass(frozen=True)
class CapStatistics:
    R: float
    count_lower: int
    count_exact: int | None
    density: float

    def to_json(self):
        return {"R": self.R, "count_lower": self.count_lower,
                "count_exact": self.count_exact, "density": self.density}


@dataclass(frozen=True)
class PrimeProduct:
    m: int
    primes: tuple
    omega: int
    product: int

    def to_json(self):
        return {"m": self.m, "primes": list(self.primes), "omega": self.omega,
                "product": str(self.product)}


def _ball_volume(dim, radius):
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * radius**dim


# dim -> (n covered, prefixes sorted by squared norm then lex, their norms)
_PREFIX_CACHE = {}
_PREFIX_CACHE_ROWS = 5_000_000


def _ball_prefixes(dim, n):
    """Integer points of the closed dim-ball of squared radius n, grouped by norm."""
    hit = _PREFIX_CACHE.get(dim)
    if hit is not None and hit[0] >= n:
        return hit[1], hit[2]
    if hit is not None:
        # grow geometrically so ascending sweeps rebuild O(log n) times
        grown = 2 * hit[0]
        if _ball_volume(dim, math.isqrt(grown) + 1) <= _PREFIX_CACHE_ROWS:
            n = max(n, grown)
    bound = math.isqrt(n)
    ks = np.arange(-bound, bound + 1, dtype=np.int64)
    prefix = np.zeros((1, 0), dtype=np.int64)
    sums = np.zeros(1, dtype=np.int64)
    for _ in range(dim):
        cand = sums[:, None] + ks[None, :] ** 2
        rows, cols = np.nonzero(cand <= n)
        prefix = np.concatenate([prefix[rows], ks[cols, None]], axis=1)
        sums = cand[rows, cols]
    order = np.argsort(sums, kind="stable")
    prefix, sums = prefix[order], sums[order]
    if len(sums) <= _PREFIX_CACHE_ROWS:
        prefix.setflags(write=False)
        sums.setflags(write=False)
        _PREFIX_CACHE[dim] = (n, prefix, sums)
    return prefix, sums


def enumerate_sphere(d, n):
    """Return S_d(sqrt(n)) as a :class:`SphereSet`.

    The first ``d - 1`` coordinates range over the integer ball of squared
    radius ``n``; the last coordinate is recovered by an exact integer
    square root.
    """
    d, n = int(d), int(n)
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    if n < 0:
        raise DomainError(f"squared radius must be >= 0, got {n}")
    if n > MAX_NORM:
        raise CapExceededError(f"n = {n} exceeds the desk-scale cap {MAX_NORM}")
    bound = math.isqrt(n)
    if _ball_volume(d - 1, bound + 1) > ENUMERATION_CAP:
        raise CapExceededError(f"S_{d}(sqrt({n})) enumeration exceeds cap {ENUMERATION_CAP}")

    prefix, sums = _ball_prefixes(d - 1, n)
    if len(sums) and sums[-1] > n:
        cut = np.searchsorted(sums, n + 1)
        prefix, sums = prefix[:cut], sums[:cut]
    blocks = []
    for t in range(bound + 1):
        s = n - t * t
        lo, hi = np.searchsorted(sums, [s, s + 1])
        if lo == hi:
            continue
        head = prefix[lo:hi]
        for last in ((t,) if t == 0 else (t, -t)):
            blocks.append(np.concatenate([head, np.full((hi - lo, 1), last, dtype=np.int64)], axis=1))
    pts = np.concatenate(blocks) if blocks else np.zeros((0, d), dtype=np.int64)
    if len(pts):
        pts = pts[np.lexsort(pts.T[::-1])]
    return SphereSet(d, n, np.ascontiguousarray(pts))


def factorize(n):
    """Prime factorization by trial division, as ``{p: e}``."""
    n = int(n)
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n):
    divs = [1]
    for p, e in factorize(n).items():
        divs = [q * p**i for q in divs for i in range(e + 1)]
    return sorted(divs)


def r2_via_divisors(n):
    """Jacobi's count 4 (d_1(n) - d_3(n)) of representations as a sum of two squares."""
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    d1 = d3 = 0
    for q in divisors(n):
        if q % 4 == 1:
            d1 += 1
        elif q % 4 == 3:
            d3 += 1
    return 4 * (d1 - d3)


def two_square_obstructed(n):
    """True iff some prime p = 3 (mod 4) divides n to an odd power."""
    return any(p % 4 == 3 and e % 2 == 1 for p, e in factorize(n).items())


def is_three_square_excluded(n):
    """True iff n = 4^a (8b + 7), i.e. n is not a sum of three squares."""
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n == 0:
        return False
    while n % 4 == 0:
        n //= 4
    return n % 8 == 7


def _pairwise_sq(points):
    p = np.asarray(points, dtype=np.int64)
    diff = p[:, None, :] - p[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def within_exact(d2, bound_sq, strict=False):
    """Elementwise ``d2 <= bound_sq`` (or ``<``) for integer ``d2`` and any real bound.

    Float comparison first; entries within a relative 1e-9 band are redone in
    exact rational arithmetic.
    """
    d2 = np.asarray(d2)
    fb = float(bound_sq)
    out = d2 < fb if strict else d2 <= fb
    near = np.abs(d2 - fb) <= 1e-9 * max(abs(fb), 1.0)
    if near.any():
        exact = Fraction(bound_sq) if not isinstance(bound_sq, Fraction) else bound_sq
        idx = np.nonzero(near)
        for pos in zip(*idx):
            v = int(d2[pos])
            out[pos] = v < exact if strict else v <= exact
    return out


def cap_statistics(sphere, R, exact_limit=64):
    """Largest subset of ``sphere`` with diameter <= 2R: a lower bound, and the exact value for small sets."""
    if not R > 0:
        raise DomainError(f"cap radius must be > 0, got {R}")
    if len(sphere) == 0:
        raise DomainError("empty sphere")
    d2 = _pairwise_sq(sphere.points)
    Rq = Fraction(R)
    count_lower = int(within_exact(d2, Rq * Rq).sum(axis=1).max())
    count_exact = None
    adj = within_exact(d2, 4 * Rq * Rq)
    if adj.all():
        count_exact = len(sphere)
    elif len(sphere) <= exact_limit:
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(len(sphere)))
        ii, jj = np.nonzero(np.triu(adj, 1))
        g.add_edges_from(zip(ii.tolist(), jj.tolist()))
        _, count_exact = nx.max_weight_clique(g, weight=None)
        count_exact = int(count_exact)
    best = count_exact if count_exact is not None else count_lower
    density = best ** (1.0 / (sphere.d - 1)) / R
    return CapStatistics(float(R), count_lower, count_exact, density)


def primes_upto(m):
    m = int(m)
    if m < 2:
        return []
    sieve = np.ones(m + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(m) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0].tolist()


def primes_one_mod_four(m):
    """Primes p = 1 (mod 4) with p <= m, their count and product."""
    m = int(m)
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    primes = tuple(p for p in primes_upto(m) if p % 4 == 1)
    return PrimeProduct(m, primes, len(primes), math.prod(primes))
