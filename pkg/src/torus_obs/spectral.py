"""Exact moment matrices and vanishing orders of toral eigenfunctions.

An eigenfunction u = sum_k c_k exp(i k.x) vanishes to order N at the origin
iff sum_k c_k k^alpha = 0 for every multi-index |alpha| <= N.  All arithmetic
here is over Python integers and ``Fraction``; k^alpha overflows 64-bit words
already at lambda = 50, N = 12, so floating point is never used.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, exp, isqrt, log, sqrt

from .errors import DomainError
from .lattice import enumerate_sphere


def multi_indices(d, N, reduced=False):
    """Multi-indices of degree <= N.

    Full: ordered by degree, then lexicographically descending.
    Reduced: only alpha_d in {0, 1}, ordered by alpha_d first.
    """
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for a in range(left, -1, -1):
            rec(prefix + (a,), left - a, slots - 1)

    for deg in range(N + 1):
        rec((), deg, d)
    if reduced:
        out = [a for a in out if a[-1] <= 1]
        out.sort(key=lambda a: (a[-1], sum(a)))
    return out


def monomial(k, alpha):
    v = 1
    for ki, ai in zip(k, alpha):
        if ai:
            v *= ki**ai
    return v


@dataclass(frozen=True)
class MomentMatrix:
    rows: tuple
    cols: tuple
    entries: tuple
    N: int
    reduced: bool

    @property
    def shape(self):
        return len(self.rows), len(self.cols)

    def to_json(self):
        return {
            "N": self.N,
            "reduced": self.reduced,
            "rows": [list(a) for a in self.rows],
            "cols": [list(k) for k in self.cols],
            "entries": [[str(v) for v in row] for row in self.entries],
        }


@dataclass(frozen=True)
class RationalVector:
    """Exact coefficients indexed by lattice points."""

    points: tuple
    entries: tuple

    def as_dict(self):
        return dict(zip(self.points, self.entries))

    def to_json(self):
        return {"points": [list(k) for k in self.points], "entries": [str(v) for v in self.entries]}


@dataclass(frozen=True)
class GammaBounds:
    lower: int
    upper_M: int
    upper_D: float | None

    def to_json(self):
        return {"lower": self.lower, "upper_M": self.upper_M, "upper_D": self.upper_D}


def _as_point_tuples(points):
    pts = [tuple(int(v) for v in p) for p in points]
    if not pts:
        raise DomainError("empty point set")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise DomainError("points of mixed dimension")
    return pts


def moment_matrix(points, N, reduced=False):
    """Matrix of k^alpha, rows indexed by multi-indices, columns by points."""
    pts = _as_point_tuples(points)
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    rows = multi_indices(len(pts[0]), N, reduced)
    entries = tuple(tuple(monomial(k, a) for k in pts) for a in rows)
    return MomentMatrix(tuple(rows), tuple(pts), entries, int(N), bool(reduced))


def _rows_of(matrix):
    return matrix.entries if isinstance(matrix, MomentMatrix) else matrix


def echelon(rows):
    """Fraction-free (Bareiss) row echelon form.

    Returns the eliminated integer matrix and the list of pivot columns.
    Every intermediate entry is a minor of the input, so the divisions are
    exact.
    """
    M = [list(r) for r in rows]
    m = len(M)
    ncols = len(M[0]) if m else 0
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r == m:
            break
        piv = next((i for i in range(r, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        prow = M[r]
        for i in range(r + 1, m):
            row = M[i]
            f = row[c]
            for j in range(c + 1, ncols):
                row[j] = (p * row[j] - f * prow[j]) // prev
            row[c] = 0
        prev = p
        pivots.append(c)
        r += 1
    return M, pivots


def exact_rank(matrix):
    """Rank over Q of a MomentMatrix or a list of integer rows."""
    rows = _rows_of(matrix)
    if not rows or not rows[0]:
        return 0
    return len(echelon(rows)[1])


def _kernel_from_echelon(M, pivots, ncols):
    free = [c for c in range(ncols) if c not in set(pivots)]
    if not free:
        return None
    x = [Fraction(0)] * ncols
    x[free[0]] = Fraction(1)
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        s = sum((M[r][j] * x[j] for j in range(c + 1, ncols) if x[j]), Fraction(0))
        x[c] = -s / M[r][c]
    lead = next(v for v in x if v != 0)
    return [v / lead for v in x]


def kernel_vector(matrix):
    """A nonzero exact kernel vector, first nonzero entry 1, or ``None``."""
    rows = _rows_of(matrix)
    cols = matrix.cols if isinstance(matrix, MomentMatrix) else None
    ncols = len(rows[0])
    M, pivots = echelon(rows)
    x = _kernel_from_echelon(M, pivots, ncols)
    if x is None:
        return None
    if cols is None:
        cols = tuple(range(ncols))
    return RationalVector(tuple(cols), tuple(x))


def _exact_parts(c):
    """Split a coefficient into exact (real, imag) rationals."""
    if isinstance(c, (int, Fraction)):
        return Fraction(c), Fraction(0)
    c = complex(c)
    return Fraction(c.real), Fraction(c.imag)


def vanishing_order(coeffs, points, N_max):
    """Largest N <= N_max with every moment of order <= N equal to zero.

    Returns -1 when u(0) != 0 and ``N_max`` when every check passes; in the
    latter case the true order may be larger.
    """
    pts = _as_point_tuples(points)
    if isinstance(coeffs, RationalVector):
        if tuple(coeffs.points) != tuple(pts):
            raise DomainError("coefficient vector is indexed by a different point list")
        coeffs = coeffs.entries
    elif hasattr(coeffs, "items"):
        if set(coeffs) != set(pts):
            raise DomainError("coefficient map does not match the point list")
        coeffs = [coeffs[k] for k in pts]
    coeffs = list(coeffs)
    if len(coeffs) != len(pts):
        raise DomainError(f"{len(coeffs)} coefficients for {len(pts)} points")
    parts = [_exact_parts(c) for c in coeffs]
    d = len(pts[0])
    for N in range(N_max + 1):
        for alpha in multi_indices(d, N):
            if sum(alpha) != N:
                continue
            re = im = Fraction(0)
            for k, (a, b) in zip(pts, parts):
                mk = monomial(k, alpha)
                if mk:
                    re += a * mk
                    im += b * mk
            if re or im:
                return N - 1
    return N_max


def gamma_max(d, n, N_max):
    """Maximal vanishing order over the eigenspace, certified up to ``N_max``.

    Sweeps N upward until the full moment matrix becomes injective; at every
    step the rank of the reduced matrix (alpha_d <= 1) must agree.
    """
    sphere = enumerate_sphere(d, n)
    if len(sphere) == 0:
        raise DomainError(f"empty eigenspace: S_{d}(sqrt({n})) has no points")
    pts = sphere.tuples()
    best = -1
    for N in range(N_max + 1):
        full = exact_rank(moment_matrix(pts, N))
        red = exact_rank(moment_matrix(pts, N, reduced=True))
        if full != red:
            raise AssertionError(f"full rank {full} != reduced rank {red} at N={N}")
        if full == len(pts):
            break
        best = N
    return best


def rank_count_lower(d, count):
    """Largest N with C(N+d-1, d-1) + C(N+d-2, d-1) < count, or -1."""
    N = -1
    while comb(N + 1 + d - 1, d - 1) + comb(N + 1 + d - 2, d - 1) < count:
        N += 1
    return N


def gamma_bounds(d, n, C_arith=1.0):
    """Lower bound from the rank count and the two upper bounds on the vanishing order.

    ``upper_M`` is floor(min(N_d - 1, 2 d lambda)) - 1; ``upper_D`` is
    ``None`` for d >= 3 when lambda <= e.
    """
    count = len(enumerate_sphere(d, n))
    if count == 0:
        raise DomainError(f"empty eigenspace: S_{d}(sqrt({n})) has no points")
    lam = sqrt(n)
    # Gamma is an integer, so flooring 2 d lambda loses nothing
    upper_M = min(count - 1, isqrt(4 * d * d * n)) - 1
    if d == 2:
        upper_D = float(count - 2)
    elif lam > exp(1.0):
        upper_D = 2 * (d - 2) * lam + exp(C_arith * log(lam) / log(log(lam))) - 1
    else:
        upper_D = None
    return GammaBounds(rank_count_lower(d, count), upper_M, upper_D)


def extremal_kernel(points, N_max=None):
    """Kernel vector of highest vanishing order on ``points``.

    The points must share one squared norm; only then does the reduced
    matrix have the same kernel as the full one.  Starts at the rank-count
    lower bound, where a kernel is guaranteed, and raises N on the reduced
    matrix until the kernel disappears.  Returns
    ``(N, vector)``; ``vector`` is ``None`` only when no kernel exists at all.
    """
    pts = _as_point_tuples(points)
    if len({sum(v * v for v in k) for k in pts}) != 1:
        raise DomainError("points do not lie on a common sphere")
    d = len(pts[0])
    N = rank_count_lower(d, len(pts))
    if N < 0:
        return -1, None
    best = kernel_vector(moment_matrix(pts, N, reduced=True))
    while N_max is None or N < N_max:
        nxt = kernel_vector(moment_matrix(pts, N + 1, reduced=True))
        if nxt is None:
            break
        N, best = N + 1, nxt
    return N, best
