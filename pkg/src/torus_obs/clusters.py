"""Proximity-graph clusters of sphere lattice points, arc-window checks and the decomposition gap."""

from dataclasses import dataclass
from fractions import Fraction
import csv
import io
import math

import mpmath
import numpy as np

from . import kernels
from .errors import DomainError
from .expoly import ExponentialPolynomial
from .lattice import SphereSet, _pairwise_sq, enumerate_sphere, within_exact
from .spectral import exact_rank


@dataclass(frozen=True)
class Partition:
    rho: float
    components: tuple

    def __len__(self):
        return len(self.components)

    def labels(self):
        """Map point -> component index."""
        return {p: i for i, comp in enumerate(self.components) for p in comp}

    def to_json(self):
        return {"rho": self.rho, "components": [[list(p) for p in comp] for comp in self.components]}


def _canonical_points(points):
    if isinstance(points, SphereSet):
        pts = points.tuples()
    else:
        pts = [tuple(int(v) for v in p) for p in points]
    if len(set(pts)) != len(pts):
        raise DomainError("points must be pairwise distinct")
    return sorted(pts)


def partition(points, rho):
    """Components of the graph joining points at distance strictly below ``rho``."""
    if not rho > 0:
        raise DomainError(f"rho must be > 0, got {rho}")
    rq = Fraction(rho)
    return _partition_sq(_canonical_points(points), rq * rq, float(rho))


def _partition_sq(pts, rho_sq, rho):
    """Partition of sorted distinct ``pts`` with edges at squared distance < ``rho_sq`` (exact)."""
    if not pts:
        return Partition(rho, ())
    d2 = _pairwise_sq(pts)
    adj = within_exact(d2, rho_sq, strict=True)
    ii, jj = np.nonzero(np.triu(adj, 1))
    roots = kernels.union_find(len(pts), ii.astype(np.int64), jj.astype(np.int64))
    groups = {}
    for idx, root in enumerate(roots.tolist()):
        groups.setdefault(root, []).append(pts[idx])
    # roots are the smallest member index, so sorting by root orders by first point
    comps = tuple(tuple(groups[k]) for k in sorted(groups))
    return Partition(rho, comps)


def arc_threshold(n, m):
    """sqrt(2) lambda^{1/2 - delta(m)}; for m = 2 this is sqrt(2) lambda^{1/3}."""
    delta = 1.0 / (4 * (m // 2) + 2)
    return math.sqrt(2.0) * math.sqrt(n) ** (0.5 - delta)


@dataclass(frozen=True)
class ArcCheck:
    n: int
    m: int
    threshold: float
    violations: tuple

    def to_json(self):
        return {"n": self.n, "m": self.m, "threshold": self.threshold,
                "violations": [dict(v) for v in self.violations]}

    def csv_row(self):
        return {"n": self.n, "threshold": self.threshold, "m": self.m, "violations": len(self.violations)}


def _mp_span(p, q, n):
    with mpmath.workdps(50):
        a = mpmath.atan2(p[1], p[0])
        b = mpmath.atan2(q[1], q[0])
        span = (b - a) % (2 * mpmath.pi)
        return span * mpmath.sqrt(n)


def arc_window_check(n, m):
    """Windows of arc length below the threshold holding more than ``m`` points of S_2(sqrt(n)).

    Points are sorted by angle; any offending window contains m + 1
    cyclically consecutive points, so it suffices to measure those spans.
    Spans within a relative 1e-9 of the threshold are re-measured at 50
    digits against a 50-digit threshold.
    """
    if n < 1 or m < 1:
        raise DomainError("need n >= 1 and m >= 1")
    threshold = arc_threshold(n, m)
    pts = enumerate_sphere(2, n).points
    N = len(pts)
    if N <= m:
        return ArcCheck(int(n), int(m), threshold, ())
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    order = np.argsort(theta, kind="stable")
    pts, theta = pts[order], theta[order]
    lam = math.sqrt(n)
    span = np.mod(np.roll(theta, -m) - theta, 2 * math.pi)
    arcs = lam * span
    band = np.abs(arcs - threshold) <= 1e-9 * threshold
    hits = arcs < threshold
    violations = []
    for i in np.nonzero(hits | band)[0].tolist():
        p, q = pts[i].tolist(), pts[(i + m) % N].tolist()
        arc = arcs[i]
        if band[i]:
            with mpmath.workdps(50):
                exact_t = mpmath.sqrt(2) * mpmath.power(n, (mpmath.mpf(1) / 2 - mpmath.mpf(1) / (4 * (m // 2) + 2)) / 2)
                if not _mp_span(p, q, n) < exact_t:
                    continue
        violations.append({"start": p, "end": q, "arc": float(arc), "points": m + 1})
    return ArcCheck(int(n), int(m), threshold, tuple(violations))


def arc_sweep(n_lo, n_hi, m, map_fn=map):
    """``arc_window_check`` for every n in [n_lo, n_hi], in order of n."""
    return sorted(map_fn(lambda n: arc_window_check(n, m), range(n_lo, n_hi + 1)), key=lambda c: c.n)


def verdict_csv(checks):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "threshold", "m", "violations"], lineterminator="\n")
    w.writeheader()
    for c in checks:
        w.writerow(c.csv_row())
    return buf.getvalue()


def is_affine_hyperplane(points):
    """True iff the points lie on one affine hyperplane (exact rank test)."""
    pts = [tuple(int(v) for v in p) for p in points]
    if len(pts) <= 2:
        return True
    d = len(pts[0])
    p0 = pts[0]
    rows = [[a - b for a, b in zip(p, p0)] for p in pts[1:]]
    return exact_rank(rows) <= d - 1


def connes_threshold(sphere):
    """Largest realized distance rho at which every component of G(S, rho) is hyperplanar.

    Returns ``math.inf`` when the whole set already lies on a hyperplane.
    Hyperplanarity of the partition can only fail more as rho grows (each
    component sits inside a component at the larger rho), so the candidate
    distances are bisected.
    """
    if sphere.d < 3:
        raise DomainError(f"connes_threshold needs d >= 3, got {sphere.d}")
    if len(sphere) == 0:
        raise DomainError("empty sphere")
    pts = sphere.tuples()
    if is_affine_hyperplane(pts):
        return math.inf
    cands = np.unique(_pairwise_sq(pts))
    cands = [int(c) for c in cands if c > 0]

    def passes(D):
        # thresholds are compared squared, so rho = sqrt(D) never picks up its own pairs
        comps = _partition_sq(pts, D, math.sqrt(D)).components
        return all(is_affine_hyperplane(c) for c in comps)

    lo, hi = 0, len(cands) - 1
    # the smallest candidate gives singletons, which always pass
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if passes(cands[mid]):
            lo = mid
        else:
            hi = mid - 1
    return math.sqrt(cands[lo])


@dataclass(frozen=True)
class CutoffSpec:
    """Product of per-axis cubic B-spline bumps.

    Each axis factor is the fourfold self-convolution of the indicator of
    [-sigma/8, sigma/8], normalized to unit mass, so its Fourier transform is
    sinc(sigma xi / 8)^4 and it is supported in [-sigma/2, sigma/2].  The
    product is nonnegative, positive at 0 and supported in the ball of
    radius sigma sqrt(d)/2.
    """

    sigma: float = 1.0
    shape: str = "bspline4"

    def __post_init__(self):
        if self.shape != "bspline4":
            raise DomainError(f"unsupported cutoff shape {self.shape!r}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def chi_hat(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        t = self.sigma * xi / 8.0
        return np.prod(np.sinc(t / math.pi) ** 4, axis=-1)

    def envelope(self, s, d):
        """min(1, (8 sqrt(d)/(sigma s))^4) bounds |chi_hat(xi)| for |xi| = s.

        Some axis has |xi_j| >= s/sqrt(d), and |sinc t| <= min(1, 1/|t|)
        on every axis.
        """
        s = np.asarray(s, dtype=np.float64)
        with np.errstate(divide="ignore"):
            tail = (8.0 * math.sqrt(d) / (self.sigma * s)) ** 4
        return np.minimum(1.0, tail)


@dataclass(frozen=True)
class DecompositionGap:
    lhs_gap: float
    rhs_bound: float
    holds: bool
    rhs_proven: float
    components: int

    def to_json(self):
        return {"lhs_gap": self.lhs_gap, "rhs_bound": self.rhs_bound, "holds": self.holds,
                "rhs_proven": self.rhs_proven, "components": self.components}


def decomposition_gap(u, rho, r, cutoff=None):
    """Cross-cluster part of the smoothed local mass against its bound.

    lhs_gap is |sum over pairs in different clusters of
    chi_hat(r (k - l)) c_k conj(c_l)|.  rhs_bound is
    (1/2) #V sup_{|xi| >= r rho} E(|xi|) ||u||^2.  Bounding the cross sum
    term by term only yields (#V - 1) sup E ||u||^2, reported as
    ``rhs_proven``; ``holds`` compares against ``rhs_bound``.
    """
    cutoff = cutoff or CutoffSpec()
    if not isinstance(cutoff, CutoffSpec):
        raise DomainError("unsupported cutoff")
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    if not isinstance(u, ExponentialPolynomial) or u.terms == 0:
        raise DomainError("need a nonzero exponential polynomial")
    d = u.dim
    if d > 4:
        raise DomainError("the cutoff support leaves B_sigma for d > 4")
    part = partition(u.freqs, rho)
    lab = part.labels()
    freqs = u.freq_array()
    c = u.coeff_array()
    labels = np.array([lab[k] for k in u.freqs])
    cross = labels[:, None] != labels[None, :]
    diff = (freqs[:, None, :] - freqs[None, :, :]).astype(np.float64)
    weights = cutoff.chi_hat(r * diff) * cross
    lhs = float(abs(np.conj(c) @ weights.T @ c))
    norm2 = float(np.real(np.vdot(c, c)))
    env = float(cutoff.envelope(r * rho, d))
    nv = u.terms
    rhs = 0.5 * nv * env * norm2
    proven = (nv - 1) * env * norm2
    return DecompositionGap(lhs, rhs, bool(lhs <= rhs * (1 + 1e-9)), proven, len(part))
