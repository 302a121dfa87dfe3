"""Sup norms of exponential polynomials and Turan-type ratio statistics.

Measurement strategy: a dense grid over a parametrization of the set (polar
or spherical for balls), coordinate-wise golden-section refinement around the
best grid cells, then a final evaluation of every surviving candidate at 40
significant digits.  The last step matters for the extremal family
(1 - cos x)^n: near x = 0 its expanded Fourier sum cancels catastrophically
in double precision.

Grid density: an exponential polynomial whose frequencies are bounded by K
along an axis moves by at most a factor exp(K h) between grid nodes spaced h
apart.  The defaults keep K h well under 1 for |K| <= 50, so the global
maximizer lies in a cell adjacent to one of the best grid nodes.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import mpmath
import numpy as np

from .errors import DomainError
from .expoly import ExponentialPolynomial

MAX_TERMS = 64
MAX_DIM = 3
GRID_BUDGET = 4_000_000
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FINAL_DPS = 40


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi >= self.lo:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    dim = 1

    def describe(self):
        return f"[{self.lo!r},{self.hi!r}]"


@dataclass(frozen=True)
class Box:
    bounds: tuple

    def __post_init__(self):
        for lo, hi in self.bounds:
            if not hi >= lo:
                raise DomainError(f"empty box side [{lo}, {hi}]")

    @property
    def dim(self):
        return len(self.bounds)

    def describe(self):
        return "x".join(f"[{lo!r},{hi!r}]" for lo, hi in self.bounds)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise DomainError(f"ball radius must be >= 0, got {self.radius}")

    @property
    def dim(self):
        return len(self.center)

    def describe(self):
        return f"B({list(self.center)},{self.radius!r})"


def torus(d):
    return Box(tuple((-math.pi, math.pi) for _ in range(d)))


def _param_box(region):
    """Parameter ranges and a map from parameters to points of ``region``."""
    if isinstance(region, Interval):
        return [(region.lo, region.hi)], lambda p: p
    if isinstance(region, Box):
        return list(region.bounds), lambda p: p
    if isinstance(region, Ball):
        c = np.asarray(region.center, dtype=np.float64)
        R = float(region.radius)
        d = region.dim
        if d == 1:
            return [(c[0] - R, c[0] + R)], lambda p: p
        if d == 2:
            def to_xy(p):
                return c + np.stack([p[:, 0] * np.cos(p[:, 1]), p[:, 0] * np.sin(p[:, 1])], axis=1)
            return [(0.0, R), (-math.pi, math.pi)], to_xy
        if d == 3:
            def to_xyz(p):
                s = np.sin(p[:, 1])
                return c + np.stack([p[:, 0] * s * np.cos(p[:, 2]), p[:, 0] * s * np.sin(p[:, 2]),
                                     p[:, 0] * np.cos(p[:, 1])], axis=1)
            return [(0.0, R), (0.0, math.pi), (-math.pi, math.pi)], to_xyz
    raise DomainError(f"unsupported set {region!r} (dimension <= {MAX_DIM})")


def _check(f, region):
    if f.terms > MAX_TERMS:
        raise DomainError(f"{f.terms} terms exceeds the cap of {MAX_TERMS}")
    if region.dim > MAX_DIM:
        raise DomainError(f"dimension {region.dim} exceeds the cap of {MAX_DIM}")
    if f.terms and f.dim != region.dim:
        raise DomainError(f"function dimension {f.dim} != set dimension {region.dim}")


def _default_resolution(f, ranges):
    """Nodes per parameter axis.

    One-dimensional sets get 4096 nodes per term.  Higher dimensions aim for
    K h <= 0.25 per axis and are trimmed to a fixed total budget.
    """
    d = len(ranges)
    if d == 1:
        return [4096 * max(f.terms, 1) + 1]
    kmax = float(np.abs(f.freq_array()).max()) if f.terms else 0.0
    counts = []
    for lo, hi in ranges:
        # polar radii and angles both need the full frequency scale
        span = hi - lo
        counts.append(max(129, int(math.ceil(4.0 * max(kmax, 1.0) * span * max(1.0, abs(hi), abs(lo)))) + 1))
    while math.prod(counts) > GRID_BUDGET:
        counts = [max(33, int(c * 0.8)) for c in counts]
    return counts


def _mp_abs(f, point, coeffs):
    with mpmath.workdps(FINAL_DPS):
        x = [mpmath.mpf(float(v)) for v in point]
        s = mpmath.mpc(0)
        for k, c in zip(f.freqs, coeffs):
            phase = mpmath.fsum(ki * xi for ki, xi in zip(k, x))
            s += c * mpmath.expj(phase)
        return float(abs(s))


def _mp_coeffs(f):
    out = []
    with mpmath.workdps(FINAL_DPS):
        for c in f.coeffs:
            if isinstance(c, Fraction):
                out.append(mpmath.mpf(c.numerator) / c.denominator)
            elif isinstance(c, int):
                out.append(mpmath.mpf(c))
            else:
                c = complex(c)
                out.append(mpmath.mpc(c.real, c.imag))
    return out


def _golden_max(g, lo, hi, iters=60):
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = g(x1), g(x2)
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(a), abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = g(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = g(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def sup_norm(f, region, resolution=None, candidates=8, return_argmax=False):
    """Maximum of |f| over ``region`` (Interval, Box or Ball, dimension <= 3).

    ``resolution`` overrides the nodes per parameter axis.  With
    ``return_argmax`` a ``(value, point)`` pair is returned.
    """
    if not isinstance(f, ExponentialPolynomial):
        raise DomainError("expected an ExponentialPolynomial")
    _check(f, region)
    if f.terms == 0:
        return (0.0, None) if return_argmax else 0.0
    ranges, to_points = _param_box(region)
    if resolution is None:
        counts = _default_resolution(f, ranges)
    else:
        counts = [int(resolution)] * len(ranges)
    axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(ranges, counts)]
    mesh = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    vals = f.abs_at(to_points(mesh))

    steps = _steps(axes)
    top = np.argsort(vals)[::-1][:4096]
    picked = []
    for idx in top:
        if len(picked) == candidates:
            break
        if all(np.any(np.abs(mesh[idx] - mesh[j]) > 1.5 * steps) for j in picked):
            picked.append(idx)

    best_pts = [mesh[i].copy() for i in picked]
    for start in picked:
        p = mesh[start].copy()
        width = steps.copy()
        for _ in range(3):
            for ax in range(len(ranges)):
                lo = max(ranges[ax][0], p[ax] - width[ax])
                hi = min(ranges[ax][1], p[ax] + width[ax])
                if hi <= lo:
                    continue

                def g(t, ax=ax, p=p):
                    q = p.copy()
                    q[ax] = t
                    return float(f.abs_at(to_points(q[None, :]))[0])

                t, _ = _golden_max(g, lo, hi)
                # golden section never samples the endpoints themselves
                ends = [(g(lo), lo), (g(hi), hi), (g(t), t)]
                p[ax] = max(ends)[1]
            width = width * 0.25
        best_pts.append(p)

    coeffs = _mp_coeffs(f)
    best_val, best_x = -1.0, None
    for p in best_pts:
        x = to_points(p[None, :])[0]
        v = _mp_abs(f, x, coeffs)
        if v > best_val:
            best_val, best_x = v, x
    return (best_val, best_x) if return_argmax else best_val


def _steps(axes):
    return np.array([(a[-1] - a[0]) / max(len(a) - 1, 1) for a in axes])


@dataclass(frozen=True)
class RatioReport:
    terms: int
    set: str
    measured_ratio: float
    per_term_exponent: float | None
    sup_set: float
    sup_domain: float

    def to_json(self):
        return {
            "terms": self.terms,
            "set": self.set,
            "measured_ratio": self.measured_ratio,
            "per_term_exponent": self.per_term_exponent,
            "sup_set": self.sup_set,
            "sup_domain": self.sup_domain,
        }


def turan_ratio(f, region, domain=None, resolution=None):
    """sup_E |f| / sup_domain |f|, with ``domain`` defaulting to the whole torus."""
    if f.terms == 0:
        raise DomainError("zero function has no Turan ratio")
    if domain is None:
        domain = torus(f.dim)
    sup_e = sup_norm(f, region, resolution)
    sup_d = sup_norm(f, domain, resolution)
    ratio = sup_e / sup_d
    exponent = math.log(ratio) / (f.terms - 1) if f.terms >= 2 and ratio > 0 else None
    return RatioReport(f.terms, region.describe(), ratio, exponent, sup_e, sup_d)


def one_minus_cos_power(n, axis=0, dim=1):
    """Exact Fourier expansion of (1 - cos x_axis)^n, coefficients as Fractions."""
    # 1 - cos x = -(1/2) e^{-ix} + 1 - (1/2) e^{ix}
    poly = {0: Fraction(1)}
    base = {-1: Fraction(-1, 2), 0: Fraction(1), 1: Fraction(-1, 2)}
    for _ in range(n):
        nxt = {}
        for a, ca in poly.items():
            for b, cb in base.items():
                nxt[a + b] = nxt.get(a + b, 0) + ca * cb
        poly = nxt
    terms = []
    for k, c in poly.items():
        freq = [0] * dim
        freq[axis] = k
        terms.append((tuple(freq), c))
    return ExponentialPolynomial.from_terms(terms)


def product(f, g):
    """Pointwise product of two exponential polynomials of equal dimension."""
    acc = {}
    for k1, c1 in zip(f.freqs, f.coeffs):
        for k2, c2 in zip(g.freqs, g.coeffs):
            k = tuple(a + b for a, b in zip(k1, k2))
            acc[k] = acc.get(k, 0) + c1 * c2
    return ExponentialPolynomial.from_terms(acc)


def extremal_scaling_suite(n_max, r_list, products=((1, 2), (2, 1), (1, 1))):
    """Rows comparing measured ratios with closed forms.

    1D rows: (1 - cos x)^n on [-r, r] against ((1 - cos r)/2)^n.
    2D rows: (1 - cos x1)^a (1 - cos x2)^b on [-r1, r1] x [-r2, r2] against
    the product of the 1D closed forms.
    """
    if n_max > 8:
        raise DomainError(f"n_max must be <= 8, got {n_max}")
    rows = []
    for n in range(n_max + 1):
        f = one_minus_cos_power(n)
        for r in r_list:
            rep = turan_ratio(f, Interval(-r, r))
            analytic = ((1 - math.cos(r)) / 2) ** n
            rows.append({
                "kind": "1d", "n": n, "n2": 0, "r": r, "r2": 0.0,
                "measured": rep.measured_ratio, "analytic": analytic,
                "log_diff": abs(math.log(rep.measured_ratio) - math.log(analytic)),
            })
    for a, b in products:
        if max(a, b) > n_max:
            continue
        f = product(one_minus_cos_power(a, 0, 2), one_minus_cos_power(b, 1, 2))
        for r1 in r_list:
            for r2 in r_list:
                rep = turan_ratio(f, Box(((-r1, r1), (-r2, r2))))
                analytic = ((1 - math.cos(r1)) / 2) ** a * ((1 - math.cos(r2)) / 2) ** b
                rows.append({
                    "kind": "2d", "n": a, "n2": b, "r": r1, "r2": r2,
                    "measured": rep.measured_ratio, "analytic": analytic,
                    "log_diff": abs(math.log(rep.measured_ratio) - math.log(analytic)),
                })
    return rows


def random_trial(seed, max_terms=6, freq_bound=20, half_width=0.5):
    """One Nazarov trial: random integer frequencies, standard normal coefficients."""
    rng = np.random.default_rng(seed)
    terms = int(rng.integers(2, max_terms + 1))
    freqs = rng.choice(np.arange(-freq_bound, freq_bound + 1), size=terms, replace=False)
    coeffs = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    coeffs /= np.linalg.norm(coeffs)
    f = ExponentialPolynomial.from_terms(((int(k),), complex(c)) for k, c in zip(freqs, coeffs))
    return f, turan_ratio(f, Interval(-half_width, half_width))


def random_trials(count=200, seed=0, max_terms=6, freq_bound=20, half_width=0.5, map_fn=map):
    """Seeded trials; each trial draws from its own spawned seed sequence."""
    children = np.random.SeedSequence(seed).spawn(count)

    def run(i):
        child = children[i]
        _, rep = random_trial(child, max_terms, freq_bound, half_width)
        return {
            "trial_id": i,
            "terms": rep.terms,
            "set": rep.set,
            "measured_ratio": rep.measured_ratio,
            "per_term_exponent": rep.per_term_exponent,
            "seed": f"{seed}:{i}",
        }

    return sorted(map_fn(run, range(count)), key=lambda row: row["trial_id"])
