"""Observability constants as smallest eigenvalues of ball-kernel Gram matrices.

For u = sum_k c_k exp(i k.x) the ball average of |u|^2 is c* G c with
G[k, l] = B_d(r |k - l|), where B_d is the normalized Fourier transform of
the unit-ball indicator.  Minimizing over the eigenspace therefore reduces to
the smallest eigenvalue of G on S_d(lambda).
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import mpmath
import numpy as np

from . import kernels
from .errors import CapExceededError, ConvergenceError, DomainError
from .expoly import ExponentialPolynomial
from .lattice import SphereSet, enumerate_sphere, primes_one_mod_four
from .spectral import extremal_kernel, rank_count_lower, vanishing_order
from .turan import Ball, sup_norm

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 100
# kernel vectors come from exact elimination, which is cubic in the point count
KERNEL_POINT_CAP = 160


def ball_kernel(d, rho):
    """B_d(rho) = Gamma(d/2 + 1) (2/rho)^{d/2} J_{d/2}(rho), with B_d(0) = 1.

    Accepts a scalar or an array of radii.
    """
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    arr = np.asarray(rho, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("ball kernel needs rho >= 0")
    out = kernels.ball_kernel_values(int(d), arr.ravel()).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GramMatrix:
    points: np.ndarray
    r: float
    entries: np.ndarray

    @property
    def size(self):
        return self.entries.shape[0]


def _points_array(points):
    if isinstance(points, SphereSet):
        arr = points.points
    elif isinstance(points, ExponentialPolynomial):
        arr = points.freq_array()
    else:
        arr = np.asarray(list(points), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DomainError("gram matrix needs a nonempty point list")
    return arr.astype(np.int64)


def gram_matrix(points, r):
    """G[k, l] = B_d(r |k - l|) over the points in the order given."""
    if not r > 0:
        raise DomainError(f"radius must be > 0, got {r}")
    pts = _points_array(points)
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    # only the distinct distances need a Bessel evaluation
    uniq, inv = np.unique(d2, return_inverse=True)
    vals = ball_kernel(pts.shape[1], float(r) * np.sqrt(uniq.astype(np.float64)))
    entries = np.asarray(vals)[inv].reshape(d2.shape)
    return GramMatrix(pts, float(r), entries)


@dataclass(frozen=True)
class EigenResult:
    value: float
    vector: np.ndarray
    sweeps: int
    off_norm: float

    def to_json(self):
        return {"value": self.value, "vector": self.vector.tolist(),
                "sweeps": self.sweeps, "off_norm": self.off_norm}


def min_eigenvalue(G, tol=DEFAULT_TOL, max_sweeps=MAX_SWEEPS):
    """Smallest eigenvalue and a unit eigenvector by cyclic Jacobi rotations.

    For a :class:`GramMatrix` an eigenvalue below ``PRECISE_BELOW`` is
    replaced by the high-precision Rayleigh quotient of its eigenvector.
    The double value carries an absolute error near 1e-16 and can come out
    negative; the refined one is a nonnegative upper bound on the true
    minimum with the same absolute accuracy.

    Raises :class:`ConvergenceError` when the off-diagonal Frobenius norm is
    still above ``tol`` after ``max_sweeps`` sweeps.
    """
    a = G.entries if isinstance(G, GramMatrix) else np.asarray(G, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DomainError("expected a nonempty square matrix")
    if not np.allclose(a, a.T, rtol=0, atol=1e-14):
        raise DomainError("matrix is not symmetric")
    w, v, sweeps, off = kernels.jacobi_eigh(a, tol, max_sweeps)
    if off > tol:
        raise ConvergenceError(
            f"Jacobi did not converge in {sweeps} sweeps (off-diagonal norm {off:.3e} > {tol:.1e})",
            sweeps=int(sweeps), off_norm=float(off), size=int(a.shape[0]),
        )
    i = int(np.argmin(w))
    vec = v[:, i] / np.linalg.norm(v[:, i])
    lead = vec[np.nonzero(np.abs(vec) > 1e-12)[0][0]]
    if lead < 0:
        vec = -vec
    value = float(w[i])
    if isinstance(G, GramMatrix) and value < PRECISE_BELOW:
        u = ExponentialPolynomial.from_arrays(G.points, vec.tolist())
        value = _precise_quotient(u, G.r)
    return EigenResult(value, vec, int(sweeps), float(off))


def m_value(points, r, tol=DEFAULT_TOL):
    """m restricted to ``points`` at radius ``r``."""
    return min_eigenvalue(gram_matrix(points, r), tol).value


# below this the double-precision quadratic form is dominated by rounding
PRECISE_BELOW = 1e-6


def rayleigh_quotient(u, r, precise=None):
    """Ball average of |u|^2 over the torus average, computed in Fourier space.

    The double-precision form c* G c loses everything once the quotient
    drops under about 1e-13, as it does for high-order vanishing.  Quotients
    under ``PRECISE_BELOW`` (or all of them with ``precise=True``) are
    therefore recomputed from exact pair sums and high-precision Bessel values.
    """
    if u.terms == 0 or u.l2_norm_sq() == 0:
        raise DomainError("zero function has no Rayleigh quotient")
    if not r > 0:
        raise DomainError(f"radius must be > 0, got {r}")
    G = gram_matrix(u, r).entries
    c = u.coeff_array()
    value = float(np.real(np.conj(c) @ G @ c) / np.real(np.vdot(c, c)))
    if precise or (precise is None and value < PRECISE_BELOW):
        value = _precise_quotient(u, r)
    return value


def _exact_parts(c):
    if isinstance(c, (int, Fraction)):
        return Fraction(c), Fraction(0)
    c = complex(c)
    return Fraction(c.real), Fraction(c.imag)


def _mp_ball_kernel(d, rho):
    if rho == 0:
        return mpmath.mpf(1)
    nu = mpmath.mpf(d) / 2
    return mpmath.gamma(nu + 1) * (2 / rho) ** nu * mpmath.besselj(nu, rho)


def _precise_quotient(u, r, rel=1e-12):
    """Sum over distinct distances of B_d(r sqrt(D)) times the exact pair sum for D."""
    parts = [_exact_parts(c) for c in u.coeffs]
    pair_sums = {}
    freqs = u.freqs
    for i, k in enumerate(freqs):
        ai, bi = parts[i]
        for j in range(i, len(freqs)):
            aj, bj = parts[j]
            D = sum((x - y) ** 2 for x, y in zip(k, freqs[j]))
            # Re(c_i conj c_j), counted twice off the diagonal
            w = ai * aj + bi * bj
            pair_sums[D] = pair_sums.get(D, 0) + (w if i == j else 2 * w)
    norm = sum(a * a + b * b for a, b in parts)
    r_exact = Fraction(r)
    prev = None
    for dps in (40, 80, 160, 320):
        with mpmath.workdps(dps):
            rr = mpmath.mpf(r_exact.numerator) / r_exact.denominator
            total = mpmath.mpf(0)
            for D, s in pair_sums.items():
                if s:
                    total += _mp_ball_kernel(u.dim, rr * mpmath.sqrt(D)) * (mpmath.mpf(s.numerator) / s.denominator)
            value = total / (mpmath.mpf(norm.numerator) / norm.denominator)
            if prev is not None and abs(value - prev) <= rel * abs(value):
                # the form is positive semidefinite; a negative sign is residual rounding
                return max(float(value), 0.0)
            prev = value
    raise ConvergenceError("high-precision Rayleigh quotient did not stabilize", last=float(prev))


def local_mass_oracle(u, r, level=64):
    """Ball average of |u|^2 by quadrature, independent of the Bessel kernel.

    Polar (d = 2) or spherical (d = 3) coordinates: Gauss-Legendre in the
    radius and polar angle, the trapezoidal rule in the periodic azimuth.
    The integrand is smooth in these coordinates, so convergence is spectral.
    """
    if not r > 0:
        raise DomainError(f"radius must be > 0, got {r}")
    d = u.dim
    if d > 3 or d < 1:
        raise DomainError(f"quadrature oracle supports d <= 3, got {d}")
    t, w = np.polynomial.legendre.leggauss(int(level))
    rad = 0.5 * r * (t + 1.0)
    wr = 0.5 * r * w
    if d == 1:
        x = (r * t)[:, None]
        return float(np.sum(r * w * u.abs_at(x) ** 2) / (2 * r))
    band = r * u.diameter() if u.terms > 1 else 0.0
    m_az = max(2 * int(level), int(2 * band) + 32)
    phi = 2 * math.pi * np.arange(m_az) / m_az
    if d == 2:
        R, P = np.meshgrid(rad, phi, indexing="ij")
        x = np.stack([(R * np.cos(P)).ravel(), (R * np.sin(P)).ravel()], axis=1)
        vals = (u.abs_at(x) ** 2).reshape(R.shape)
        total = np.sum(wr[:, None] * rad[:, None] * vals) * (2 * math.pi / m_az)
        return float(total / (math.pi * r * r))
    ct, cw = np.polynomial.legendre.leggauss(max(int(level), int(band) + 16))
    R, C, P = np.meshgrid(rad, ct, phi, indexing="ij")
    S = np.sqrt(1.0 - C * C)
    x = np.stack([(R * S * np.cos(P)).ravel(), (R * S * np.sin(P)).ravel(), (R * C).ravel()], axis=1)
    vals = (u.abs_at(x) ** 2).reshape(R.shape)
    total = np.sum(wr[:, None, None] * rad[:, None, None] ** 2 * cw[None, :, None] * vals)
    total *= 2 * math.pi / m_az
    return float(total / (4.0 / 3.0 * math.pi * r**3))


@dataclass(frozen=True)
class TaylorCheck:
    sup_measured: float
    bound: float
    holds: bool

    def to_json(self):
        return {"sup_measured": self.sup_measured, "bound": self.bound, "holds": self.holds}


def taylor_bound_check(u, N, r, resolution=None):
    """Compare sup_{B_r} |u| with (r diam)^{N+1}/(N+1)! * ||u_hat||_1.

    The vanishing order of u at the origin must be at least ``N``; this is
    certified exactly after multiplying u by exp(-i k0.x) for the first
    frequency k0 of its support.
    """
    if N is None or N < 0:
        raise DomainError("Taylor bound needs a vanishing order N >= 0")
    if u.terms == 0:
        raise DomainError("zero function")
    k0 = u.freqs[0]
    v = u.shifted(tuple(-a for a in k0))
    order = vanishing_order(v.coeffs, v.freqs, N)
    if order < N:
        raise DomainError(f"precondition failed: vanishing order {order} < {N}")
    sup = sup_norm(u, Ball(tuple(0.0 for _ in range(u.dim)), float(r)), resolution)
    bound = (r * u.diameter()) ** (N + 1) / math.factorial(N + 1) * u.l1_norm()
    return TaylorCheck(sup, bound, bool(sup <= bound * (1 + 1e-9)))


def upper_bound_eval(count, diam, N, r):
    """sqrt(count)/sqrt(N+1) * (e r diam/(N+1))^{N+1}, with the implied constant set to 1."""
    if count < 1 or diam < 0 or N < 0 or not r > 0:
        raise DomainError("need count >= 1, diam >= 0, N >= 0, r > 0")
    return math.sqrt(count) / math.sqrt(N + 1) * (math.e * r * diam / (N + 1)) ** (N + 1)


@dataclass(frozen=True)
class FamilyReport:
    family: str
    params: dict
    n: int
    count: int
    r: float
    measured: float
    bound: float | None
    notes: tuple = ()
    u: ExponentialPolynomial | None = field(default=None, repr=False, compare=False)

    def to_json(self):
        return {
            "family": self.family,
            "params": self.params,
            "n": self.n,
            "count": self.count,
            "r": self.r,
            "measured": self.measured,
            "bound": self.bound,
            "notes": list(self.notes),
        }

    def csv_row(self):
        return {"family": self.family, "d": self.params.get("d"), "n": self.n,
                "r": self.r, "measured": self.measured, "bound": self.bound}


ORDER_ONLY = "bound is constant-free (implied constant set to 1); compare orders of magnitude only"


def _kernel_function(points):
    N, vec = extremal_kernel(points)
    if vec is None:
        raise DomainError("no vanishing kernel on this point set")
    return N, ExponentialPolynomial(tuple(vec.points), tuple(vec.entries))


def best_pair_quotient(points, r):
    """Smallest Rayleigh quotient of a two-term combination: 1 - max |B_d(r |k - l|)|."""
    pts = _points_array(points)
    if len(pts) < 2:
        return 1.0
    G = gram_matrix(pts, r).entries
    off = np.abs(G[~np.eye(len(pts), dtype=bool)])
    return float(1.0 - off.max())


def family_simple(d, n_index, r):
    """u_n = exp(i a_n.x) - exp(i b_n.x), a_n = (n, n+1, 0, ...), b_n = (n+1, n, 0, ...)."""
    if d < 2 or n_index < 1:
        raise DomainError("need d >= 2 and n_index >= 1")
    if not 0 < r < 1:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    n = n_index
    a = (n, n + 1) + (0,) * (d - 2)
    b = (n + 1, n) + (0,) * (d - 2)
    lam2 = n * n + (n + 1) ** 2
    assert sum(v * v for v in a) == lam2 == sum(v * v for v in b)
    u = ExponentialPolynomial.from_terms({a: 1, b: -1})
    measured = rayleigh_quotient(u, r)
    # |u|^2 = 2 - 2 cos(x1 - x2) has torus mean 2
    params = {"d": d, "n_index": n, "local_mass": 2 * measured}
    notes = (ORDER_ONLY, "local_mass is the ball mean of |u|^2, about 2 r^2/(d+2) for small r")
    return FamilyReport("simple", params, lam2, 2, float(r), measured, float(r * r), notes, u)


def hyperplane_window(d, K, r):
    """Search window (rho^2, 4 rho^2) with rho = (K r)^{2-d}, and its best n'.

    Returns ``(rho, n_lo, n_hi, best_n, best_count)`` with the argmax of
    N_{d-1}(sqrt(n')) over the integer window, ties to the smaller n'.
    """
    if d < 4:
        raise DomainError(f"hyperplane family needs d >= 4, got {d}")
    if not K >= 1 or not r > 0:
        raise DomainError("need K >= 1 and r > 0")
    rho = (K * r) ** (2 - d)
    if rho < 1:
        raise DomainError(f"degenerate search window: rho = {rho:.6g} < 1")
    lo = math.floor(rho * rho) + 1
    hi = math.ceil(4 * rho * rho) - 1
    if hi < lo:
        raise DomainError(f"degenerate search window ({rho * rho:.6g}, {4 * rho * rho:.6g})")
    if hi > 10**12:
        raise CapExceededError(f"search window up to {hi} exceeds the enumeration range")
    best_n, best_count = None, -1
    for nn in range(lo, hi + 1):
        c = len(enumerate_sphere(d - 1, nn))
        if c > best_count:
            best_n, best_count = nn, c
    return rho, lo, hi, best_n, best_count


def family_hyperplane(d, K, r):
    """Extremal kernel eigenfunction on S_{d-1}(sqrt(n')), lifted by exp(i x_d)."""
    rho, lo, hi, best_n, count = hyperplane_window(d, K, r)
    if count > KERNEL_POINT_CAP:
        raise CapExceededError(
            f"N_{d - 1}(sqrt({best_n})) = {count} exceeds the kernel point cap {KERNEL_POINT_CAP}")
    sphere = enumerate_sphere(d - 1, best_n)
    N, base = _kernel_function(sphere.tuples())
    u = base.lifted(1)
    measured = rayleigh_quotient(base, r)
    params = {"d": d, "K": K, "rho": rho, "window": [lo, hi], "n_prime": best_n, "gamma": N}
    notes = (ORDER_ONLY, "measured is the (d-1)-dimensional quotient of the unlifted factor",
             "bound is exp(-r^(3-d))")
    return FamilyReport("hyperplane", params, best_n, count, float(r), measured,
                        math.exp(-(r ** (3 - d))), notes, u)


def family_wigert(m, r):
    """Extremal kernel eigenfunction on S_2(sqrt(P_m)), lifted to T^3 by exp(i x_3)."""
    if not r > 0:
        raise DomainError(f"radius must be > 0, got {r}")
    pp = primes_one_mod_four(m)
    if pp.product > 10**10:
        raise CapExceededError(f"P_{m} = {pp.product} exceeds 1e10")
    expected = 4 * 2**pp.omega
    if expected > KERNEL_POINT_CAP:
        raise CapExceededError(f"{expected} points exceeds the kernel point cap {KERNEL_POINT_CAP}")
    sphere = enumerate_sphere(2, pp.product)
    if len(sphere) != expected:
        raise AssertionError(f"N_2(sqrt(P_m)) = {len(sphere)} != 4 * 2^{pp.omega}")
    N, base = _kernel_function(sphere.tuples())
    u = base.lifted(1)
    measured = rayleigh_quotient(base, r)
    params = {
        "d": 3, "m": m, "primes": list(pp.primes), "omega": pp.omega,
        "gamma": N, "gamma_lower": rank_count_lower(2, len(sphere)),
        "best_pair": best_pair_quotient(sphere, r),
    }
    bound = upper_bound_eval(len(sphere), base.diameter(), N, r)
    return FamilyReport("wigert", params, pp.product, len(sphere), float(r), measured,
                        bound, (ORDER_ONLY,), u)


def delta_cc(m):
    """1 / (4 floor(m/2) + 2)."""
    return 1.0 / (4 * (m // 2) + 2)


def h_exponent(d, gamma):
    """gamma * sum_{3<=k<=d-1} (2 gamma)^{k-d} prod_{j=k+1..d} j!."""
    total = 0.0
    for k in range(3, d):
        total += (2 * gamma) ** (k - d) * math.prod(math.factorial(j) for j in range(k + 1, d + 1))
    return gamma * total


def log_phi(d, r, gamma, D):
    """log phi_d(r) via the recursion, or ``None`` when ln ln(1/r) <= 0."""
    L = math.log(1.0 / r)
    if L <= 1.0:
        return None
    val = D * L / math.log(L)
    for k in range(3, d):
        val = math.factorial(k + 1) / (2 * gamma) * (val + gamma * L)
    return val


@dataclass(frozen=True)
class ExponentTables:
    phi: float | None
    log_phi: float | None
    h: float
    delta_cc: dict
    nazarov_exponent: float | None
    nazarov_floor: float | None

    def to_json(self):
        return {"phi": self.phi, "log_phi": self.log_phi, "h": self.h,
                "delta_cc": {str(k): v for k, v in self.delta_cc.items()},
                "nazarov_exponent": self.nazarov_exponent, "nazarov_floor": self.nazarov_floor}


def exponent_tables(d, r, gamma, D, n=None, m_values=range(1, 7)):
    """Evaluate the recursive phi_d, the exponent h(d), delta(m) and the general lower-bound exponent.

    ``nazarov_floor`` is r^{2d min(N_d - 1, lambda)}, the general lower bound
    with its constant set to 1; it needs ``n``.
    """
    if d < 3:
        raise DomainError(f"need d >= 3, got {d}")
    if not 0 < r < 1:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    if not 0 < gamma < 1 and gamma != 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    lp = log_phi(d, r, gamma, D)
    phi = None
    if lp is not None:
        phi = math.exp(lp) if lp < 709 else math.inf
    expo = floor = None
    if n is not None:
        count = len(enumerate_sphere(d, n))
        if count == 0:
            raise DomainError(f"empty eigenspace: S_{d}(sqrt({n}))")
        expo = 2 * d * min(count - 1, math.sqrt(n))
        floor = r**expo
    return ExponentTables(phi, lp, h_exponent(d, gamma), {m: delta_cc(m) for m in m_values}, expo, floor)
