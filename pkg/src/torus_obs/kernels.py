"""Hot numeric kernels, each with a loop path (numba) and a vectorized numpy path.

Every public kernel ``foo`` dispatches to ``foo_loop`` (compiled with numba
when the backend allows) or ``foo_numpy``.  Both are importable directly so
tests and the benchmark can compare them.
"""

import math

import numpy as np

from ._accel import HAVE_NUMBA, jit

SERIES_CUTOFF = 5.0


# --------------------------------------------------------------------------
# ball kernel B_d(rho) = Gamma(d/2+1) (2/rho)^{d/2} J_{d/2}(rho)
# --------------------------------------------------------------------------

def _miller_start(x, order):
    return 2 * ((max(order, int(x)) + 24 + int(math.sqrt(40.0 * x + 40.0))) // 2)


@jit
def _ball_kernel_scalar(d, rho):
    if rho == 0.0:
        return 1.0
    nu = 0.5 * d
    if rho <= SERIES_CUTOFF:
        # sum_m (-rho^2/4)^m / (m! (nu+1)_m), Kahan-compensated
        q = 0.25 * rho * rho
        term = 1.0
        s = 1.0
        comp = 0.0
        m = 0
        while m < 200:
            m += 1
            term *= -q / (m * (nu + m))
            y = term - comp
            t = s + y
            comp = (t - s) - y
            s = t
            if abs(term) < 1e-18 * abs(s) and m > q:
                break
        return s
    x = rho
    if d % 2 == 0:
        order = d // 2
        start = 2 * ((max(order, int(x)) + 24 + int(math.sqrt(40.0 * x + 40.0))) // 2)
        jp = 0.0
        j = 1e-280
        norm = 0.0
        target = 0.0
        k = start
        while k > 0:
            jm = (2.0 * k / x) * j - jp
            jp = j
            j = jm
            k -= 1
            if k == order:
                target = j
            if k > 0 and k % 2 == 0:
                norm += 2.0 * j
            if abs(j) > 1e200:
                j *= 1e-200
                jp *= 1e-200
                norm *= 1e-200
                target *= 1e-200
        norm += j
        if order == 0:
            target = j
        val = target / norm
        # nu! (2/x)^nu J_nu(x)
        f = 1.0
        for i in range(1, order + 1):
            f *= 2.0 * i / x
        return f * val
    n = (d - 1) // 2
    start = 2 * ((max(n, int(x)) + 24 + int(math.sqrt(40.0 * x + 40.0))) // 2)
    jp = 0.0
    j = 1e-280
    target = 0.0
    j1 = 0.0
    l = start
    while l > 0:
        jm = ((2.0 * l + 1.0) / x) * j - jp
        jp = j
        j = jm
        l -= 1
        if l == n:
            target = j
        if l == 1:
            j1 = j
        if abs(j) > 1e200:
            j *= 1e-200
            jp *= 1e-200
            target *= 1e-200
            j1 *= 1e-200
    if n == 0:
        target = j
    s0 = math.sin(x) / x
    s1 = math.sin(x) / (x * x) - math.cos(x) / x
    if abs(s0) >= abs(s1):
        val = target * (s0 / j)
    else:
        val = target * (s1 / j1)
    # (2n+1)!! j_n(x) / x^n
    f = 1.0
    for i in range(1, n + 1):
        f *= (2.0 * i + 1.0) / x
    return f * val


@jit
def ball_kernel_loop(d, rho):
    out = np.empty(rho.shape[0])
    for i in range(rho.shape[0]):
        out[i] = _ball_kernel_scalar(d, rho[i])
    return out


def ball_kernel_numpy(d, rho):
    rho = np.asarray(rho, dtype=np.float64)
    out = np.ones_like(rho)
    nu = 0.5 * d
    small = (rho > 0) & (rho <= SERIES_CUTOFF)
    if small.any():
        q = 0.25 * rho[small] ** 2
        term = np.ones_like(q)
        s = np.ones_like(q)
        comp = np.zeros_like(q)
        for m in range(1, 80):
            term = term * (-q / (m * (nu + m)))
            y = term - comp
            t = s + y
            comp = (t - s) - y
            s = t
        out[small] = s
    big = rho > SERIES_CUTOFF
    if big.any():
        x = rho[big]
        out[big] = _miller_numpy(d, x)
    return out


def _miller_numpy(d, x):
    start = _miller_start(float(x.max()), d)
    jp = np.zeros_like(x)
    j = np.full_like(x, 1e-280)
    target = np.zeros_like(x)
    if d % 2 == 0:
        order = d // 2
        norm = np.zeros_like(x)
        for k in range(start, 0, -1):
            jm = (2.0 * k / x) * j - jp
            jp, j = j, jm
            km = k - 1
            if km == order:
                target = j.copy()
            if km > 0 and km % 2 == 0:
                norm += 2.0 * j
            scale = np.where(np.abs(j) > 1e200, 1e-200, 1.0)
            j, jp, norm, target = j * scale, jp * scale, norm * scale, target * scale
        norm += j
        if order == 0:
            target = j
        f = np.ones_like(x)
        for i in range(1, order + 1):
            f *= 2.0 * i / x
        return f * target / norm
    n = (d - 1) // 2
    j1 = np.zeros_like(x)
    for l in range(start, 0, -1):
        jm = ((2.0 * l + 1.0) / x) * j - jp
        jp, j = j, jm
        lm = l - 1
        if lm == n:
            target = j.copy()
        if lm == 1:
            j1 = j.copy()
        scale = np.where(np.abs(j) > 1e200, 1e-200, 1.0)
        j, jp, target, j1 = j * scale, jp * scale, target * scale, j1 * scale
    if n == 0:
        target = j
    s0 = np.sin(x) / x
    s1 = np.sin(x) / x**2 - np.cos(x) / x
    val = np.where(np.abs(s0) >= np.abs(s1), target * (s0 / j), target * (s1 / j1))
    f = np.ones_like(x)
    for i in range(1, n + 1):
        f *= (2.0 * i + 1.0) / x
    return f * val


def ball_kernel_values(d, rho):
    rho = np.ascontiguousarray(rho, dtype=np.float64)
    if HAVE_NUMBA:
        return ball_kernel_loop(int(d), rho)
    return ball_kernel_numpy(int(d), rho)


# --------------------------------------------------------------------------
# cyclic Jacobi eigensolver
# --------------------------------------------------------------------------

@jit
def _offdiag_norm(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j] * a[i, j]
    return math.sqrt(s)


@jit
def _rotation(app, aqq, apq):
    """Cosine and sine of the Jacobi rotation that annihilates a[p, q]."""
    theta = (aqq - app) / (2.0 * apq)
    if abs(theta) > 1e150:
        # theta^2 would overflow; t ~ 1/(2 theta)
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    return c, t * c


@jit
def jacobi_eigh_loop(a, tol, max_sweeps):
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    sweeps = 0
    off = _offdiag_norm(a)
    while off > tol and sweeps < max_sweeps:
        sweeps += 1
        # threshold on early sweeps, as in the classic cyclic scheme
        thresh = 0.2 * off / (n * n) if sweeps < 4 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh or apq == 0.0:
                    continue
                c, s = _rotation(a[p, p], a[q, q], apq)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
        off = _offdiag_norm(a)
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps, off


def jacobi_eigh_numpy(a, tol, max_sweeps):
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    mask = ~np.eye(n, dtype=bool)
    sweeps = 0
    off = float(np.sqrt(np.sum(a[mask] ** 2)))
    while off > tol and sweeps < max_sweeps:
        sweeps += 1
        thresh = 0.2 * off / (n * n) if sweeps < 4 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh or apq == 0.0:
                    continue
                c, s = _rotation(a[p, p], a[q, q], apq)
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = float(np.sqrt(np.sum(a[mask] ** 2)))
    return np.diag(a).copy(), v, sweeps, off


def jacobi_eigh(a, tol, max_sweeps):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if HAVE_NUMBA:
        return jacobi_eigh_loop(a, float(tol), int(max_sweeps))
    return jacobi_eigh_numpy(a, tol, max_sweeps)


# --------------------------------------------------------------------------
# |sum_k c_k exp(i k.x)| on a batch of points
# --------------------------------------------------------------------------

@jit
def expsum_abs_loop(freqs, cre, cim, x):
    m = x.shape[0]
    t = freqs.shape[0]
    d = freqs.shape[1]
    out = np.empty(m)
    for i in range(m):
        sr = 0.0
        si = 0.0
        for j in range(t):
            ph = 0.0
            for k in range(d):
                ph += freqs[j, k] * x[i, k]
            cs = math.cos(ph)
            sn = math.sin(ph)
            sr += cre[j] * cs - cim[j] * sn
            si += cre[j] * sn + cim[j] * cs
        out[i] = math.sqrt(sr * sr + si * si)
    return out


def expsum_abs_numpy(freqs, cre, cim, x, chunk=65536):
    coef = cre + 1j * cim
    out = np.empty(x.shape[0])
    for lo in range(0, x.shape[0], chunk):
        ph = x[lo:lo + chunk] @ freqs.T
        out[lo:lo + chunk] = np.abs(np.exp(1j * ph) @ coef)
    return out


def expsum_abs(freqs, coeffs, x):
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    cre = np.ascontiguousarray(coeffs.real)
    cim = np.ascontiguousarray(coeffs.imag)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if HAVE_NUMBA:
        return expsum_abs_loop(freqs, cre, cim, x)
    return expsum_abs_numpy(freqs, cre, cim, x)


# --------------------------------------------------------------------------
# union-find over an edge list
# --------------------------------------------------------------------------

@jit
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@jit
def union_find_loop(n, edges_i, edges_j):
    parent = np.arange(n)
    for e in range(edges_i.shape[0]):
        a = _find(parent, edges_i[e])
        b = _find(parent, edges_j[e])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    roots = np.empty(n, dtype=np.int64)
    for i in range(n):
        roots[i] = _find(parent, i)
    return roots


def union_find_numpy(n, edges_i, edges_j):
    # label propagation: each vertex takes the min label of its neighbours
    labels = np.arange(n)
    if len(edges_i) == 0:
        return labels
    while True:
        new = labels.copy()
        np.minimum.at(new, edges_i, labels[edges_j])
        np.minimum.at(new, edges_j, labels[edges_i])
        new = new[new]
        if np.array_equal(new, labels):
            return labels
        labels = new


def union_find(n, edges_i, edges_j):
    """Root label per vertex; the root is the smallest index in each component."""
    edges_i = np.ascontiguousarray(edges_i, dtype=np.int64)
    edges_j = np.ascontiguousarray(edges_j, dtype=np.int64)
    if HAVE_NUMBA:
        return union_find_loop(int(n), edges_i, edges_j)
    return union_find_numpy(int(n), edges_i, edges_j)
