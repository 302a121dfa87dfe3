import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torus_obs import (CutoffSpec, DomainError, ExponentialPolynomial, arc_window_check, connes_threshold,
                       decomposition_gap, enumerate_sphere, is_affine_hyperplane, partition)
from torus_obs import clusters
from torus_obs.clusters import arc_sweep, verdict_csv


def test_partition_examples():
    s = enumerate_sphere(2, 25)
    assert len(partition(s, 1.0)) == 12
    p = partition(s, 1.5)
    assert sorted(len(c) for c in p.components) == [1] * 4 + [2] * 4
    assert ((3, 4), (4, 3)) in p.components
    assert len(partition(s, 100)) == 1
    with pytest.raises(DomainError):
        partition(s, 0)
    with pytest.raises(DomainError):
        partition([(1, 0), (1, 0)], 1.0)


def test_partition_strict_edges():
    pts = [(0, 0), (1, 0), (3, 0)]
    assert len(partition(pts, 1.0)) == 3
    assert len(partition(pts, 2.0)) == 2
    assert len(partition(pts, 2.0000001)) == 1


def _check_edge_soundness(pts, rho):
    p = partition(pts, rho)
    lab = p.labels()
    assert sorted(lab) == sorted(map(tuple, pts))
    for a, b in itertools.combinations(lab, 2):
        dist = math.dist(a, b)
        if lab[a] != lab[b]:
            assert dist >= rho
    for comp in p.components:
        g = nx.Graph()
        g.add_nodes_from(comp)
        g.add_edges_from((a, b) for a, b in itertools.combinations(comp, 2) if math.dist(a, b) < rho)
        assert nx.is_connected(g)
    return p


SOUNDNESS = [(2, 25), (2, 325), (2, 1105), (3, 27), (3, 50), (3, 89), (4, 6)]


@pytest.mark.parametrize("d,n", SOUNDNESS)
def test_edge_soundness_and_refinement(d, n):
    s = enumerate_sphere(d, n)
    assert len(s) <= 200
    rhos = [1.2, 2.0, 3.5, 6.0, 10.0, 25.0]
    parts = [_check_edge_soundness(s.tuples(), rho) for rho in rhos]
    for fine, coarse in zip(parts, parts[1:]):
        lab = coarse.labels()
        for comp in fine.components:
            assert len({lab[p] for p in comp}) == 1


def test_arc_examples():
    c = arc_window_check(25, 2)
    assert c.threshold == pytest.approx(math.sqrt(2) * 25 ** (1 / 6))
    assert c.violations == ()
    assert arc_window_check(3, 2).violations == ()
    assert arc_window_check(1105, 2).violations == ()
    with pytest.raises(DomainError):
        arc_window_check(0, 2)


def _brute_arc_violations(n, m, threshold):
    pts = enumerate_sphere(2, n).points
    lam = math.sqrt(n)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    bad = 0
    for t in theta:
        fwd = np.mod(theta - t, 2 * math.pi) * lam
        if np.count_nonzero(fwd < threshold) > m:
            bad += 1
    return bad


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 5000), m=st.sampled_from([1, 2, 3, 4]))
def test_arc_check_matches_brute_force(n, m):
    c = arc_window_check(n, m)
    assert len(c.violations) == _brute_arc_violations(n, m, c.threshold)


def test_arc_check_detects_violations(monkeypatch):
    monkeypatch.setattr(clusters, "arc_threshold", lambda n, m: 10.0)
    c = arc_window_check(25, 2)
    assert len(c.violations) == _brute_arc_violations(25, 2, 10.0) > 0
    assert all(v["arc"] < 10.0 and v["points"] == 3 for v in c.violations)


def test_arc_sweep_and_csv():
    checks = arc_sweep(1, 50, 2)
    assert [c.n for c in checks] == list(range(1, 51))
    text = verdict_csv(checks).splitlines()
    assert text[0] == "n,threshold,m,violations" and len(text) == 51


def test_affine_hyperplane_examples():
    assert is_affine_hyperplane([(3, 4), (4, 3)])
    assert not is_affine_hyperplane([(5, 0), (0, 5), (-5, 0), (0, -5)])
    assert is_affine_hyperplane([(1, 2, 3), (4, 5, 6)])
    assert is_affine_hyperplane([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert not is_affine_hyperplane([(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0)])


def test_affine_hyperplane_against_svd():
    g = np.random.default_rng(12345)
    for _ in range(500):
        d = int(g.integers(2, 5))
        k = int(g.integers(1, 8))
        if g.random() < 0.5:
            # force a planar set: integer combinations of d - 1 directions
            basis = g.integers(-3, 4, size=(d - 1, d))
            pts = g.integers(-3, 4, size=(k, d - 1)) @ basis + g.integers(-5, 6, size=d)
        else:
            pts = g.integers(-6, 7, size=(k, d))
        diffs = (pts - pts[0]).astype(float)
        sv = np.linalg.svd(diffs, compute_uv=False) if len(pts) > 1 else np.zeros(0)
        rank = int(np.sum(sv > 1e-8 * max(1.0, sv.max() if sv.size else 1.0)))
        assert is_affine_hyperplane(pts.tolist()) == (rank <= d - 1)


def _connes_linear(sphere):
    pts = sphere.tuples()
    if is_affine_hyperplane(pts):
        return math.inf
    def sq(p, q):
        return sum((a - b) ** 2 for a, b in zip(p, q))

    ok = []
    for D in sorted({sq(p, q) for p, q in itertools.combinations(pts, 2)}):
        g = nx.Graph()
        g.add_nodes_from(pts)
        g.add_edges_from((p, q) for p, q in itertools.combinations(pts, 2) if sq(p, q) < D)
        if all(is_affine_hyperplane(sorted(c)) for c in nx.connected_components(g)):
            ok.append(D)
    return math.sqrt(max(ok))


def test_connes_examples():
    assert connes_threshold(enumerate_sphere(3, 1)) == pytest.approx(math.sqrt(2))
    assert connes_threshold(enumerate_sphere(4, 4)) == pytest.approx(2.0)
    assert connes_threshold(enumerate_sphere(3, 0)) == math.inf
    with pytest.raises(DomainError):
        connes_threshold(enumerate_sphere(2, 25))


@pytest.mark.parametrize("d,n", [(3, n) for n in (2, 3, 5, 6, 9, 11, 14, 17, 18, 21, 26, 29, 41)] + [(4, 2), (4, 3), (4, 7)])
def test_connes_matches_linear_sweep(d, n):
    s = enumerate_sphere(d, n)
    assert connes_threshold(s) == _connes_linear(s)


def test_cutoff_envelope_dominates_transform():
    g = np.random.default_rng(0)
    for d in (1, 2, 3, 4):
        for sigma in (0.5, 1.0, 2.0):
            cut = CutoffSpec(sigma)
            xi = g.normal(size=(200_000, d)) * g.choice([1, 10, 100], size=(200_000, 1))
            s = np.linalg.norm(xi, axis=1)
            assert np.all(np.abs(cut.chi_hat(xi)) <= cut.envelope(s, d) * (1 + 1e-12))
    assert CutoffSpec().chi_hat(np.zeros(3)) == 1.0


def test_cutoff_is_a_nonnegative_bump():
    # chi is the inverse transform of chi_hat on one axis; sample it on a fine grid
    cut = CutoffSpec(1.0)
    xi = np.linspace(-400, 400, 160_001)
    h = cut.chi_hat(xi[:, None])
    x = np.linspace(-0.8, 0.8, 81)
    chi = np.trapezoid(h[None, :] * np.cos(np.outer(x, xi)), xi, axis=1) / (2 * math.pi)
    assert chi.min() > -1e-6
    assert np.all(np.abs(chi[np.abs(x) > 0.52]) < 1e-6)
    assert chi[40] > 0


def test_cutoff_errors():
    with pytest.raises(DomainError):
        CutoffSpec(shape="gaussian")
    with pytest.raises(DomainError):
        CutoffSpec(sigma=0)


def _signed(n, seed):
    s = enumerate_sphere(2, n)
    signs = np.random.default_rng(seed).choice([-1, 1], size=len(s))
    return ExponentialPolynomial.from_terms(zip(s.tuples(), signs.tolist()))


def test_decomposition_trivial_cases():
    u = _signed(25, 0)
    g = decomposition_gap(u, 100.0, 0.1)
    assert g.lhs_gap == 0 and g.holds and g.components == 1
    one = ExponentialPolynomial.from_terms({(3, 4): 1})
    assert decomposition_gap(one, 1.5, 0.1).lhs_gap == 0


@pytest.mark.parametrize("n", [25, 325, 1105])
@pytest.mark.parametrize("rho", [1.5, 5.0])
@pytest.mark.parametrize("r", [0.1, 0.3])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_decomposition_matrix(n, rho, r, seed):
    g = decomposition_gap(_signed(n, seed), rho, r)
    assert g.holds
    assert g.lhs_gap <= g.rhs_proven * (1 + 1e-9)


def test_decomposition_lhs_against_direct_sum():
    u = _signed(65, 4)
    rho, r = 5.0, 0.3
    cut = CutoffSpec()
    lab = partition(u.freqs, rho).labels()
    total = 0j
    for (k, a), (l, b) in itertools.product(zip(u.freqs, u.coeffs), repeat=2):
        if lab[k] != lab[l]:
            xi = r * (np.array(k) - np.array(l))
            total += a * b * float(cut.chi_hat(xi))
    assert decomposition_gap(u, rho, r).lhs_gap == pytest.approx(abs(total), rel=1e-12, abs=1e-14)


def test_decomposition_errors():
    u = _signed(25, 0)
    with pytest.raises(DomainError):
        decomposition_gap(u, 1.5, 0.1, cutoff="box")
    with pytest.raises(DomainError):
        decomposition_gap(u, 1.5, 0.0)
