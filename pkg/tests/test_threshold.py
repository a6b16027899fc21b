import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sinembed import threshold as th
from sinembed.errors import ParameterError
from sinembed.harness import DatasetSpec, generate_dataset, pair_norms
from sinembed.range import required_dimension
from sinembed.stable import cosine_moment, transform_H


def loglog_slope(xs, fn, repeats=5):
    best = []
    for x in xs:
        runs = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn(x)
            runs.append(time.perf_counter() - t0)
        best.append(min(runs))
    return np.polyfit(np.log(xs), np.log(best), 1)[0]


# ---- compensated inner products ---------------------------------------------

def test_compensated_project_is_exactly_rounded():
    rng = np.random.default_rng(1)
    G = rng.standard_cauchy((20, 64)) * np.exp(rng.normal(0, 4, (20, 64)))
    X = rng.normal(size=(5, 64)) * np.exp(rng.normal(0, 4, (5, 64)))
    got = th.compensated_project(G, X)
    exact = np.array([[float(sum(Fraction(a) * Fraction(b) for a, b in zip(g, x))) for g in G] for x in X])
    assert np.max(np.abs(got - exact) / np.abs(exact)) <= 2 ** -52


def test_compensated_project_ignores_batching():
    rng = np.random.default_rng(2)
    G = rng.standard_cauchy((300, 17))
    X = rng.normal(size=(40, 17))
    whole = th.compensated_project(G, X)
    rows = np.vstack([th.compensated_project(G, X[i:i + 1]) for i in range(len(X))])
    assert np.array_equal(whole, rows)


# ---- construction -----------------------------------------------------------

def test_same_seed_same_embedding():
    a = th.make_threshold_embedding(1.5, 1.2, 10, 50, 8, seed=3)
    b = th.make_threshold_embedding(1.5, 1.2, 10, 50, 8, seed=3)
    assert np.array_equal(a.matrix, b.matrix) and np.array_equal(a.phases, b.phases)


def test_different_seeds_differ():
    a = th.make_threshold_embedding(1.5, 1.2, 10, 100, 50, seed=3)
    b = th.make_threshold_embedding(1.5, 1.2, 10, 100, 50, seed=4)
    assert np.mean(a.matrix != b.matrix) >= 0.99


def test_phases_uniform():
    E = th.make_threshold_embedding(2, 1, 10, 20000, 1, seed=0)
    assert E.phases.min() >= 0 and E.phases.max() < 2 * math.pi
    assert abs(E.phases.mean() - math.pi) < 0.05


@pytest.mark.parametrize("args", [(1, 1.5, 10, 5, 3), (2, 1, 1.0, 5, 3), (2, 1, 10, 0, 3),
                                  (2, 1, 10, 5, 0), (2.5, 1, 10, 5, 3)])
def test_construction_rejects_bad_parameters(args):
    with pytest.raises(ParameterError):
        th.make_threshold_embedding(*args)


def test_embedding_cost_linear_in_k():
    X = np.random.default_rng(0).normal(size=(200, 64))
    maps = {k: th.make_threshold_embedding(2, 1, 20, k, 64, 0) for k in (100, 200, 400)}
    assert 0.6 <= loglog_slope([100, 200, 400], lambda k: maps[k](X)) <= 1.5


# ---- single coordinate ------------------------------------------------------

def test_coordinate_at_origin():
    E = th.make_threshold_embedding(1.5, 1.5, 7, 4, 6, seed=1)
    F = E.coordinate(2)
    assert th.embed_coordinate(F, np.zeros(6)) == pytest.approx(F.amplitude * math.sin(F.phase))
    assert F.amplitude == pytest.approx(7 / (2 * cosine_moment(1.5) ** (1 / 1.5)))


@given(st.integers(0, 10_000), st.floats(1.0, 2.0), st.floats(1.5, 200.0))
@settings(max_examples=60, deadline=None)
def test_coordinate_difference_identity(seed, q, s):
    rng = np.random.default_rng(seed)
    E = th.make_threshold_embedding(2.0, q, s, 1, 5, seed=seed)
    F = E.coordinate(0)
    v, w = rng.normal(size=5) * 3, rng.normal(size=5) * 3
    lhs = abs(th.embed_coordinate(F, v) - th.embed_coordinate(F, w)) ** q
    gd, gs = F.row @ (v - w), F.row @ (v + w)
    rhs = s ** q / cosine_moment(q) * abs(math.sin(gd / s) * math.cos(F.phase + gs / s)) ** q
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10 * s ** q)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_coordinate_bounded(seed):
    rng = np.random.default_rng(seed)
    E = th.make_threshold_embedding(1.2, 1.1, 9, 1, 4, seed=seed)
    F = E.coordinate(0)
    v = rng.standard_cauchy(4) * 1e3
    assert abs(th.embed_coordinate(F, v)) <= F.amplitude * (1 + 1e-15)


def test_coordinate_phase_periodicity():
    E = th.make_threshold_embedding(2, 2, 5, 1, 3, seed=2)
    F = E.coordinate(0)
    v = np.array([0.3, -1.1, 2.0])
    # moving v along the row by pi s / ||g||^2 shifts the argument by 2 pi
    shift = math.pi * F.s * F.row / (F.row @ F.row)
    assert th.embed_coordinate(F, v + shift) == pytest.approx(th.embed_coordinate(F, v), abs=1e-12)


def test_coordinate_dimension_mismatch():
    F = th.make_threshold_embedding(2, 2, 5, 1, 3, seed=2).coordinate(0)
    with pytest.raises(ParameterError):
        th.embed_coordinate(F, np.zeros(4))


# ---- full embedding ---------------------------------------------------------

def test_embed_point_matches_coordinates():
    E = th.make_threshold_embedding(1.5, 1.2, 12, 30, 7, seed=5)
    v = np.random.default_rng(0).normal(size=7)
    img = th.embed_point(E, v)
    coords = [E.k ** (-1 / E.q) * th.embed_coordinate(E.coordinate(i), v) for i in range(E.k)]
    assert np.allclose(img, coords, rtol=0, atol=1e-13)
    assert np.array_equal(th.embed_point(E, v) - th.embed_point(E, v), np.zeros(E.k))


def test_embed_point_dimension_mismatch():
    E = th.make_threshold_embedding(1.5, 1.2, 12, 30, 7, seed=5)
    with pytest.raises(ParameterError):
        th.embed_point(E, np.zeros(6))


def test_obliviousness():
    X = np.random.default_rng(4).normal(size=(30, 10))
    E = th.make_threshold_embedding(1.3, 1.0, 15, 40, 10, seed=8)
    whole = E(X)
    perm = np.random.default_rng(5).permutation(30)
    assert np.array_equal(E(X[perm]), whole[perm])
    assert np.array_equal(np.vstack([E(X[:11]), E(X[11:])]), whole)


def test_expected_transform_examples():
    assert th.expected_transform(1.5, 1.2, 10, 0.0) == 0.0
    assert th.expected_transform(2, 2, 10, 10) == pytest.approx(100 * (1 - math.exp(-4)) / 2, rel=1e-12)
    assert th.expected_transform(2, 2, 10, 10) == pytest.approx(49.084, abs=1e-3)
    grid = np.linspace(0, 10, 41)
    vals = [th.expected_transform(1.5, 1.2, 10, t) for t in grid]
    assert np.all(np.diff(vals) >= 0)
    with pytest.raises(ParameterError):
        th.expected_transform(2, 1, 10, -1)


def test_mean_distance_matches_expectation():
    s, t, m = 20.0, 5.0, 6
    rng = np.random.default_rng(0)
    v = rng.normal(size=m)
    d = rng.normal(size=m)
    w = v + t * d / np.linalg.norm(d)
    vals = []
    for seed in range(200):
        E = th.make_threshold_embedding(2, 1, s, 64, m, seed)
        Y = E(np.vstack([v, w]))
        vals.append(np.sum(np.abs(Y[0] - Y[1])))
    assert np.mean(vals) == pytest.approx(th.expected_transform(2, 1, s, t), rel=0.05)


def test_deterministic_cap_adversarial():
    E = th.make_threshold_embedding(1.0, 1.0, 8.0, 16, 3, seed=9)
    cap = th.deterministic_cap(1.0, 8.0)
    rng = np.random.default_rng(0)
    X = rng.standard_cauchy((2000, 3)) * 50
    Y = E(X)
    i, j = rng.integers(0, 2000, (2, 5000))
    assert np.max(pair_norms(Y, i, j, 1.0)) <= cap
    # pair built to make every sine hit opposite extremes is still capped
    best = np.max(np.abs(np.sin(E.phases + 2 * E.project(X) / E.s)), axis=0)
    assert E.coordinate_scale * E.amplitude * 2 * best.sum() <= cap * (1 + 1e-12)


def _bilipschitz_trial(seed, X, s, k, eps, p=2.0, q=1.0):
    E = th.make_threshold_embedding(p, q, s, k, X.shape[1], seed)
    Y = E(X)
    i, j = np.triu_indices(len(X), 1)
    t = pair_norms(X, i, j, p)
    emb = pair_norms(Y, i, j, q) ** q
    want = np.array([th.expected_transform(p, q, s, x) for x in t])
    mid = (t >= 1) & (t <= s)
    small = t < 1
    ok_mid = np.all(np.abs(emb[mid] / want[mid] - 1) <= eps)
    ok_small = np.all(emb[small] <= th.expected_transform(p, q, s, 1.0) + eps)
    return ok_mid, ok_small


def test_bilipschitz_concentration_with_calibrated_constant():
    s, eps = 20.0, 0.3
    spec = DatasetSpec("clustered", 64, 16, target=(1.0, s), clusters=12, norm_p=2.0)
    # calibrate the constant on one dataset, evaluate on another
    calib = generate_dataset(spec)
    chosen = None
    for c in (0.005, 0.01, 0.02, 0.05, 0.1):
        k = required_dimension(64, eps, s, 2, 1, "min", c)
        if all(_bilipschitz_trial(100 + r, calib, s, k, eps)[0] for r in range(5)):
            chosen = c
            break
    assert chosen is not None
    X = generate_dataset(DatasetSpec("clustered", 64, 16, seed=1, target=(1.0, s), clusters=12,
                                     norm_p=2.0))
    k = required_dimension(64, eps, s, 2, 1, "min", chosen)
    trials = [_bilipschitz_trial(r, X, s, k, eps) for r in range(10)]
    assert sum(a for a, _ in trials) >= 9
    assert sum(b for _, b in trials) >= 9
