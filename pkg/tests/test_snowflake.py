import math
from types import SimpleNamespace

import numpy as np
import pytest

from sinembed import snowflake as sf
from sinembed.errors import GuardError, ParameterError
from sinembed.harness import DatasetSpec, generate_dataset, pair_norms


@pytest.fixture(scope="module")
def curve():
    return generate_dataset(DatasetSpec("low-doubling-curve", 40, 16, seed=3))


@pytest.fixture(scope="module")
def phi(curve):
    return sf.build_snowflake(curve, 0.5, 0.2, 1, 1, kprime=16, seed=1)


def test_group_half_count_example():
    assert sf.group_half_count(2.0, 0.2, 0.5) == 51
    assert sf.group_half_count(2.0, 0.2, 0.5) == math.ceil(2 * math.log(10) / math.log(1.2) / 0.5)
    # alpha and 1 - alpha share the same count
    assert sf.group_half_count(3.0, 0.1, 0.3) == sf.group_half_count(3.0, 0.1, 0.7)


def test_params_validation():
    for alpha, eps in [(0.0, 0.2), (1.0, 0.2), (0.5, 0.25), (0.5, 0.0)]:
        with pytest.raises(ParameterError):
            sf.snowflake_params(alpha, eps, 1, 1, 8, 1.0, 10.0)
    with pytest.raises(ParameterError):
        sf.snowflake_params(0.5, 0.2, 1, 1, 0, 1.0, 10.0)


def test_params_interval_and_dimension():
    pr = sf.snowflake_params(0.5, 0.2, 1, 1, 8, 2.0, 500.0)
    assert pr.first == -2 * pr.v
    assert (1.2) ** pr.last <= (1.2) ** (2 * pr.v) * 500 < 1.2 ** (pr.last + 1)
    assert pr.dimension == 2 * pr.v * 8
    assert pr.s == pytest.approx(1.2 ** (2 * pr.v * 0.5))
    assert pr.s >= (2.0 / 0.2) ** 4


def test_scale_cap_warning():
    with pytest.warns(RuntimeWarning, match="exceed the cap"):
        sf.snowflake_params(0.5, 0.2, 1, 1, 8, 2.0, 1e6, scale_cap=10)


def test_half_alpha_divisor(phi):
    for i in (-7, 0, 12):
        direct = (1.2) ** i / math.sqrt(phi.params.s) / (1.2) ** (i * 0.5)
        assert phi.block_factor(i) == pytest.approx(direct, rel=1e-12)


def test_blocks_sum_round_robin(phi, curve):
    pr = phi.params
    raw = np.zeros((len(curve), pr.dimension))
    for i, img in phi.scale_images(curve):
        g = i % pr.groups
        raw[:, g * pr.kprime:(g + 1) * pr.kprime] += img
    assert np.allclose(raw * phi.unit ** pr.alpha, phi.raw(curve), rtol=1e-12, atol=0)


def test_deterministic(curve, phi):
    again = sf.build_snowflake(curve, 0.5, 0.2, 1, 1, kprime=16, seed=1)
    assert again.M == phi.M
    assert np.array_equal(again(curve), phi(curve))


def test_embed_single_point_and_identity(phi, curve):
    assert np.array_equal(sf.snowflake_embed(phi, curve[3]), phi(curve[3:4])[0])
    assert np.all(sf.snowflake_embed(phi, curve[3]) - sf.snowflake_embed(phi, curve[3]) == 0)
    with pytest.raises(ParameterError):
        sf.snowflake_embed(phi, np.zeros(5))


def test_interval_covers_all_pairs(phi, curve):
    i, j = np.triu_indices(len(curve), 1)
    t = pair_norms(curve, i, j, 1.0) / phi.unit
    lo = 1.2 ** min(phi.params.scales)
    hi = 1.2 ** max(phi.params.scales)
    assert np.all((t >= lo) & (t <= hi))


def _fake(alpha, p, q, factor):
    params = SimpleNamespace(alpha=alpha, p=p, q=q)
    return SimpleNamespace(params=params, raw=lambda X: factor * X, history={}, M=None)


def test_calibrate_constant_ratio():
    # raw = c x with alpha = 1 makes every ratio equal c
    rng = np.random.default_rng(0)
    xs = rng.normal(size=(64, 3))
    t = np.exp(rng.uniform(0, math.log(1e4), 64))
    u = rng.normal(size=(64, 3))
    ys = xs + t[:, None] * u / np.abs(u).sum(axis=1, keepdims=True)
    fake = _fake(1.0, 1.0, 1.0, 2.5)
    assert sf.calibrate_M(fake, xs, ys) == pytest.approx(2.5, rel=1e-12)


def test_calibrate_rejects_narrow_or_few_pairs():
    rng = np.random.default_rng(1)
    xs = rng.normal(size=(64, 2))
    ys = xs + np.array([1.0, 0.0]) * rng.uniform(1, 5, 64)[:, None]
    with pytest.raises(ParameterError, match="decades"):
        sf.calibrate_M(_fake(1.0, 1.0, 1.0, 1.0), xs, ys)
    with pytest.raises(ParameterError, match="32 pairs"):
        sf.calibrate_M(_fake(1.0, 1.0, 1.0, 1.0), xs[:10], ys[:10] * 100)
    ys = xs + np.array([1.0, 0.0]) * np.exp(rng.uniform(0, math.log(300), 64))[:, None]
    with pytest.warns(RuntimeWarning, match="decades"):
        sf.calibrate_M(_fake(1.0, 1.0, 1.0, 1.0), xs, ys)


def test_M_stable_under_resampling_and_held_out(phi, curve):
    diam = phi.history["diameter"]
    Ms = []
    for seed in (11, 12):
        xs, ys = sf.calibration_pairs(curve, 1.0, seed=seed, unit=phi.unit, diameter=diam)
        probe = sf.SnowflakeEmbedding(phi.params, phi.maps, phi.unit)
        Ms.append(sf.calibrate_M(probe, xs, ys))
    assert max(Ms) / min(Ms) <= 1.3
    # held-out pairs: the curve's own pairs
    i, j = np.triu_indices(len(curve), 1)
    Y = phi(curve)
    ratio = pair_norms(Y, i, j, 1.0) / pair_norms(curve, i, j, 1.0) ** 0.5
    assert abs(np.median(ratio) - 1) <= 0.05


def test_window_dominance(phi, curve):
    i, j = np.triu_indices(len(curve), 1)
    share, total = sf.window_share(phi, curve, i, j)
    assert np.all(total > 0)
    # fitted constant C with share >= 1 - C eps
    C = float(np.max(1 - share)) / phi.params.eps
    assert C <= 10


def test_amplitude_bound_dominates_blocks(phi, curve):
    i, j = np.triu_indices(len(curve), 1)
    for scale, img in phi.scale_images(curve):
        assert np.max(pair_norms(img, i, j, 1.0)) <= sf.amplitude_bound(phi, scale) * (1 + 1e-12)


def test_intrinsic_variant_hits_partition_guard():
    # padding budget eps/s with s >= (d/eps)^4 needs far more partitions than the guard allows
    X = generate_dataset(DatasetSpec("low-doubling-curve", 12, 4, seed=2))
    with pytest.raises(GuardError, match="partitions"):
        sf.build_snowflake(X, 0.5, 0.2, 1, 1, kprime=4, seed=0, per_scale="intrinsic")
    with pytest.raises(ParameterError):
        sf.build_snowflake(X, 0.5, 0.2, 1, 1, per_scale="other")
