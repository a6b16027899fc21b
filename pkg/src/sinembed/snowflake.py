"""Alpha-snowflake embedding: ||Phi(x) - Phi(y)||_q ~ ||x - y||_p^alpha.

Scale i (radius r_i = (1+eps)^i) gets its own threshold embedding applied
to x sqrt(s)/r_i, rescaled by r_i/sqrt(s) and damped by (1+eps)^(i(1-alpha)).
Scales are summed round-robin into 2v blocks (block i mod 2v), and the
result is normalized by an empirically calibrated constant M.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .harness import pair_norms
from .metric import distance_matrix, estimate_doubling_dimension, intrinsic_embedding, min_distance
from .stable import check_pair, cosine_moment
from .threshold import make_threshold_embedding

SCALE_CAP = 2000
TRUNCATION = 1e-12
CALIBRATION_PAIRS = 256


@dataclass(frozen=True)
class SnowflakeParams:
    """Derived sizes of a snowflake embedding.

    ``v`` is the group half-count, ``scales`` the retained scale indices,
    ``s`` the per-scale threshold and ``ddim`` the doubling estimate used.
    """

    alpha: float
    eps: float
    p: float
    q: float
    kprime: int
    ddim: float
    v: int
    s: float
    first: int
    last: int
    scales: tuple

    @property
    def alpha_bar(self):
        return min(self.alpha, 1.0 - self.alpha)

    @property
    def groups(self):
        return 2 * self.v

    @property
    def dimension(self):
        return self.groups * self.kprime


def group_half_count(ddim, eps, alpha):
    """v = ceil(2 log_{1+eps}(d/eps) / alpha_bar) with d = max(ddim, 1)."""
    d = max(ddim, 1.0)
    abar = min(alpha, 1.0 - alpha)
    return int(math.ceil(2.0 * math.log(d / eps) / math.log1p(eps) / abar))


def snowflake_params(alpha, eps, p, q, kprime, ddim, diameter, truncation=TRUNCATION,
                     scale_cap=SCALE_CAP):
    """Scale interval and sizes for a set of (normalized) diameter ``diameter``."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < eps < 0.25:
        raise ParameterError(f"eps must lie in (0, 1/4), got {eps}")
    check_pair(p, q)
    if int(kprime) < 1:
        raise ParameterError(f"kprime must be >= 1, got {kprime}")
    v = group_half_count(ddim, eps, alpha)
    abar = min(alpha, 1.0 - alpha)
    s = (1.0 + eps) ** (2 * v * abar)
    first = -2 * v
    last = int(math.floor(2 * v + math.log(max(diameter, 1.0)) / math.log1p(eps)))
    idx = np.arange(first, last + 1)
    # bound on a block's contribution to ||.||_q: r_i^alpha sqrt(s) / P_q^(1/q)
    log_bound = alpha * idx * math.log1p(eps)
    keep = log_bound >= log_bound.max() + math.log(truncation)
    scales = tuple(int(i) for i in idx[keep])
    if len(scales) > scale_cap:
        warnings.warn(f"{len(scales)} scales exceed the cap {scale_cap}", RuntimeWarning, stacklevel=2)
    return SnowflakeParams(float(alpha), float(eps), float(p), float(q), int(kprime), float(ddim),
                           v, s, first, last, scales)


@dataclass(eq=False)
class SnowflakeEmbedding:
    """Per-scale embeddings plus normalization.

    ``unit`` is the minimum interpoint distance of the build set; inputs are
    divided by it before the per-scale maps and outputs multiplied by
    unit^alpha, so the embedding is defined on the original coordinates.
    """

    params: SnowflakeParams
    maps: list
    unit: float
    M: float = 1.0
    images: np.ndarray = None
    history: dict = field(default_factory=dict)

    def block_factor(self, i):
        """r_i / sqrt(s) / (1+eps)^(i (1 - alpha)) = r_i^alpha / sqrt(s)."""
        pr = self.params
        return (1.0 + pr.eps) ** (i * pr.alpha) / math.sqrt(pr.s)

    def input_factor(self, i):
        return math.sqrt(self.params.s) / (1.0 + self.params.eps) ** i

    def scale_images(self, X):
        """Yield (i, block image) for every retained scale, before grouping."""
        if self.images is not None:
            raise ParameterError("this embedding is defined on its build points only")
        X = np.asarray(X, dtype=float) / self.unit
        for i, E in zip(self.params.scales, self.maps):
            yield i, E(X * self.input_factor(i)) * self.block_factor(i)

    def raw(self, X):
        """Un-normalized image Phi_raw, in original units."""
        pr = self.params
        if self.images is not None:
            return self.images
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ParameterError(f"expected an (n, m) matrix, got shape {X.shape}")
        out = np.zeros((X.shape[0], pr.dimension))
        k = pr.kprime
        for i, img in self.scale_images(X):
            g = i % pr.groups
            out[:, g * k:(g + 1) * k] += img
        return out * self.unit ** pr.alpha

    def __call__(self, X):
        return self.raw(X) / self.M ** (1.0 / self.params.q)


def calibration_pairs(points, norm_p, count=CALIBRATION_PAIRS, seed=0, unit=1.0, diameter=1.0):
    """Synthetic pairs (x, x + t u) with x from ``points``, u a random l_p unit
    direction and t log-uniform on [unit, unit * max(diameter, 10^4)]."""
    rng = np.random.default_rng(seed)
    X = np.asarray(points, dtype=float)
    anchors = X[np.arange(count) % len(X)]
    u = rng.standard_normal((count, X.shape[1]))
    u /= np.linalg.norm(u, ord=norm_p, axis=1, keepdims=True)
    t = unit * np.exp(rng.uniform(0.0, math.log(max(diameter, 1.0e4)), count))
    return anchors, anchors + t[:, None] * u


def calibrate_M(phi, xs, ys):
    """Median of ||Phi_raw(x) - Phi_raw(y)||_q^q / t^(alpha q) over the pairs.

    Needs at least 32 pairs whose distances span at least one decade
    (three recommended); stores and returns M.
    """
    pr = phi.params
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if len(xs) < 32:
        raise ParameterError(f"calibration needs >= 32 pairs, got {len(xs)}")
    idx = np.arange(len(xs))
    t = pair_norms(np.vstack([xs, ys]), idx, idx + len(xs), pr.p)
    if np.any(t <= 0):
        raise ParameterError("calibration pairs must be distinct points")
    decades = math.log10(t.max() / t.min())
    if decades < 1.0:
        raise ParameterError(f"calibration pairs span {decades:.2f} decades; need >= 1")
    if decades < 3.0:
        warnings.warn(f"calibration pairs span only {decades:.2f} decades", RuntimeWarning, stacklevel=2)
    raw = phi.raw(np.vstack([xs, ys]))
    emb = pair_norms(raw, idx, idx + len(xs), pr.q)
    phi.M = float(np.median(emb ** pr.q / t ** (pr.alpha * pr.q)))
    phi.history["calibration_decades"] = decades
    return phi.M


def build_snowflake(points, alpha, eps, p, q, kprime=32, seed=0, ddim=None, calibrate=True,
                    per_scale="threshold", truncation=TRUNCATION):
    """Construct an alpha-snowflake embedding for a point set.

    Parameters
    ----------
    points : ndarray, shape (n, m)
        Sets the minimum-distance unit, the diameter and the doubling
        estimate. Threshold maps never read the points themselves.
    alpha : float
        Exponent in (0, 1).
    eps : float
        Scale ratio 1 + eps, eps in (0, 1/4).
    p, q : float
        Source and target norms.
    kprime : int
        Coordinates per block; total dimension 2 v kprime.
    seed : int
    ddim : float, optional
        Doubling estimate; computed when omitted.
    calibrate : bool
        Fit M on synthetic pairs anchored at the points (needs the
        threshold variant).
    per_scale : {"threshold", "intrinsic"}
        ``"intrinsic"`` replaces each per-scale map by the intrinsic
        embedding of the scaled point set. The result is then defined on
        the build points only and M is fitted on their pairs.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise ParameterError("need an (n, m) matrix with n >= 2")
    D = distance_matrix(X, p)
    unit = min_distance(D)
    if unit <= 0:
        raise ParameterError("points must be distinct")
    diameter = float(D.max() / unit)
    if ddim is None:
        ddim = estimate_doubling_dimension(None, D=D)
    pr = snowflake_params(alpha, eps, p, q, kprime, ddim, diameter, truncation)
    seeds = np.random.SeedSequence(seed).spawn(len(pr.scales) + 1)
    if per_scale == "threshold":
        maps = [make_threshold_embedding(p, q, pr.s, pr.kprime, X.shape[1],
                                         int(sq.generate_state(1)[0]))
                for sq in seeds[:-1]]
        phi = SnowflakeEmbedding(pr, maps, unit)
    elif per_scale == "intrinsic":
        phi = _intrinsic_snowflake(X, pr, unit, seeds[:-1])
    else:
        raise ParameterError(f"per_scale must be 'threshold' or 'intrinsic', got {per_scale!r}")
    phi.history["diameter"] = diameter
    phi.history["scales"] = len(pr.scales)
    if calibrate:
        if phi.images is None:
            cal_seed = int(seeds[-1].generate_state(1)[0])
            xs, ys = calibration_pairs(X, p, seed=cal_seed, unit=unit, diameter=diameter)
        else:
            i, j = np.triu_indices(len(X), 1)
            xs, ys = X[i], X[j]
        calibrate_M(phi, xs, ys)
    return phi


def _intrinsic_snowflake(X, pr, unit, seeds):
    n = len(X)
    out = np.zeros((n, pr.dimension))
    k = pr.kprime
    shell = SnowflakeEmbedding(pr, [], unit)
    Xn = X / unit
    for i, sq in zip(pr.scales, seeds):
        E = intrinsic_embedding(Xn * shell.input_factor(i), pr.s, pr.p, pr.q, 0.5,
                                seed=int(sq.generate_state(1)[0]), k=k, ddim=pr.ddim)
        g = i % pr.groups
        out[:, g * k:(g + 1) * k] += E.images * shell.block_factor(i)
    shell.images = out * unit ** pr.alpha
    return shell


def snowflake_embed(phi, x):
    """Normalized image of one point (shape (m,)) or a batch (shape (n, m))."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return phi(x[None, :])[0]
    return phi(x)


def window_share(phi, X, i_idx, j_idx, width=None):
    """Share of each pair's embedded q-th power distance carried by its scale window.

    The window is centred on the scale i_c = i* - v alpha_bar where
    (1+eps)^(i*) <= t/unit < (1+eps)^(i*+1); it holds ``width`` (default v)
    scales on each side. Returns the share and the per-pair totals.
    """
    pr = phi.params
    X = np.asarray(X, dtype=float)
    width = pr.v if width is None else width
    t = pair_norms(X, i_idx, j_idx, pr.p) / phi.unit
    star = np.floor(np.log(t) / math.log1p(pr.eps))
    centre = star - round(pr.v * pr.alpha_bar)
    inside = np.zeros(len(t))
    total = np.zeros(len(t))
    for i, img in phi.scale_images(X):
        b = pair_norms(img, i_idx, j_idx, pr.q) ** pr.q
        total += b
        inside += np.where(np.abs(i - centre) <= width, b, 0.0)
    return inside / total, total


def amplitude_bound(phi, i):
    """Largest possible contribution of scale i to an embedded q-norm distance."""
    q = phi.params.q
    return (1.0 + phi.params.eps) ** (i * phi.params.alpha) * math.sqrt(phi.params.s) / cosine_moment(q) ** (1.0 / q)
