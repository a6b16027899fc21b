"""Nets, hierarchies, doubling dimension, padded decompositions and the
intrinsic-dimension embedding.

Point sets are rows of a float matrix; distances are l_p distances with
``norm_p`` (default 2). Everything works on a dense distance matrix, which
is fine at the desk scale this package targets (a few thousand points).
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import GuardError, ParameterError
from .stable import check_pair, cosine_moment
from .threshold import make_threshold_embedding

MAX_PARTITIONS = 5000


def _as_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ParameterError(f"points must be a non-empty (n, m) matrix, got shape {pts.shape}")
    return pts


def distance_matrix(points, norm_p=2.0, other=None):
    """Pairwise l_p distances."""
    a = _as_points(points)
    b = a if other is None else _as_points(other)
    if norm_p == 1:
        return cdist(a, b, "cityblock")
    if norm_p == 2:
        return cdist(a, b, "euclidean")
    return cdist(a, b, "minkowski", p=norm_p)


def min_distance(D):
    n = D.shape[0]
    if n < 2:
        return 0.0
    return float(np.min(D[np.triu_indices(n, 1)]))


@dataclass(frozen=True, eq=False)
class Net:
    """Greedy gamma-net of a point set.

    ``indices`` are the selected rows (in selection order); ``assignment[i]``
    is the index of the net point nearest to row i.
    """

    gamma: float
    indices: np.ndarray
    assignment: np.ndarray

    def __len__(self):
        return len(self.indices)


def _greedy_net(D, gamma, order=None):
    n = D.shape[0]
    order = np.arange(n) if order is None else np.asarray(order)
    gap = np.full(n, np.inf)
    chosen = []
    for i in order:
        if gap[i] >= gamma:
            chosen.append(int(i))
            np.minimum(gap, D[i], out=gap)
    chosen = np.array(chosen, dtype=int)
    return chosen


def build_net(points, gamma, norm_p=2.0, D=None):
    """Greedy gamma-net: scan points in index order, keep a point if it is at
    distance >= gamma from every point kept so far.

    The result is gamma-separated and covers every point within < gamma.
    """
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if D is None:
        D = distance_matrix(points, norm_p)
    chosen = _greedy_net(D, gamma)
    assignment = chosen[np.argmin(D[:, chosen], axis=1)]
    return Net(float(gamma), chosen, assignment)


@dataclass(frozen=True, eq=False)
class Hierarchy:
    """Nested 2^i-nets S_0 = S, S_1, ..., S_t = {root}.

    Distances are measured after dividing by ``unit`` (the minimum
    interpoint distance), so S_0 is a 1-net. ``parents[i][j]`` is the level
    i+1 point covering the j-th point of ``levels[i]`` (global indices).
    """

    levels: list
    parents: list
    unit: float

    @property
    def root(self):
        return int(self.levels[-1][0])

    @property
    def height(self):
        return len(self.levels) - 1

    def ancestor(self, point, level):
        """Index of the level-``level`` ancestor of a point of S_0."""
        cur = int(point)
        for i in range(level):
            pos = int(np.searchsorted(self.levels[i], cur))
            cur = int(self.parents[i][pos])
        return cur


def build_hierarchy(points, norm_p=2.0, D=None):
    """Hierarchy of 2^i-nets, each level a greedy net of the previous one."""
    if D is None:
        D = distance_matrix(points, norm_p)
    n = D.shape[0]
    unit = min_distance(D) or 1.0
    Dn = D / unit
    current = np.arange(n)
    levels = [current]
    parents = []
    i = 0
    while len(current) > 1:
        i += 1
        sub = Dn[np.ix_(current, current)]
        chosen = current[_greedy_net(sub, 2.0 ** i)]
        chosen.sort()
        near = chosen[np.argmin(Dn[np.ix_(current, chosen)], axis=1)]
        parents.append(near)
        levels.append(chosen)
        current = chosen
    return Hierarchy(levels, parents, float(unit))


def _greedy_cover(reach):
    uncovered = np.ones(reach.shape[0], dtype=bool)
    size = 0
    while uncovered.any():
        best = np.argmax(reach[:, uncovered].sum(axis=1))
        uncovered &= ~reach[best]
        size += 1
    return size


def estimate_doubling_dimension(points, norm_p=2.0, D=None, radii_per_center=48, max_centers=256):
    """Upper-bound estimate of the doubling dimension.

    For every center (or an evenly spaced subset of ``max_centers``) and up
    to ``radii_per_center`` radii drawn from that center's distance
    quantiles, the ball B(c, r) is covered by closed balls of radius r/2
    centred at its own points, picked greedily (most uncovered points
    first). The estimate is log2 of the largest cover size found.
    """
    if D is None:
        D = distance_matrix(points, norm_p)
    n = D.shape[0]
    if n < 2:
        raise ParameterError("need at least 2 points")
    centers = np.arange(n)
    if n > max_centers:
        centers = np.unique(np.linspace(0, n - 1, max_centers).round().astype(int))
    worst = 1
    for c in centers:
        row = D[c]
        radii = np.unique(row[row > 0])
        if len(radii) > radii_per_center:
            radii = np.unique(np.quantile(radii, np.linspace(0, 1, radii_per_center)))
        for r in radii:
            ball = np.flatnonzero(row <= r)
            if len(ball) <= worst:
                continue
            worst = max(worst, _greedy_cover(D[np.ix_(ball, ball)] <= r / 2.0))
    return math.log2(worst)


@dataclass(frozen=True, eq=False)
class PaddedPartitionFamily:
    """m partitions of the same point set, from randomized ball carving.

    ``assignments[j, x]`` is the cluster id of point x in partition j.
    ``padding[x]`` is the fraction of partitions in which every point within
    ``pad_radius`` of x shares x's cluster.
    """

    assignments: np.ndarray
    delta: float
    eps: float
    ddim: float
    c0: float
    pad_radius: float
    padding: np.ndarray
    c0_history: list = field(default_factory=list)

    @property
    def m(self):
        return self.assignments.shape[0]


def partition_count(c0, ddim, eps):
    """m = ceil(c0 * ddim * max(1, log2 ddim) / eps), with ddim floored at 1."""
    d = max(ddim, 1.0)
    return int(math.ceil(c0 * d * max(1.0, math.log2(d)) / eps))


def ball_carving(D, delta, rng):
    """One partition: random pivot order, radius uniform on [delta/4, delta/2].

    Every cluster lies inside a ball of radius <= delta/2, so its diameter
    is at most delta.
    """
    n = D.shape[0]
    radius = rng.uniform(delta / 4.0, delta / 2.0)
    labels = np.full(n, -1)
    next_id = 0
    for c in rng.permutation(n):
        grab = (labels < 0) & (D[c] <= radius)
        if grab.any():
            labels[grab] = next_id
            next_id += 1
    return labels


def _padding(assignments, D, radius):
    near = D <= radius
    ok = np.zeros(D.shape[0])
    for labels in assignments:
        split = near & (labels[:, None] != labels[None, :])
        ok += ~split.any(axis=1)
    return ok / len(assignments)


def padded_decomposition(points, delta, eps, seed=0, c0=2.0, ddim=None, norm_p=2.0, D=None,
                         escalate=True, max_partitions=MAX_PARTITIONS):
    """Family of partitions with cluster diameter <= delta and empirical padding.

    Starting from ``c0``, the padding radius delta / (c0 ddim) is checked on
    the generated family; while some point is padded in fewer than a
    (1 - eps) fraction of partitions, c0 is doubled and the family is
    extended to the matching partition count. Each tried c0 is recorded in
    ``c0_history``. With ``escalate=False`` the first family is returned
    as is.
    """
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if D is None:
        D = distance_matrix(points, norm_p)
    if ddim is None:
        ddim = estimate_doubling_dimension(None, D=D) if D.shape[0] > 1 else 0.0
    rng = np.random.default_rng(seed)
    d_eff = max(ddim, 1.0)
    parts = []
    history = []
    while True:
        m = partition_count(c0, ddim, eps)
        if m > max_partitions:
            raise GuardError(f"padded decomposition needs {m} partitions (> {max_partitions})")
        while len(parts) < m:
            parts.append(ball_carving(D, delta, rng))
        assignments = np.array(parts[:m])
        radius = delta / (c0 * d_eff)
        padding = _padding(assignments, D, radius)
        history.append(float(c0))
        if not escalate or padding.min() >= 1.0 - eps:
            break
        c0 *= 2.0
    return PaddedPartitionFamily(assignments, float(delta), float(eps), float(ddim), float(c0),
                                 float(radius), padding, history)


def cluster_diameters(family, D):
    """Largest intra-cluster distance for every partition."""
    out = np.zeros(family.m)
    for j, labels in enumerate(family.assignments):
        same = labels[:, None] == labels[None, :]
        out[j] = np.max(np.where(same, D, 0.0))
    return out


@dataclass(frozen=True, eq=False)
class IntrinsicEmbedding:
    """Images and bookkeeping of the intrinsic-dimension embedding."""

    images: np.ndarray
    net: np.ndarray
    family: PaddedPartitionFamily
    ddim: float
    s: float
    s_prime: float
    k: int
    p: float
    q: float

    @property
    def cap(self):
        """Deterministic bound s^q / P_q on every embedded q-th power distance."""
        return self.s ** self.q / cosine_moment(self.q)


def intrinsic_embedding(points, s, p, q, eps, seed=0, k=200, c0=6.0, ddim=None, pad_c0=2.0):
    """Embed an l_p point set cluster by cluster through a padded decomposition.

    Parameters
    ----------
    points : ndarray, shape (n, m)
    s : float
        Threshold.
    p, q : float
        Source metric l_p and target l_q, 1 <= q <= p <= 2.
    eps : float
        Accuracy; sets the net scale eps/ddim and the padding budget eps/s.
    seed : int
    k : int
        Coordinates per partition.
    c0 : float
        Cluster diameter delta = c0 * ddim * s.
    pad_c0 : float
        Padding constant of the decomposition (not escalated here).
    ddim : float, optional
        Doubling dimension; estimated when omitted.

    Notes
    -----
    Each cluster C of each partition gets a net of scale eps/ddim that
    contains the global greedy net's points inside C. Net points are scaled
    by ddim/eps, passed through an independent threshold embedding with
    s' = s ddim/eps and scaled back; every other point of C takes the image
    of its nearest net point. Partition blocks are concatenated and scaled
    by m^(-1/q).
    """
    check_pair(p, q)
    if not s > 1.0:
        raise ParameterError(f"threshold s must exceed 1, got {s}")
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    pts = _as_points(points)
    n, dim = pts.shape
    D = distance_matrix(pts, p)
    if ddim is None:
        ddim = estimate_doubling_dimension(None, D=D) if n > 1 else 0.0
    d_eff = max(ddim, 1.0)
    gamma = eps / d_eff
    stretch = d_eff / eps
    s_prime = s * stretch
    root = np.random.SeedSequence(seed)
    carve_seq, embed_seq = root.spawn(2)
    family = padded_decomposition(None, c0 * d_eff * s, eps / s, seed=carve_seq, c0=pad_c0,
                                  ddim=ddim, D=D, escalate=False)
    global_net = _greedy_net(D, gamma)
    in_net = np.zeros(n, dtype=bool)
    in_net[global_net] = True
    blocks = []
    for labels, part_seq in zip(family.assignments, embed_seq.spawn(family.m)):
        block = np.empty((n, k))
        clusters = np.unique(labels)
        for cid, cl_seq in zip(clusters, part_seq.spawn(len(clusters))):
            members = np.flatnonzero(labels == cid)
            order = np.concatenate([members[in_net[members]], members[~in_net[members]]])
            local = {int(g): i for i, g in enumerate(members)}
            sub = D[np.ix_(members, members)]
            local_order = np.array([local[int(g)] for g in order])
            chosen = members[_greedy_net(sub, gamma, local_order)]
            E = make_threshold_embedding(p, q, s_prime, k, dim,
                                         int(cl_seq.generate_state(1)[0]))
            img = E(pts[chosen] * stretch) / stretch
            nearest = np.argmin(D[np.ix_(members, chosen)], axis=1)
            block[members] = img[nearest]
        blocks.append(block)
    images = np.hstack(blocks) * family.m ** (-1.0 / q)
    return IntrinsicEmbedding(images, global_net, family, float(ddim), float(s), float(s_prime),
                              int(k), float(p), float(q))
