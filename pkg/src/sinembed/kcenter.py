"""Discrete k-center: farthest-point traversal, exhaustive search and the
net + snowflake pipeline."""
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import GuardError, ParameterError
from .metric import _greedy_net, distance_matrix
from .snowflake import build_snowflake

BRUTE_FORCE_GUARD = 10_000_000
NET_GUARD = 400


@dataclass(frozen=True, eq=False)
class KCenterSolution:
    """Centers (indices into the input) and the k-center radius."""

    centers: np.ndarray
    radius: float
    history: dict = field(default_factory=dict)
    unique: bool = True


def kcenter_radius(D, centers):
    """max over points of the distance to the nearest center."""
    return float(np.max(np.min(D[:, np.asarray(centers)], axis=1)))


def _check_k(k, n):
    if not 1 <= int(k) <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")


def gonzalez(points, k, norm_p=2.0, D=None):
    """Farthest-point traversal from point 0; a 2-approximation."""
    if D is None:
        D = distance_matrix(points, norm_p)
    n = D.shape[0]
    _check_k(k, n)
    centers = [0]
    near = D[0].copy()
    radii = [float(near.max())]
    for _ in range(1, int(k)):
        nxt = int(np.argmax(near))
        centers.append(nxt)
        np.minimum(near, D[nxt], out=near)
        radii.append(float(near.max()))
    return KCenterSolution(np.array(centers), float(near.max()), {"radii": radii})


def brute_force_kcenter(points, k, norm_p=2.0, D=None, guard=BRUTE_FORCE_GUARD, rtol=1e-12):
    """Exact discrete k-center by enumerating all center sets.

    The loop runs over (k-1)-subsets and vectorizes the last center.
    ``unique`` on the result reports whether exactly one center set attains
    the optimum (up to relative tolerance ``rtol``).
    """
    if D is None:
        D = distance_matrix(points, norm_p)
    n = D.shape[0]
    _check_k(k, n)
    k = int(k)
    if math.comb(n, k) > guard:
        raise GuardError(f"C({n}, {k}) = {math.comb(n, k)} center sets exceed the guard {guard}")
    best, best_set, ties = math.inf, None, 0
    for head in combinations(range(n), k - 1):
        last = head[-1] + 1 if head else 0
        if last >= n:
            continue
        base = np.min(D[:, list(head)], axis=1) if head else np.full(n, np.inf)
        # radius for each choice of the last center c >= last
        cand = np.max(np.minimum(base[:, None], D[:, last:]), axis=0)
        lo = float(cand.min())
        if lo < best * (1 - rtol):
            best = lo
            hits = np.flatnonzero(cand <= lo * (1 + rtol))
            best_set = head + (last + int(hits[0]),)
            ties = len(hits)
        elif lo <= best * (1 + rtol):
            ties += int(np.sum(cand <= best * (1 + rtol)))
    return KCenterSolution(np.array(best_set), float(best), {"optimal_sets": ties}, ties == 1)


def kcenter_pipeline(points, k, eps, seed=0, norm_p=2.0, alpha=0.5, kprime=64, snow_eps=None,
                     net_guard=NET_GUARD, guard=BRUTE_FORCE_GUARD):
    """Coarse radius, net, snowflake, exact solve on the embedded net.

    1. r~ from ``gonzalez``.
    2. V = greedy (eps/2) r~ net.
    3. Snowflake-embed V (exponent ``alpha``; accuracy ``snow_eps``, default
       min(eps, 0.2)).
    4. Exhaustive k-center on embedded distances of V.
    5. Map centers back; the radius is recomputed over all points in the
       original metric.
    """
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    X = np.asarray(points, dtype=float)
    D = distance_matrix(X, norm_p)
    n = D.shape[0]
    _check_k(k, n)
    coarse = gonzalez(None, k, D=D)
    r_tilde = coarse.radius
    if r_tilde == 0:
        return KCenterSolution(coarse.centers, 0.0, {"r_tilde": 0.0, "net_size": n})
    net = _greedy_net(D, eps / 2.0 * r_tilde)
    if len(net) > net_guard:
        raise GuardError(f"net of {len(net)} points exceeds the guard {net_guard}")
    history = {"r_tilde": r_tilde, "net_size": len(net)}
    if len(net) <= k:
        return KCenterSolution(net, kcenter_radius(D, net), history)
    snow_eps = min(eps, 0.2) if snow_eps is None else snow_eps
    # M only rescales distances, so the argmin does not need it
    phi = build_snowflake(X[net], alpha, snow_eps, norm_p, 1.0, kprime=kprime, seed=seed,
                          calibrate=False)
    Y = phi.raw(X[net])
    DE = distance_matrix(Y, 1.0)
    sol = brute_force_kcenter(None, k, D=DE, guard=guard)
    centers = net[sol.centers]
    history["embedded_radius"] = sol.radius
    return KCenterSolution(centers, kcenter_radius(D, centers), history)
