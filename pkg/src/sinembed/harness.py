"""Datasets, point-file IO and distortion measurement."""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

KINDS = ("gaussian", "grid", "clustered", "low-doubling-curve")
PAIR_BUDGET = 100_000


@dataclass(frozen=True)
class DatasetSpec:
    """What to generate.

    ``target`` is the distance range [a, b] aimed at by ``clustered``;
    ``gaps`` bounds the log-uniform segment lengths of the curve.
    """

    kind: str
    n: int
    m: int
    seed: int = 0
    target: tuple = (1.0, 4.0)
    clusters: int = 20
    gaps: tuple = (0.1, 10.0)
    norm_p: float = 1.0
    scale: float = 1.0


def _unit(x, norm_p):
    return x / np.linalg.norm(x, ord=norm_p, axis=-1, keepdims=True)


def generate_dataset(spec):
    """Deterministic point set for ``spec``, shape (n, m).

    gaussian
        i.i.d. N(0, scale^2) entries.
    grid
        m = 1: the integers 0..n-1; otherwise the first n points of the
        integer lattice in lexicographic order.
    clustered
        ``clusters`` centers rho_j u_j with u_j random unit directions and
        rho_j uniform, chosen so inter-center distances sqrt(rho_i^2 + rho_j^2)
        fall in [1.1 a, 0.95 b]; points scatter within 0.3 a of their center.
    low-doubling-curve
        a monotone polyline whose segments have nonnegative directions of
        unit l1 norm, so l1 distance along it equals arc length.
    """
    if spec.kind not in KINDS:
        raise ParameterError(f"unknown dataset kind {spec.kind!r}; choose from {KINDS}")
    n, m = int(spec.n), int(spec.m)
    if n < 2 or m < 1:
        raise ParameterError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "gaussian":
        return spec.scale * rng.standard_normal((n, m))
    if spec.kind == "grid":
        side = int(math.ceil(n ** (1.0 / m) - 1e-9))
        while side ** m < n:
            side += 1
        pts = itertools.islice(itertools.product(range(side), repeat=m), n)
        return np.array(list(pts), dtype=float)
    if spec.kind == "clustered":
        a, b = spec.target
        if not 0 < a < b:
            raise ParameterError(f"target range must satisfy 0 < a < b, got {spec.target}")
        c = max(1, min(int(spec.clusters), n))
        lo, hi = 1.1 * a / math.sqrt(2.0), 0.95 * b / math.sqrt(2.0)
        rho = rng.uniform(lo, hi, c)
        centers = rho[:, None] * _unit(rng.standard_normal((c, m)), spec.norm_p)
        spread = 0.3 * a * rng.uniform(0.0, 1.0, n)[:, None]
        offsets = spread * _unit(rng.standard_normal((n, m)), spec.norm_p)
        return centers[np.arange(n) % c] + offsets
    lo, hi = spec.gaps
    if not 0 < lo <= hi:
        raise ParameterError(f"gap range must satisfy 0 < lo <= hi, got {spec.gaps}")
    gaps = np.exp(rng.uniform(math.log(lo), math.log(hi), n - 1))
    dirs = rng.dirichlet(np.ones(m), n - 1)
    steps = gaps[:, None] * dirs
    return np.vstack([np.zeros((1, m)), np.cumsum(steps, axis=0)])


def load_points(path):
    """Read a numeric matrix, one point per row, whitespace or comma separated."""
    with open(path) as fh:
        text = fh.read().replace(",", " ")
    rows = [line.split() for line in text.splitlines()]
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows:
        raise ParameterError(f"{path}: no points")
    try:
        pts = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise ParameterError(f"{path}: {exc}") from None
    if pts.ndim != 2:
        raise ParameterError(f"{path}: rows have different lengths")
    return pts


def save_points(path, points, header=None):
    """Write a matrix with full double precision (round-trips exactly)."""
    comments = "" if header is None else "\n".join("# " + h for h in header) + "\n"
    with open(path, "w") as fh:
        fh.write(comments)
        np.savetxt(fh, np.atleast_2d(points), fmt="%.17g")


def pair_norms(X, i, j, r):
    """||X[i] - X[j]||_r for index arrays i, j."""
    diff = np.abs(X[i] - X[j])
    if r == 1:
        return diff.sum(axis=1)
    if r == 2:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return (diff ** r).sum(axis=1) ** (1.0 / r)


def sample_pairs(n, budget=PAIR_BUDGET, seed=0):
    """All pairs i < j when they fit the budget, else a uniform sample, sorted."""
    total = n * (n - 1) // 2
    i, j = np.triu_indices(n, 1)
    if total <= budget:
        return i, j
    pick = np.sort(np.random.default_rng(seed).choice(total, size=int(budget), replace=False))
    return i[pick], j[pick]


@dataclass
class DistortionReport:
    """Per-pair records plus a summary.

    ``ratio`` is embedded distance over ``ideal(t)``; ``in_range`` marks
    pairs whose t lies in the configured band.
    """

    i: np.ndarray
    j: np.ndarray
    t: np.ndarray
    embedded: np.ndarray
    ratio: np.ndarray
    in_range: np.ndarray
    summary: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def rows(self):
        for rec in zip(self.i, self.j, self.t, self.embedded, self.ratio, self.in_range):
            yield int(rec[0]), int(rec[1]), float(rec[2]), float(rec[3]), float(rec[4]), bool(rec[5])


def summarize(t, ratio, in_range, eps):
    """Ratio quantiles per decade of t and the fraction within (1 +- eps)."""
    ok = (ratio >= 1 - eps) & (ratio <= 1 + eps)
    bands = []
    pos = t > 0
    if pos.any():
        lo = math.floor(math.log10(t[pos].min()))
        hi = math.floor(math.log10(t[pos].max()))
        for d in range(lo, hi + 1):
            sel = pos & (t >= 10.0 ** d) & (t < 10.0 ** (d + 1))
            if sel.any():
                q = np.quantile(ratio[sel], [0.05, 0.5, 0.95])
                bands.append({"decade": d, "pairs": int(sel.sum()),
                              "q05": float(q[0]), "q50": float(q[1]), "q95": float(q[2])})
    return {
        "pairs": int(len(t)),
        "in_range_pairs": int(in_range.sum()),
        "within_eps": float(ok.mean()) if len(t) else 1.0,
        "within_eps_in_range": float(ok[in_range].mean()) if in_range.any() else 1.0,
        "bands": bands,
    }


def distortion_report(embed, points, p, q, budget=PAIR_BUDGET, seed=0, eps=0.3,
                      band=(1.0, math.inf), ideal=None, params=None):
    """Measure an embedding on sampled pairs.

    Parameters
    ----------
    embed : callable
        Maps an (n, m) array to an (n, k) array.
    points : ndarray
    p, q : float
        Norm for original distances and for embedded distances.
    budget : int
        Pair budget.
    eps : float
        Tolerance used for the within-(1 +- eps) summary.
    band : (float, float)
        Distances counted as in range.
    ideal : callable, optional
        Target for the embedded distance as a function of t (default t).
    params : dict, optional
        Copied into the summary.
    """
    X = np.asarray(points, dtype=float)
    i, j = sample_pairs(len(X), budget, seed)
    t = pair_norms(X, i, j, p)
    Y = np.asarray(embed(X), dtype=float)
    emb = pair_norms(Y, i, j, q)
    target = t if ideal is None else ideal(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(target > 0, emb / np.where(target > 0, target, 1.0), np.where(emb > 0, np.inf, 1.0))
    in_range = (t >= band[0]) & (t <= band[1])
    summary = summarize(t, ratio, in_range, eps)
    summary["params"] = dict(params or {})
    summary["seed"] = int(seed)
    return DistortionReport(i, j, t, emb, ratio, in_range, summary)


def identity_embedding(points):
    """Diagnostic embedding: returns its input."""
    return np.asarray(points, dtype=float)
