"""Sine-dampened p-stable threshold embedding.

A single coordinate is

    F(v) = s / (2 P_q^(1/q)) * sin(phi + (2/s) <g, v>)

with phi uniform on [0, 2 pi) and g a row of i.i.d. standard p-stables.
Stacking k independent coordinates and scaling by k^(-1/q) gives a map f
with E ||f(v) - f(w)||_q^q = s^q H(||v - w||_p / s).
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError
from .stable import check_pair, cosine_moment, stable_variates, transform_H

_SPLITTER = 134217729.0  # 2^27 + 1
# target size (elements) of one (k, points) block in the compensated product
_BLOCK = 1 << 18


def _split(a):
    """Veltkamp split a = hi + lo with hi, lo carrying <= 26 significant bits each."""
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def compensated_project(matrix, x, parts=None):
    """Inner products of every row of ``matrix`` with every row of ``x``.

    Uses the Ogita-Rump-Oishi Dot2 scheme: each product is split exactly into
    value plus rounding error, the running sum is accumulated with TwoSum, and
    all error terms are added back at the end. The result is as accurate as
    if computed in twice the working precision, and each output entry depends
    only on its own row pair, so results do not change with batch size.

    Parameters
    ----------
    matrix : ndarray, shape (k, m)
    x : ndarray, shape (n, m)
    parts : tuple of ndarray, optional
        Precomputed ``_split(matrix)``.

    Returns
    -------
    ndarray, shape (n, k)
    """
    k, m = matrix.shape
    n = x.shape[0]
    g_hi, g_lo = parts if parts is not None else _split(matrix)
    x_hi, x_lo = _split(x)
    out = np.empty((n, k))
    step = max(1, _BLOCK // max(k, 1))
    for start in range(0, n, step):
        stop = min(n, start + step)
        width = stop - start
        total = np.zeros((k, width))
        comp = np.zeros((k, width))
        prod = np.empty((k, width))
        err = np.empty((k, width))
        tmp = np.empty((k, width))
        new = np.empty((k, width))
        for j in range(m):
            a, ah, al = matrix[:, j, None], g_hi[:, j, None], g_lo[:, j, None]
            b, bh, bl = x[None, start:stop, j], x_hi[None, start:stop, j], x_lo[None, start:stop, j]
            np.multiply(a, b, out=prod)
            # TwoProduct: err = al*bl - (((prod - ah*bh) - al*bh) - ah*bl)
            np.multiply(ah, bh, out=err)
            np.subtract(prod, err, out=err)
            np.multiply(al, bh, out=tmp)
            err -= tmp
            np.multiply(ah, bl, out=tmp)
            err -= tmp
            np.multiply(al, bl, out=tmp)
            np.subtract(tmp, err, out=err)
            # TwoSum of the running total and the product
            np.add(total, prod, out=new)
            np.subtract(new, total, out=tmp)
            comp += err
            # (total - (new - tmp)) + (prod - tmp)
            np.subtract(prod, tmp, out=err)
            np.subtract(new, tmp, out=tmp)
            np.subtract(total, tmp, out=tmp)
            comp += tmp
            comp += err
            total, new = new, total
        out[start:stop] = (total + comp).T
    return out


@dataclass(frozen=True)
class CoordinateEmbedding:
    """One sine coordinate F_{phi,s} with its stable row."""

    phase: float
    row: np.ndarray
    s: float
    p: float
    q: float

    @property
    def amplitude(self):
        return self.s / (2.0 * cosine_moment(self.q) ** (1.0 / self.q))


def embed_coordinate(F, v):
    """Evaluate F_{phi,s}(v) = s/(2 P_q^(1/q)) sin(phi + (2/s) <g, v>)."""
    v = np.asarray(v, dtype=float)
    if v.shape != F.row.shape:
        raise ParameterError(f"dimension mismatch: point has shape {v.shape}, row {F.row.shape}")
    inner = compensated_project(F.row[None, :], v[None, :])[0, 0]
    return F.amplitude * np.sin(F.phase + 2.0 * inner / F.s)


@dataclass(frozen=True, eq=False)
class ThresholdEmbedding:
    """Frozen randomness of the k-coordinate threshold embedding.

    ``matrix`` holds the k x m stable entries, ``phases`` the k angles.
    Construction never looks at data, so the map is oblivious: every point's
    image depends on the seed and that point only.
    """

    p: float
    q: float
    s: float
    k: int
    m: int
    seed: int
    phases: np.ndarray
    matrix: np.ndarray
    compensated: bool = True

    @property
    def amplitude(self):
        return self.s / (2.0 * cosine_moment(self.q) ** (1.0 / self.q))

    @property
    def coordinate_scale(self):
        return self.k ** (-1.0 / self.q)

    @cached_property
    def _parts(self):
        return _split(self.matrix)

    def coordinate(self, i):
        return CoordinateEmbedding(float(self.phases[i]), self.matrix[i], self.s, self.p, self.q)

    def project(self, points):
        """Inner products <g_i, v> for each point, shape (n, k)."""
        points = self._check(points)
        if self.compensated:
            return compensated_project(self.matrix, points, self._parts)
        return points @ self.matrix.T

    def from_projection(self, proj):
        """Map precomputed inner products to embedded coordinates."""
        return (self.coordinate_scale * self.amplitude) * np.sin(self.phases + (2.0 / self.s) * proj)

    def __call__(self, points):
        return self.from_projection(self.project(points))

    def _check(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.m:
            raise ParameterError(
                f"dimension mismatch: expected points of dimension {self.m}, got shape {points.shape}")
        return points


def make_threshold_embedding(p, q, s, k, m, seed=0, compensated=True):
    """Draw the phases and stable matrix of a k-coordinate threshold embedding.

    Parameters
    ----------
    p, q : float
        1 <= q <= p <= 2.
    s : float
        Threshold, s > 1.
    k, m : int
        Output and input dimension.
    seed : int
    compensated : bool
        Accumulate inner products with the Dot2 scheme (default). The plain
        BLAS path is faster but its rounding can depend on the batch shape.
    """
    check_pair(p, q)
    if not s > 1.0:
        raise ParameterError(f"threshold s must exceed 1, got {s}")
    if int(k) < 1 or int(m) < 1:
        raise ParameterError(f"k and m must be >= 1, got k={k}, m={m}")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, int(k))
    matrix = stable_variates(p, (int(k), int(m)), rng)
    return ThresholdEmbedding(float(p), float(q), float(s), int(k), int(m), int(seed),
                              phases, matrix, compensated)


def embed_point(E, v):
    """Image of one point (shape (m,)) or a batch (shape (n, m))."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return E(v[None, :])[0]
    return E(v)


def expected_transform(p, q, s, t):
    """s^q H(t / s): the expected q-th power distance for a pair at distance t."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    return s ** q * transform_H(p, q, t / s)


def deterministic_cap(q, s):
    """Upper bound s^q / P_q on ||f(v) - f(w)||_q^q valid for every input pair."""
    return s ** q / cosine_moment(q)
