"""Range embedding: threshold selection, output scaling and dimension bounds.

Pairs at distance t in [1, R] are mapped so that ||f(v) - f(w)||_q^q is
close to t^q. The threshold s is chosen large enough that [1, R] sits in
the regime where s^q H(t/s) behaves like a multiple of t^q; dividing by
that multiple gives the range embedding.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import GuardError, ParameterError
from .harness import pair_norms
from .stable import check_pair, constant_Q, constant_Qa, sin_moment, transform_H
from .threshold import ThresholdEmbedding, make_threshold_embedding

THRESHOLD_CAP = 1.0e12
MAX_DIMENSION = 4_000_000
METHODS = ("hoeffding", "bennett", "min")
NORMALIZATIONS = ("auto", "paper", "transform")


@dataclass(frozen=True)
class RangeParams:
    """Inputs of a range embedding.

    ``c_dim`` is the leading constant of the dimension bound and
    ``normalization`` picks the output scale (see ``output_scale``).
    """

    p: float
    q: float
    R: float
    eps: float
    n: int
    method: str = "min"
    c_dim: float = 1.0
    normalization: str = "auto"

    def __post_init__(self):
        check_pair(self.p, self.q)
        if not self.R > 1.0:
            raise ParameterError(f"range R must exceed 1, got {self.R}")
        if not 0.0 < self.eps <= 0.5:
            raise ParameterError(f"eps must lie in (0, 1/2], got {self.eps}")
        if int(self.n) < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.c_dim > 0:
            raise ParameterError(f"c_dim must be positive, got {self.c_dim}")
        if self.normalization not in NORMALIZATIONS:
            raise ParameterError(f"normalization must be one of {NORMALIZATIONS}")


def _log_threshold(p, q, R, eps):
    if q < p:
        d = p - q
        return (math.log(R) - 0.5 * math.log(eps)
                + math.log1p(d * eps ** -(q / 2.0 + 1.0)) / d)
    return max(math.log(R) / eps,
               math.log(R) - 0.5 * math.log(eps) + eps ** -(q / 2.0 + 1.0))


def select_threshold(p, q, R, eps, cap=THRESHOLD_CAP):
    """Threshold s for range width R and accuracy eps (proportionality constant 1).

    q < p:  s = R eps^(-1/2) (1 + (p-q) eps^-(q/2+1))^(1/(p-q))
    q = p:  s = max(R^(1/eps), R eps^(-1/2) exp(eps^-(q/2+1)))

    Emits a RuntimeWarning when s exceeds ``cap``; the value is returned
    regardless (``inf`` if it overflows a double).
    """
    check_pair(p, q)
    if not R > 1.0:
        raise ParameterError(f"range R must exceed 1, got {R}")
    if not 0.0 < eps <= 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2], got {eps}")
    log_s = _log_threshold(p, q, R, eps)
    s = math.exp(log_s) if log_s < 709.0 else math.inf
    if s > cap:
        hint = largest_feasible_eps(p, q, R, cap)
        msg = f"threshold s={s:.3g} exceeds cap {cap:.3g} at eps={eps}"
        if hint is not None:
            msg += f"; the largest feasible eps is about {hint:.4f}"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return s


def largest_feasible_eps(p, q, R, cap=THRESHOLD_CAP):
    """Smallest eps (best accuracy) whose threshold stays below ``cap``, or None."""
    target = math.log(cap)
    hi = 0.5
    if _log_threshold(p, q, R, hi) > target:
        return None
    lo = 1e-4
    if _log_threshold(p, q, R, lo) <= target:
        return lo
    return optimize.brentq(lambda e: _log_threshold(p, q, R, e) - target, lo, hi, xtol=1e-10)


def bracket(method, s, p, q, eps):
    """Dimension bracket B: k = C_dim (log n / eps^2) B."""
    hoeff = s ** (2 * q)
    if method == "hoeffding":
        return hoeff
    tight = 2 * q > p
    if method == "bennett":
        if not tight:
            raise ParameterError(f"the Bennett bracket needs 2q > p; got p={p}, q={q}")
        return max(s ** (2 * q - p) / (2 * q - p), eps * s ** q)
    if method == "min":
        if not tight:
            return hoeff
        return min(hoeff, max(s ** (2 * q - p) / (2 * q - p), eps * s ** q))
    raise ParameterError(f"method must be one of {METHODS}, got {method!r}")


def required_dimension(n, eps, s, p, q, method="min", c_dim=1.0, max_k=MAX_DIMENSION):
    """Number of coordinates k = ceil(c_dim * log(n) / eps^2 * B).

    Parameters
    ----------
    n : int
        Point-count budget (union bound over n^2 pairs).
    eps : float
        Accuracy.
    s : float
        Threshold, s > 1.
    method : {"hoeffding", "bennett", "min"}
        Hoeffding bracket s^(2q), Bennett bracket
        max(s^(2q-p)/(2q-p), eps s^q) (needs 2q > p), or the smaller one.
    c_dim : float
        Leading constant.
    max_k : int
        Guard; raises GuardError above it.
    """
    check_pair(p, q)
    if int(n) < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not s > 1.0:
        raise ParameterError(f"threshold s must exceed 1, got {s}")
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    k = math.ceil(c_dim * math.log(n) / eps ** 2 * bracket(method, s, p, q, eps))
    if k > max_k:
        raise GuardError(f"required dimension {k} exceeds the guard {max_k}")
    return max(int(k), 1)


def bennett_function(u):
    """V(u) = (1 + u) ln(1 + u) - u."""
    u = np.asarray(u, dtype=float)
    return (1.0 + u) * np.log1p(u) - u


def bennett_dimension(n, eps, s, p, q, t, c_dim=1.0, exact=True):
    """Per-distance Bennett count for a pair at distance t.

    With M = s^q the bound on one coordinate, variance proxy
    sigma^2 = s^(2q) E|sin((t/s) g)|^(2q) and deviation eps s^q H(t/s),
    the tail exp(-k sigma^2 V(r) / M^2) with r = M eps s^q H / sigma^2 is
    pushed below 1/n^2. ``exact=False`` replaces V by its two-branch form
    u^2/2 (u < 1) and u/2 (u >= 1).
    """
    check_pair(p, q)
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")
    a = t / s
    sigma2 = s ** (2 * q) * sin_moment(p, 2 * q, a)
    big_m = s ** q
    r = big_m * eps * s ** q * transform_H(p, q, a) / sigma2
    if exact:
        v = float(bennett_function(r))
    else:
        v = r * r / 2.0 if r < 1.0 else r / 2.0
    return max(1, math.ceil(c_dim * big_m ** 2 * math.log(n) / (sigma2 * v)))


def output_scale(p, q, R, s, eps, normalization="auto"):
    """Factor applied to the threshold embedding's output.

    ``"paper"``: Q^(-1/q) for q < p and Q_(R/s)^(-1/q) for q = p.
    ``"transform"``: exact normalization at the range's geometric centre
    R_c = sqrt(R), i.e. scale^q = R_c^q / (s^q H(R_c / s)).
    ``"auto"``: ``"paper"`` for q < p, ``"transform"`` for q = p.
    """
    if normalization not in NORMALIZATIONS:
        raise ParameterError(f"normalization must be one of {NORMALIZATIONS}")
    if normalization == "auto":
        normalization = "paper" if q < p else "transform"
    if normalization == "paper":
        if q < p:
            return constant_Q(p, q) ** (-1.0 / q)
        return constant_Qa(p, R / s, eps) ** (-1.0 / q)
    centre = math.sqrt(R)
    return centre / (s * transform_H(p, q, centre / s) ** (1.0 / q))


@dataclass(frozen=True, eq=False)
class RangeEmbedding:
    params: RangeParams
    inner: ThresholdEmbedding
    s: float
    scale: float

    @property
    def k(self):
        return self.inner.k

    def __call__(self, points):
        return self.scale * self.inner(points)


def make_range_embedding(params, m, seed=0, compensated=True):
    """Compose threshold choice, dimension bound, threshold embedding and scaling."""
    pr = params
    s = select_threshold(pr.p, pr.q, pr.R, pr.eps)
    if not math.isfinite(s):
        raise GuardError(f"threshold overflows at eps={pr.eps}")
    k = required_dimension(pr.n, pr.eps, s, pr.p, pr.q, pr.method, pr.c_dim)
    inner = make_threshold_embedding(pr.p, pr.q, s, k, m, seed, compensated)
    scale = output_scale(pr.p, pr.q, pr.R, s, pr.eps, pr.normalization)
    return RangeEmbedding(pr, inner, s, scale)


def embed(E, v):
    """Image of one point (shape (m,)) or a batch (shape (n, m))."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return E(v[None, :])[0]
    return E(v)


C_DIM_LADDER = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)


def in_band_fraction(E, points, tol):
    """Fraction of pairs with 1 <= t <= R whose embedded q-th power distance
    lies within (1 +- tol) t^q."""
    pr = E.params
    X = np.asarray(points, dtype=float)
    i, j = np.triu_indices(len(X), 1)
    t = pair_norms(X, i, j, pr.p)
    inr = (t >= 1.0) & (t <= pr.R)
    if not inr.any():
        raise ParameterError("no pair distances fall inside [1, R]")
    got = pair_norms(E(X), i[inr], j[inr], pr.q) ** pr.q
    want = t[inr] ** pr.q
    return float(np.mean((got >= (1 - tol) * want) & (got <= (1 + tol) * want)))


def calibrate_c_dim(points, params, seed=0, ladder=C_DIM_LADDER, tol=0.35, target=0.99):
    """Smallest ladder constant whose embedding keeps ``target`` of the
    in-range pairs of ``points`` within (1 +- tol).

    Use a calibration set separate from the evaluation set. Returns the
    chosen constant and the (c_dim, k, fraction) history; falls back to the
    last ladder value when none qualifies.
    """
    X = np.asarray(points, dtype=float)
    history = []
    for c in ladder:
        pr = RangeParams(params.p, params.q, params.R, params.eps, params.n, params.method, c,
                         params.normalization)
        E = make_range_embedding(pr, X.shape[1], seed)
        frac = in_band_fraction(E, X, tol)
        history.append((float(c), E.k, frac))
        if frac >= target:
            return float(c), history
    return float(ladder[-1]), history
