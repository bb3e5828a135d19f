"""Finite joint distributions of two discrete random variables.

Tables are row-major: X indexes rows, Y indexes columns. The binary case is
covered by :class:`BinaryParameterization`, which fixes a 2x2 table by the
corner cell ``alpha``, the row marginal ``u`` and the column marginal ``v``.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .rng import SplitMix64

EPS_PROB = 1e-9
EPS_NUM = 1e-10


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_distinct(values, name):
    for i in range(len(values)):
        for k in range(i + 1, len(values)):
            if values[i] == values[k]:
                raise InvariantError(f"{name} pairwise distinct", detail=f"duplicate value {values[i]!r}")


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint probability table ``probs[i, j] = P(X = x_values[i], Y = y_values[j])``."""

    x_values: tuple
    y_values: tuple
    probs: np.ndarray

    def __post_init__(self):
        xs = tuple(float(x) for x in self.x_values)
        ys = tuple(float(y) for y in self.y_values)
        p = _readonly(self.probs)
        if len(xs) < 2 or len(ys) < 2:
            raise InvariantError("at least two values per variable", detail=f"got {len(xs)}x{len(ys)}")
        if p.shape != (len(xs), len(ys)):
            raise InvariantError("probs shape matches values", detail=f"{p.shape} vs {(len(xs), len(ys))}")
        if not (all(map(math.isfinite, xs)) and all(map(math.isfinite, ys))):
            raise InvariantError("finite values")
        if not np.all(np.isfinite(p)):
            raise InvariantError("finite probabilities")
        _check_distinct(xs, "x_values")
        _check_distinct(ys, "y_values")
        below = max(0.0, -float(p.min()))
        above = max(0.0, float(p.max()) - 1.0)
        if below > EPS_PROB or above > EPS_PROB:
            raise InvariantError("probabilities in [0, 1]", max(below, above))
        total = abs(float(p.sum()) - 1.0)
        if total > EPS_PROB:
            raise InvariantError("probabilities sum to 1", total)
        object.__setattr__(self, "x_values", xs)
        object.__setattr__(self, "y_values", ys)
        object.__setattr__(self, "probs", p)

    @property
    def shape(self):
        return self.probs.shape

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return (
            self.x_values == other.x_values
            and self.y_values == other.y_values
            and np.array_equal(self.probs, other.probs)
        )

    def to_dict(self):
        return {
            "x_values": list(self.x_values),
            "y_values": list(self.y_values),
            "probs": self.probs.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["x_values"], data["y_values"], data["probs"])
        except KeyError as exc:
            raise InvariantError("joint distribution document has x_values, y_values, probs",
                                 detail=f"missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvariantError):
                raise
            raise InvariantError("probs is a rectangular numeric matrix", detail=str(exc)) from None

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def load_distribution(path):
    with open(path) as fh:
        return JointDistribution.from_json(fh.read())


@dataclass(frozen=True)
class BinaryParameterization:
    """Three-parameter form of a 2x2 table with distinct outcome values.

    ``alpha = p11``, ``u = P(X = x1)``, ``v = P(Y = y1)``. Feasible iff
    ``max(0, u + v - 1) <= alpha <= min(u, v)``.
    """

    alpha: float
    u: float
    v: float
    x1: float = 1.0
    x2: float = 0.0
    y1: float = 1.0
    y2: float = 0.0

    def __post_init__(self):
        for name in ("u", "v"):
            val = getattr(self, name)
            if not -EPS_PROB <= val <= 1 + EPS_PROB:
                raise InvariantError(f"{name} in [0, 1]", max(-val, val - 1))
        if self.x1 == self.x2:
            raise InvariantError("x1 != x2", detail=f"both {self.x1!r}")
        if self.y1 == self.y2:
            raise InvariantError("y1 != y2", detail=f"both {self.y1!r}")
        lo = max(0.0, self.u + self.v - 1.0)
        hi = min(self.u, self.v)
        if self.alpha < lo - EPS_PROB or self.alpha > hi + EPS_PROB:
            excess = max(lo - self.alpha, self.alpha - hi)
            raise InvariantError("max(0, u+v-1) <= alpha <= min(u, v)", excess,
                                 detail=f"alpha={self.alpha!r}, u={self.u!r}, v={self.v!r}")

    def cells(self):
        a, u, v = self.alpha, self.u, self.v
        return [[a, u - a], [v - a, 1.0 - u - v + a]]

    def closed_form_covariance(self):
        return (self.alpha - self.u * self.v) * (self.x1 - self.x2) * (self.y1 - self.y2)


def from_parameterization(p):
    return JointDistribution((p.x1, p.x2), (p.y1, p.y2), p.cells())


def marginals(d):
    return d.probs.sum(axis=1), d.probs.sum(axis=0)


def expectations(d):
    """Return ``(E[X], E[Y], E[XY])``."""
    px, py = marginals(d)
    x = np.asarray(d.x_values)
    y = np.asarray(d.y_values)
    ex = float(px @ x)
    ey = float(py @ y)
    exy = float(x @ d.probs @ y)
    return ex, ey, exy


def covariance(d):
    """``E[XY] - E[X]E[Y]``, evaluated in centred form.

    Summing ``p_ij (x_i - E[X]) (y_j - E[Y])`` is algebraically the same
    quantity but keeps full relative accuracy when the values are large
    compared to their spread.
    """
    px, py = marginals(d)
    x = np.asarray(d.x_values)
    y = np.asarray(d.y_values)
    dx = x - px @ x
    dy = y - py @ y
    return float(dx @ d.probs @ dy)


def independence_defect(d):
    px, py = marginals(d)
    return float(np.max(np.abs(d.probs - np.outer(px, py))))


def is_independent(d, tol=EPS_NUM):
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return independence_defect(d) <= tol


def verify_theorem1(p, tol=EPS_NUM):
    """Check ``|cov| <= tol*|dx*dy|  <=>  defect <= tol`` on one binary table.

    Always true for a correct implementation; a ``False`` means the arithmetic
    broke, not that a counterexample was found.
    """
    d = from_parameterization(p)
    spread = abs((p.x1 - p.x2) * (p.y1 - p.y2))
    uncorrelated = abs(covariance(d)) <= tol * spread
    independent = independence_defect(d) <= tol
    return uncorrelated == independent


def three_value_counterexample():
    """X uniform on {-1, 0, 1} and Y = X**2: uncorrelated but dependent."""
    third = 1.0 / 3.0
    return JointDistribution(
        (-1.0, 0.0, 1.0),
        (0.0, 1.0),
        [[0.0, third], [third, 0.0], [0.0, third]],
    )


@dataclass(frozen=True)
class Theorem1Campaign:
    trials: int
    seed: int
    max_identity_residual: float
    max_deviation_residual: float
    independent_count: int
    failures: list

    @property
    def ok(self):
        return not self.failures


def theorem1_campaign(trials, seed=0, tol=EPS_NUM, value_range=10.0, failure_limit=20):
    """Randomized check of the binary covariance/independence equivalence.

    Draws ``trials`` feasible parameterizations (a quarter of them with
    ``alpha = u*v`` exactly, so both sides of the equivalence are exercised),
    builds the 2x2 tables, and evaluates covariance and cell deviations from
    the tables alone. Each instance is compared against the closed form
    ``(alpha - u*v)(x1 - x2)(y1 - y2)``.

    The vectorized path mirrors :func:`covariance` and
    :func:`independence_defect`; per-instance failures are re-checked through
    :func:`verify_theorem1` before being reported.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = SplitMix64(seed)
    draws = rng.random_block(8 * trials).reshape(trials, 8)
    u, v = draws[:, 0], draws[:, 1]
    lo = np.maximum(0.0, u + v - 1.0)
    hi = np.minimum(u, v)
    alpha = lo + (hi - lo) * draws[:, 2]
    at_product = draws[:, 3] < 0.25
    alpha = np.where(at_product, u * v, alpha)
    vals = value_range * (2.0 * draws[:, 4:8] - 1.0)
    x1, x2, y1, y2 = vals.T

    p = np.empty((trials, 2, 2))
    p[:, 0, 0] = alpha
    p[:, 0, 1] = u - alpha
    p[:, 1, 0] = v - alpha
    p[:, 1, 1] = 1.0 - u - v + alpha
    x = np.stack([x1, x2], axis=1)
    y = np.stack([y1, y2], axis=1)
    px = p.sum(axis=2)
    py = p.sum(axis=1)
    cx = x - np.einsum("ni,ni->n", px, x)[:, None]
    cy = y - np.einsum("nj,nj->n", py, y)[:, None]
    cov = np.einsum("ni,nij,nj->n", cx, p, cy)
    dev = np.abs(p - px[:, :, None] * py[:, None, :])

    closed = (alpha - u * v) * (x1 - x2) * (y1 - y2)
    scale = np.maximum(1.0, np.abs(x[:, :, None] * y[:, None, :]).max(axis=(1, 2)))
    identity_res = np.abs(cov - closed) / scale
    spread = np.abs((x1 - x2) * (y1 - y2))
    target = np.abs(cov) / spread
    deviation_res = np.abs(dev - target[:, None, None]).max(axis=(1, 2))
    agree = (np.abs(cov) <= tol * spread) == (dev.max(axis=(1, 2)) <= tol)

    bad = np.flatnonzero((identity_res > tol) | (deviation_res > tol) | ~agree)
    failures = []
    for n in bad[:failure_limit]:
        params = BinaryParameterization(float(alpha[n]), float(u[n]), float(v[n]),
                                        float(x1[n]), float(x2[n]), float(y1[n]), float(y2[n]))
        failures.append({
            "index": int(n),
            "params": {k: getattr(params, k) for k in ("alpha", "u", "v", "x1", "x2", "y1", "y2")},
            "identity_residual": float(identity_res[n]),
            "deviation_residual": float(deviation_res[n]),
            "biconditional": verify_theorem1(params, tol),
        })
    return Theorem1Campaign(
        trials=trials,
        seed=int(seed),
        max_identity_residual=float(identity_res.max()),
        max_deviation_residual=float(deviation_res.max()),
        independent_count=int(np.count_nonzero(at_product)),
        failures=failures,
    )


@dataclass(frozen=True, eq=False)
class SampleSummary:
    count: int
    empirical_cov: float
    empirical_probs: np.ndarray
    seed: int

    def __eq__(self, other):
        if not isinstance(other, SampleSummary):
            return NotImplemented
        return (self.count == other.count and self.seed == other.seed
                and self.empirical_cov == other.empirical_cov
                and np.array_equal(self.empirical_probs, other.empirical_probs))

    def to_dict(self):
        return {
            "count": self.count,
            "seed": self.seed,
            "empirical_cov": self.empirical_cov,
            "empirical_probs": self.empirical_probs.tolist(),
        }


def sample(d, count, seed=0):
    """Draw ``count`` i.i.d. cells by inverse CDF over the flattened table."""
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    m, n = d.shape
    cdf = np.cumsum(d.probs.ravel())
    u = SplitMix64(seed).random_block(count) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), m * n - 1)
    counts = np.bincount(idx, minlength=m * n).reshape(m, n)
    xs = np.asarray(d.x_values)[idx // n]
    ys = np.asarray(d.y_values)[idx % n]
    emp_cov = float(np.mean((xs - xs.mean()) * (ys - ys.mean())))
    return SampleSummary(count, emp_cov, _readonly(counts / count), int(seed))


def covariance_sigma(d, count):
    """Standard error of the sample covariance, from the analytic variance of
    ``(X - E[X]) (Y - E[Y])``."""
    px, py = marginals(d)
    x = np.asarray(d.x_values)
    y = np.asarray(d.y_values)
    prod = np.outer(x - px @ x, y - py @ y)
    cov = float(np.sum(d.probs * prod))
    var = float(np.sum(d.probs * prod ** 2)) - cov ** 2
    return math.sqrt(max(var, 0.0) / count)
