"""Pure two-qubit states and local observables.

Amplitudes are stored as the 2x2 matrix ``gamma[i][j]``, the coefficient of
``|a_i> (x) |b_j>`` in the computational basis; flattening it row-major gives
the 4-vector on which ``kron(Q, R)`` acts. Complex scalars are Python
``complex``.
"""

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, InvariantError

EPS_NUM = 1e-10
_I2 = np.eye(2, dtype=complex)


def _parse_complex(z):
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise InvariantError("complex entry is [re, im]", detail=f"got {z!r}")
        z = complex(float(z[0]), float(z[1]))
    else:
        z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvariantError("finite complex components", detail=repr(z))
    return z


def _parse_matrix(rows, name):
    try:
        m = tuple(tuple(_parse_complex(z) for z in row) for row in rows)
    except TypeError:
        raise InvariantError(f"{name} is a 2x2 complex matrix", detail="not a nested list") from None
    if len(m) != 2 or any(len(row) != 2 for row in m):
        raise InvariantError(f"{name} is a 2x2 complex matrix")
    return m


def _encode(m):
    return [[[z.real + 0.0, z.imag + 0.0] for z in row] for row in m]


def _frozen_array(m):
    a = np.array(m, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Observable2:
    """Hermitian 2x2 operator.

    Hermiticity is checked to ``EPS_NUM`` relative to ``max(1, ||q||_F)``;
    the stored entries are then made exactly Hermitian (``q21 = conj(q12)``,
    real diagonal).
    """

    entries: tuple

    def __post_init__(self):
        (a, b), (c, d) = _parse_matrix(self.entries, "observable")
        norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2)
        residual = max(abs(b - c.conjugate()), abs(a.imag), abs(d.imag))
        if residual > EPS_NUM * max(1.0, norm):
            raise InvariantError("Hermitian observable", residual)
        entries = ((complex(a.real, 0.0), b), (b.conjugate(), complex(d.real, 0.0)))
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_matrix", _frozen_array(entries))

    @property
    def matrix(self):
        return self._matrix

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, Observable2):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def frobenius(self):
        return float(np.linalg.norm(self._matrix))

    def to_dict(self):
        return {"entries": _encode(self.entries)}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "entries" not in data:
            raise InvariantError("observable document has 'entries'")
        return cls(data["entries"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def real(cls, rows):
        return cls(tuple(tuple(complex(x) for x in row) for row in rows))


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    gamma: tuple

    def __post_init__(self):
        g = _parse_matrix(self.gamma, "gamma")
        norm2 = sum(abs(z) ** 2 for row in g for z in row)
        if abs(norm2 - 1.0) > EPS_NUM:
            raise InvariantError("normalized state", abs(norm2 - 1.0))
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "_vector", _frozen_array(g).reshape(4))

    @property
    def vector(self):
        """Amplitudes ordered ``|a1 b1>, |a1 b2>, |a2 b1>, |a2 b2>``."""
        return self._vector

    @property
    def matrix(self):
        return self._vector.reshape(2, 2)

    def __eq__(self, other):
        if not isinstance(other, TwoQubitState):
            return NotImplemented
        return self.gamma == other.gamma

    def __hash__(self):
        return hash(self.gamma)

    def to_dict(self):
        return {"gamma": _encode(self.gamma)}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "gamma" not in data:
            raise InvariantError("state document has 'gamma'")
        return cls(data["gamma"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def bell_state():
    h = 1.0 / math.sqrt(2.0)
    return TwoQubitState(((h, 0.0), (0.0, h)))


def product_state(a, b):
    a = [_parse_complex(z) for z in a]
    b = [_parse_complex(z) for z in b]
    for name, vec in (("a", a), ("b", b)):
        if len(vec) != 2:
            raise InvariantError(f"factor {name} has two amplitudes")
        res = abs(sum(abs(z) ** 2 for z in vec) - 1.0)
        if res > EPS_NUM:
            raise InvariantError(f"factor {name} normalized", res)
    return TwoQubitState(tuple(tuple(ai * bj for bj in b) for ai in a))


def _scale(*observables):
    return max([1.0] + [q.frobenius() for q in observables])


def _sandwich(s, op, scale):
    psi = s.vector
    val = complex(np.vdot(psi, op @ psi))
    if abs(val.imag) > EPS_NUM * scale:
        raise InternalConsistencyError(
            f"expectation value has imaginary part {val.imag:.3e}; operator is not Hermitian"
        )
    return val.real


def expectation_x(s, q):
    """``<psi| Q (x) 1 |psi>``."""
    return _sandwich(s, np.kron(q.matrix, _I2), _scale(q))


def expectation_y(s, r):
    """``<psi| 1 (x) R |psi>``."""
    return _sandwich(s, np.kron(_I2, r.matrix), _scale(r))


def expectation_xy(s, q, r):
    """``<psi| (Q (x) 1)(1 (x) R) |psi>``."""
    op = np.kron(q.matrix, _I2) @ np.kron(_I2, r.matrix)
    return _sandwich(s, op, _scale(q, r))


def quantum_covariance(s, q, r):
    return expectation_xy(s, q, r) - expectation_x(s, q) * expectation_y(s, r)


def schmidt_coefficients(s):
    """Singular values ``(s1, s2)`` of ``gamma``, largest first.

    Closed form from the eigenvalues of ``gamma^dagger gamma``: the trace is
    ``s1^2 + s2^2`` and the determinant modulus is ``s1 * s2``. ``s2`` is taken
    as ``|det| / s1`` so that product states give a tiny, not noisy, value.
    """
    (a, b), (c, d) = s.gamma
    t = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    det = abs(a * d - b * c)
    disc = math.sqrt(max(t * t - 4.0 * det * det, 0.0))
    s1 = math.sqrt((t + disc) / 2.0)
    s2 = det / s1 if s1 > 0 else 0.0
    return s1, min(s2, s1)


def is_separable(s, tol=1e-9):
    if tol < 0:
        raise ValueError("tol must be non-negative")
    s1, s2 = schmidt_coefficients(s)
    (a, b), (c, d) = s.gamma
    by_rank = s2 <= tol
    by_det = abs(a * d - b * c) <= tol * s1
    if by_rank != by_det:
        raise InternalConsistencyError(
            f"separability tests disagree: sigma2={s2:.3e}, |det|={abs(a * d - b * c):.3e}"
        )
    return by_rank


@dataclass(frozen=True, eq=False)
class SpectralDecomposition2:
    eigenvalues: tuple
    projectors: tuple
    degenerate: bool

    @property
    def gap(self):
        return self.eigenvalues[0] - self.eigenvalues[1]


def degeneracy_tolerance(l1, l2):
    return 1e-9 * max(1.0, abs(l1) + abs(l2))


def spectral_decomposition(q):
    """Eigenvalues (descending) and spectral projectors of a Hermitian 2x2.

    When the eigenvalues coincide to within ``degeneracy_tolerance`` the
    result is flagged degenerate with ``P1 = I`` and ``P2 = 0``.
    """
    (a, b), (_, d) = q.entries
    a, d = a.real, d.real
    half_tr = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), abs(b))
    l1, l2 = half_tr + radius, half_tr - radius
    m = q.matrix
    if l1 - l2 <= degeneracy_tolerance(l1, l2):
        lam = half_tr
        zero = np.zeros((2, 2), dtype=complex)
        return SpectralDecomposition2((lam, lam), (_frozen_array(_I2), _frozen_array(zero)), True)
    p1 = (m - l2 * _I2) / (l1 - l2)
    p2 = (m - l1 * _I2) / (l2 - l1)
    return SpectralDecomposition2((l1, l2), (_frozen_array(p1), _frozen_array(p2)), False)


# Random draws for campaigns. All take a SplitMix64 so runs are reproducible.

def random_hermitian(rng, low=-1.0, high=1.0):
    q11, q22, re, im = (rng.uniform(low, high) for _ in range(4))
    return Observable2(((q11, complex(re, im)), (complex(re, -im), q22)))


def random_qubit(rng):
    while True:
        z = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2)]
        n = math.sqrt(abs(z[0]) ** 2 + abs(z[1]) ** 2)
        if n > 1e-3:
            return [z[0] / n, z[1] / n]


def random_state(rng):
    while True:
        g = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4)]
        n = math.sqrt(sum(abs(z) ** 2 for z in g))
        if n > 1e-3:
            g = [z / n for z in g]
            return TwoQubitState(((g[0], g[1]), (g[2], g[3])))


def random_unitary(rng):
    """Haar-distributed ``U(2)`` element from a random unit quaternion and phase."""
    while True:
        v = [rng.uniform(-1, 1) for _ in range(4)]
        n = math.sqrt(sum(t * t for t in v))
        if 1e-3 < n <= 1.0:
            break
    a = complex(v[0], v[1]) / n
    b = complex(v[2], v[3]) / n
    phase = cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
    return phase * np.array([[a, -b.conjugate()], [b, a.conjugate()]])
