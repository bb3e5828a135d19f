"""Zero-correlation entangled configurations and the classical bridge.

On the Bell state the covariance of ``Q (x) 1`` and ``1 (x) R`` reduces to::

    (q11 - q22)(r11 - r22)/4 + Re q12 Re r12 - Im q12 Im r12

which is linear in the four real parameters of ``R``. :func:`solve_partner`
solves it for one of them; every solution is re-checked through the full
4x4 expectation path.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import quantum as qm
from .classical import JointDistribution, covariance, independence_defect
from .errors import (
    CounterexampleError,
    DegenerateObservable,
    GeneratorError,
    InternalConsistencyError,
    PivotSingular,
)
from .rng import SplitMix64

EPS_NUM = 1e-10
DEFAULT_TOL = 1e-10

PAPER_Q = qm.Observable2.real([[3, 1], [1, 1]])
PAPER_R = qm.Observable2.real([[1, 1], [1, 3]])

PIVOTS = ("re12", "diag", "im12")
_FREE_ORDER = {
    "re12": ("r11", "r22", "im12"),
    "diag": ("r22", "re12", "im12"),
    "im12": ("r11", "r22", "re12"),
    None: ("r11", "r22", "im12"),
}


class Verdict(str, enum.Enum):
    CLASSICAL_LIKE = "ClassicalLike"
    QUANTUM_SEPARATION = "QuantumSeparation"
    CORRELATED = "Correlated"


def scale_of(*observables):
    return max([1.0] + [q.frobenius() for q in observables])


def reduced_zero_corr(q, r):
    dq = (q[0, 0] - q[1, 1]).real
    dr = (r[0, 0] - r[1, 1]).real
    return dq * dr / 4.0 + q[0, 1].real * r[0, 1].real - q[0, 1].imag * r[0, 1].imag


def zero_corr_residual(q, r):
    """Bell-state covariance of ``Q (x) 1`` and ``1 (x) R``.

    Evaluated through the 4x4 tensor-product path and cross-checked
    against :func:`reduced_zero_corr`.
    """
    direct = qm.quantum_covariance(qm.bell_state(), q, r)
    reduced = reduced_zero_corr(q, r)
    if abs(direct - reduced) > EPS_NUM * scale_of(q, r) ** 2:
        raise InternalConsistencyError(
            f"reduced constraint {reduced!r} disagrees with 4x4 path {direct!r}"
        )
    return direct


def _coefficients(q):
    return {
        "diag": (q[0, 0] - q[1, 1]).real / 4.0,
        "re12": q[0, 1].real,
        "im12": -q[0, 1].imag,
    }


def choose_pivot(q):
    """First of ``re12``, ``diag``, ``im12`` with a usable coefficient, else ``None``."""
    if abs(q[0, 1].real) > EPS_NUM:
        return "re12"
    if abs((q[0, 0] - q[1, 1]).real) > EPS_NUM:
        return "diag"
    if abs(q[0, 1].imag) > EPS_NUM:
        return "im12"
    return None


@dataclass(frozen=True)
class PartnerSolution:
    r: qm.Observable2
    pivot: str | None
    coefficient: float
    residual: float

    @property
    def vacuous(self):
        return self.pivot is None


def solve_partner(q, free, pivot="auto"):
    """Complete a Hermitian ``R`` so that ``zero_corr_residual(q, R) = 0``.

    Parameters
    ----------
    q : Observable2
    free : sequence of 3 floats
        Values for the unknowns that are not solved for, in the order
        ``(r11, r22, re12, im12)`` with the pivot removed. For the default
        ``re12`` pivot that is ``(r11, r22, im12)``; for ``diag`` (which solves
        ``r11`` given ``r22``) it is ``(r22, re12, im12)``.
    pivot : {"auto", "re12", "diag", "im12"}
        ``"auto"`` uses :func:`choose_pivot`. If no coefficient is usable the
        constraint is vacuous and ``re12 = 0`` completes ``free``.

    Raises
    ------
    PivotSingular
        An explicitly requested pivot has a coefficient of magnitude
        ``<= EPS_NUM``.
    """
    if len(free) != 3:
        raise ValueError("free must hold three reals")
    coefs = _coefficients(q)
    if pivot == "auto":
        pivot = choose_pivot(q)
    elif pivot not in PIVOTS:
        raise ValueError(f"unknown pivot {pivot!r}")
    else:
        c = coefs[pivot]
        # the diag threshold applies to q11 - q22, not to the /4 coefficient
        if abs(4.0 * c if pivot == "diag" else c) <= EPS_NUM:
            raise PivotSingular(pivot, c)

    vals = dict(zip(_FREE_ORDER[pivot], map(float, free)))
    if pivot is None:
        vals["re12"] = 0.0
        coef = 0.0
    elif pivot == "diag":
        rest = coefs["re12"] * vals["re12"] + coefs["im12"] * vals["im12"]
        coef = coefs["diag"]
        vals["r11"] = vals["r22"] - rest / coef
    else:
        coef = coefs[pivot]
        rest = coefs["diag"] * (vals["r11"] - vals["r22"])
        other = "im12" if pivot == "re12" else "re12"
        rest += coefs[other] * vals[other]
        vals[pivot] = -rest / coef

    off = complex(vals["re12"], vals["im12"])
    r = qm.Observable2(((vals["r11"], off), (off.conjugate(), vals["r22"])))
    residual = zero_corr_residual(q, r)
    if abs(residual) > EPS_NUM * scale_of(q, r):
        raise InternalConsistencyError(f"solved partner leaves residual {residual:.3e}")
    return PartnerSolution(r, pivot, coef, residual)


def induced_joint_distribution(s, q, r):
    """Born-rule table of eigenvalue outcomes for ``Q (x) 1`` and ``1 (x) R``."""
    sq = qm.spectral_decomposition(q)
    sr = qm.spectral_decomposition(r)
    if sq.degenerate:
        raise DegenerateObservable("q", sq.gap)
    if sr.degenerate:
        raise DegenerateObservable("r", sr.gap)
    psi = s.vector
    probs = np.empty((2, 2))
    for i, p in enumerate(sq.projectors):
        for j, pi in enumerate(sr.projectors):
            val = complex(np.vdot(psi, np.kron(p, pi) @ psi))
            if abs(val.imag) > EPS_NUM:
                raise InternalConsistencyError(f"Born probability has imaginary part {val.imag:.3e}")
            probs[i, j] = val.real
    return JointDistribution(sq.eigenvalues, sr.eigenvalues, probs)


@dataclass(frozen=True)
class SeparationReport:
    state: qm.TwoQubitState
    q: qm.Observable2
    r: qm.Observable2
    exy: float
    ex: float
    ey: float
    quantum_cov: float
    schmidt: tuple
    separable: bool
    induced_table: JointDistribution | None
    induced_defect: float | None
    induced_independent: bool | None
    verdict: Verdict
    tol: float
    scale: float
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "quantum_cov": self.quantum_cov,
            "expectation_xy": self.exy,
            "expectation_x": self.ex,
            "expectation_y": self.ey,
            "product_of_expectations": self.ex * self.ey,
            "schmidt": list(self.schmidt),
            "separable": self.separable,
            "induced_table": None if self.induced_table is None else self.induced_table.to_dict(),
            "induced_defect": self.induced_defect,
            "induced_independent": self.induced_independent,
            "tol": self.tol,
            "scale": self.scale,
            "state": self.state.to_dict(),
            "q": self.q.to_dict(),
            "r": self.r.to_dict(),
            "notes": list(self.notes),
        }


def separation_report(s, q, r, tol=DEFAULT_TOL):
    """Evaluate covariance, entanglement and the induced classical table.

    Zero correlation means ``|cov| <= tol * scale`` with
    ``scale = max(1, ||q||_F, ||r||_F)``. Degenerate observables yield a
    report without an induced table.
    """
    scale = scale_of(q, r)
    ex = qm.expectation_x(s, q)
    ey = qm.expectation_y(s, r)
    exy = qm.expectation_xy(s, q, r)
    cov = exy - ex * ey
    schmidt = qm.schmidt_coefficients(s)
    separable = qm.is_separable(s, tol)
    notes = []
    try:
        table = induced_joint_distribution(s, q, r)
    except DegenerateObservable as exc:
        table = defect = independent = None
        notes.append(str(exc))
    else:
        classical_cov = covariance(table)
        if abs(classical_cov - cov) > EPS_NUM * scale ** 2:
            raise InternalConsistencyError(
                f"induced-table covariance {classical_cov!r} != quantum covariance {cov!r}"
            )
        defect = independence_defect(table)
        independent = defect <= tol
    if abs(cov) > tol * scale:
        verdict = Verdict.CORRELATED
    elif separable:
        verdict = Verdict.CLASSICAL_LIKE
    else:
        verdict = Verdict.QUANTUM_SEPARATION
    return SeparationReport(s, q, r, exy, ex, ey, cov, schmidt, separable,
                            table, defect, independent, verdict, tol, scale, notes)


def random_separation_instance(seed, tol=DEFAULT_TOL, max_attempts=100):
    """Random ``(q, r)`` with zero Bell-state covariance.

    ``q``'s real parameters and the three free parameters of ``r`` are drawn
    uniformly from [-1, 1]. Draws with a vacuous constraint or a degenerate
    observable are redrawn.
    """
    rng = SplitMix64(seed)
    bell = qm.bell_state()
    for _ in range(max_attempts):
        q = qm.random_hermitian(rng)
        free = [rng.uniform(-1.0, 1.0) for _ in range(3)]
        sol = solve_partner(q, free)
        if sol.vacuous:
            continue
        if qm.spectral_decomposition(q).degenerate or qm.spectral_decomposition(sol.r).degenerate:
            continue
        report = separation_report(bell, q, sol.r, tol)
        if report.verdict is not Verdict.QUANTUM_SEPARATION:
            raise InternalConsistencyError(
                f"solved instance has verdict {report.verdict.value} (cov {report.quantum_cov:.3e})"
            )
        return q, sol.r, report
    raise GeneratorError(f"seed {seed}: no usable draw in {max_attempts} attempts")


def verify_paper_counterexample(q=None, r=None, tol=1e-12):
    """Run the Bell-state counterexample and assert every claimed property."""
    q = PAPER_Q if q is None else q
    r = PAPER_R if r is None else r
    report = separation_report(qm.bell_state(), q, r, tol)
    h = 1.0 / math.sqrt(2.0)
    problems = []
    if abs(report.quantum_cov) > tol:
        problems.append(f"quantum_cov = {report.quantum_cov!r}, expected 0 within {tol}")
    if max(abs(report.schmidt[0] - h), abs(report.schmidt[1] - h)) > tol:
        problems.append(f"schmidt = {report.schmidt!r}, expected (1/sqrt2, 1/sqrt2)")
    if report.separable:
        problems.append("Bell state reported separable")
    if report.induced_independent is not True:
        problems.append(f"induced table not independent (defect {report.induced_defect!r})")
    if report.verdict is not Verdict.QUANTUM_SEPARATION:
        problems.append(f"verdict = {report.verdict.value}")
    if problems:
        raise CounterexampleError("; ".join(problems))
    return report
