"""covsep command line.

Exit codes: 0 success, 1 assertion or property failure, 2 input error.
In ``--output json`` mode stdout carries exactly one JSON document (one per
line for ``search``); diagnostics go to stderr.
"""

import argparse
import json
import sys
from dataclasses import dataclass

from . import classical as cl
from . import lab
from . import quantum as qm
from .errors import CounterexampleError, GeneratorError, InternalConsistencyError, InvariantError
from .rng import MASK64, derive_seed

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

COMMANDS = ("reproduce-paper", "verify-theorem1", "analyze", "search", "sample")


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None = None
    trials: int = 100_000
    seed: int = 0
    tol: float = 1e-10
    output: str = "human"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.output not in ("human", "json"):
            raise ValueError("output must be 'human' or 'json'")


def _err(*args):
    print(*args, file=sys.stderr)


def _emit(doc):
    print(json.dumps(doc))


def _fmt_table(d):
    head = [f"x={x:.6g}" for x in d.x_values]
    w = max(map(len, head)) + 2
    lines = [" " * w + "".join(f"{'y=' + format(y, '.6g'):<14}" for y in d.y_values)]
    for h, row in zip(head, d.probs):
        lines.append(f"{h:<{w}}" + "".join(f"{p:<14.6g}" for p in row))
    return "\n".join(lines)


def _load_json(path):
    if path is None:
        raise InputError("an input file is required")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from None


def _load_table(path):
    """A JointDistribution file, or a quantum configuration
    ``{"state": {...}, "q": {...}, "r": {...}}`` turned into its induced table."""
    doc = _load_json(path)
    if isinstance(doc, dict) and "x_values" in doc:
        return cl.JointDistribution.from_dict(doc), "file"
    if isinstance(doc, dict) and {"state", "q", "r"} <= doc.keys():
        s = qm.TwoQubitState.from_dict(doc["state"])
        q = qm.Observable2.from_dict(doc["q"])
        r = qm.Observable2.from_dict(doc["r"])
        return lab.induced_joint_distribution(s, q, r), "induced"
    raise InputError(f"{path}: expected a joint distribution or a state/q/r document")


def classify(d, tol):
    """``independent``, ``uncorrelated-dependent`` or ``correlated``.

    Covariance is compared against ``tol`` times the product of the value
    ranges, which for binary tables makes the two tests equivalent.
    """
    cov = cl.covariance(d)
    defect = cl.independence_defect(d)
    spread = (max(d.x_values) - min(d.x_values)) * (max(d.y_values) - min(d.y_values))
    if defect <= tol:
        label = "independent"
    elif abs(cov) <= tol * spread:
        label = "uncorrelated-dependent"
    else:
        label = "correlated"
    return label, cov, defect, spread


def cmd_reproduce_paper(cfg):
    failures = []
    try:
        report = lab.verify_paper_counterexample()
    except CounterexampleError as exc:
        failures.append(f"quantum counterexample: {exc}")
        report = lab.separation_report(qm.bell_state(), lab.PAPER_Q, lab.PAPER_R, 1e-12)

    tv = cl.three_value_counterexample()
    tv_cov = cl.covariance(tv)
    tv_defect = cl.independence_defect(tv)
    if abs(tv_cov) > 1e-12:
        failures.append(f"three-value covariance = {tv_cov!r}, expected 0")
    if abs(tv_defect - 2.0 / 9.0) > 1e-12:
        failures.append(f"three-value independence defect = {tv_defect!r}, expected 2/9")
    if cl.is_independent(tv, 1e-9):
        failures.append("three-value table reported independent")

    if cfg.output == "json":
        _emit({
            "command": "reproduce-paper",
            "passed": not failures,
            "failures": failures,
            "quantum": report.to_dict(),
            "classical": {
                "table": tv.to_dict(),
                "covariance": tv_cov,
                "independence_defect": tv_defect,
                "independent": cl.is_independent(tv, 1e-9),
            },
        })
    else:
        print("Bell state |phi> = (|a1 b1> + |a2 b2>)/sqrt2")
        print(f"  Q_A = {[[z.real for z in row] for row in report.q.entries]}")
        print(f"  R_B = {[[z.real for z in row] for row in report.r.entries]}")
        print(f"  E[XY]        = {report.exy:.15g}")
        print(f"  E[X]E[Y]     = {report.ex * report.ey:.15g}  (E[X] = {report.ex:.15g}, E[Y] = {report.ey:.15g})")
        print(f"  covariance   = {report.quantum_cov:.3e}")
        print(f"  Schmidt      = ({report.schmidt[0]:.15g}, {report.schmidt[1]:.15g})")
        print(f"  separable    = {report.separable}")
        if report.induced_table is not None:
            print("  induced outcome table (eigenvalues of Q_A x eigenvalues of R_B):")
            print("    " + _fmt_table(report.induced_table).replace("\n", "\n    "))
            print(f"  induced defect = {report.induced_defect:.3e}  independent = {report.induced_independent}")
        print(f"  verdict      = {report.verdict.value}")
        print()
        print("Three-valued X uniform on {-1, 0, 1}, Y = X^2")
        print("  " + _fmt_table(tv).replace("\n", "\n  "))
        print(f"  covariance          = {tv_cov:.3e}")
        print(f"  independence defect = {tv_defect:.15g}  (2/9)")
        print()
        print("PASS" if not failures else "FAIL")
    for f in failures:
        _err(f"FAIL: {f}")
    return EXIT_OK if not failures else EXIT_FAIL


def cmd_verify_theorem1(cfg):
    res = cl.theorem1_campaign(cfg.trials, cfg.seed, cfg.tol)
    if cfg.output == "json":
        _emit({
            "command": "verify-theorem1",
            "trials": res.trials,
            "seed": res.seed,
            "tol": cfg.tol,
            "independent_instances": res.independent_count,
            "max_identity_residual": res.max_identity_residual,
            "max_deviation_residual": res.max_deviation_residual,
            "failures": res.failures,
            "passed": res.ok,
        })
    else:
        print(f"trials = {res.trials}, seed = {res.seed}, tol = {cfg.tol:g}")
        print(f"instances with alpha = u*v: {res.independent_count}")
        print(f"max |Cov - (alpha - uv)(x1 - x2)(y1 - y2)| / scale = {res.max_identity_residual:.3e}")
        print(f"max | |p_ij - p(x_i)p(y_j)| - |Cov|/|dx dy| |    = {res.max_deviation_residual:.3e}")
        print("PASS" if res.ok else f"FAIL ({len(res.failures)} shown)")
    for f in res.failures:
        _err("FAIL: " + json.dumps(f))
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_analyze(cfg):
    d, source = _load_table(cfg.input_path)
    label, cov, defect, spread = classify(d, cfg.tol)
    binary = d.shape == (2, 2)
    failed = binary and label == "uncorrelated-dependent"
    reason = None
    if binary and abs(cov) <= cfg.tol * spread:
        reason = "binary table: zero covariance implies independence (two distinct values per variable)"
    ex, ey, exy = cl.expectations(d)
    if cfg.output == "json":
        _emit({
            "command": "analyze",
            "source": source,
            "table": d.to_dict(),
            "expectation_x": ex,
            "expectation_y": ey,
            "expectation_xy": exy,
            "covariance": cov,
            "independence_defect": defect,
            "classification": label,
            "theorem1": reason,
            "passed": not failed,
        })
    else:
        print(_fmt_table(d))
        print(f"E[X] = {ex:.15g}, E[Y] = {ey:.15g}, E[XY] = {exy:.15g}")
        print(f"covariance          = {cov:.6e}")
        print(f"independence defect = {defect:.6e}")
        print(f"classification      = {label}")
        if reason:
            print(f"note: {reason}")
    if failed:
        _err("FAIL: binary table classified uncorrelated-dependent, contradicting the binary theorem")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_search(cfg):
    all_ok = True
    for k in range(cfg.trials):
        seed = derive_seed(cfg.seed, k)
        try:
            _, _, report = lab.random_separation_instance(seed, cfg.tol)
        except GeneratorError as exc:
            _err(f"FAIL: {exc}")
            return EXIT_FAIL
        ok = report.verdict is lab.Verdict.QUANTUM_SEPARATION
        all_ok &= ok
        if cfg.output == "json":
            _emit({"index": k, "seed": seed, **report.to_dict()})
        else:
            print(f"{k:6d} seed={seed:20d} cov={report.quantum_cov:+.2e} "
                  f"schmidt=({report.schmidt[0]:.4f}, {report.schmidt[1]:.4f}) "
                  f"defect={report.induced_defect:.2e} {report.verdict.value}")
    if cfg.output == "human":
        print("PASS" if all_ok else "FAIL")
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_sample(cfg):
    if cfg.input_path is None:
        d = lab.induced_joint_distribution(qm.bell_state(), lab.PAPER_Q, lab.PAPER_R)
        source = "paper-counterexample"
    else:
        d, source = _load_table(cfg.input_path)
    summary = cl.sample(d, cfg.trials, cfg.seed)
    analytic = cl.covariance(d)
    checked = summary.count >= 2
    sigma = cl.covariance_sigma(d, summary.count)
    value_scale = max(1.0, max(abs(x * y) for x in d.x_values for y in d.y_values))
    bound = 5.0 * sigma + cl.EPS_NUM * value_scale
    deviation = abs(summary.empirical_cov - analytic)
    passed = deviation <= bound if checked else None
    if cfg.output == "json":
        _emit({
            "command": "sample",
            "source": source,
            "table": d.to_dict(),
            "analytic_cov": analytic,
            "sigma": sigma,
            "bound": bound if checked else None,
            "bound_check": "passed" if passed else ("failed" if checked else "insufficient"),
            **summary.to_dict(),
        })
    else:
        print(_fmt_table(d))
        print(f"draws = {summary.count}, seed = {summary.seed}")
        print(f"empirical covariance = {summary.empirical_cov:.6e}")
        print(f"analytic covariance  = {analytic:.6e}")
        if checked:
            print(f"|difference| = {deviation:.3e}  5-sigma bound = {bound:.3e}  -> "
                  + ("PASS" if passed else "FAIL"))
        else:
            print("bound check skipped: insufficient draws")
    return EXIT_FAIL if passed is False else EXIT_OK


HANDLERS = {
    "reproduce-paper": cmd_reproduce_paper,
    "verify-theorem1": cmd_verify_theorem1,
    "analyze": cmd_analyze,
    "search": cmd_search,
    "sample": cmd_sample,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="covsep",
        description="Zero covariance versus independence, classical and two-qubit.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("input_path", nargs="?", default=None)
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--output", choices=("human", "json"), default="human")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.input_path, args.trials, args.seed, args.tol, args.output)
    except ValueError as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT
    try:
        return HANDLERS[cfg.command](cfg)
    except (InputError, InvariantError) as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT
    except InternalConsistencyError as exc:
        _err(f"FAIL: {exc}")
        return EXIT_FAIL
    except lab.DegenerateObservable as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
