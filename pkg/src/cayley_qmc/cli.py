"""Command-line front end.

Every command builds a ``Report`` and prints it as text, JSON or CSV. Floats
are rounded to 12 significant digits before formatting so all three formats
carry the same numbers and repeated runs are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import enum
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from . import __version__
from .algebra import parse_observable
from .dynamics import MAX_STEPS, ModelParams, critical_theta, find_fixed_points, iterate_trajectory
from .errors import CayleyQMCError
from .qmc import ENUMERATION_CAP, KINDS, boundary_condition, evaluate_state, oracle_weights, recursion_residual
from .transition import PHASE_COLUMNS, gap_report, leaf_sigma3_expectation, magnetization_terms, phase_diagram
from .verify import run_suite

SIG_DIGITS = 12
PROG = "cayley-qmc"


def _round(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def normalize(obj: Any) -> Any:
    """JSON-ready copy of ``obj`` with floats rounded to 12 significant digits."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise CayleyQMCError(f"non-finite result {x}")
        return _round(x)
    if isinstance(obj, complex):
        return {"re": normalize(obj.real), "im": normalize(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [normalize(v) for v in obj]
    return obj


@dataclass
class Report:
    command: str
    params: dict
    result: dict
    version: str = __version__
    elapsed: float | None = None

    def __post_init__(self):
        self.params = normalize(self.params)
        self.result = normalize(self.result)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.elapsed is None:
            del d["elapsed"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls(**json.loads(text))


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        return f"{_fmt(v['re'])}{'+' if v['im'] >= 0 else '-'}{_fmt(abs(v['im']))}j"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _scalars(d: dict) -> list[tuple[str, Any]]:
    return [(k, v) for k, v in d.items() if k != "rows"]


def render_text(r: Report) -> str:
    lines = [f"{PROG} {r.version} {r.command}"]
    lines += [f"  {k} = {_fmt(v)}" for k, v in r.params.items()]
    lines += [f"{k}: {_fmt(v)}" for k, v in _scalars(r.result)]
    rows = r.result.get("rows")
    if rows:
        cols = list(rows[0])
        cells = [[_fmt(row[c]) for c in cols] for row in rows]
        widths = [max(len(c), *(len(x[i]) for x in cells)) for i, c in enumerate(cols)]
        lines.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        lines += ["  ".join(x.rjust(w) for x, w in zip(row, widths)) for row in cells]
    if r.elapsed is not None:
        lines.append(f"elapsed: {r.elapsed:.3f} s")
    return "\n".join(lines) + "\n"


def render_csv(r: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = r.result.get("rows")
    if rows is not None:
        cols = list(rows[0]) if rows else []
        w.writerow(cols)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in cols])
    else:
        items = list(r.params.items()) + _scalars(r.result)
        w.writerow([k for k, _ in items])
        w.writerow([_fmt(v) for _, v in items])
    return buf.getvalue()


RENDERERS = {"text": render_text, "json": Report.to_json, "csv": render_csv}


# argument types: violations are usage errors (exit 2)

def _branching(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k < 2:
        raise argparse.ArgumentTypeError(f"branching order must be >= 2, got {k}")
    return k


def _bounded_float(lo: float, what: str):
    def parse(text: str) -> float:
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not (x > lo and math.isfinite(x)):
            raise argparse.ArgumentTypeError(f"{what} must be a finite number > {lo:g}, got {text}")
        return x

    return parse


def _nonneg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def _positive_int(text: str) -> int:
    n = _nonneg(text)
    if n == 0:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


_theta = _bounded_float(1.0, "theta")
_positive = _bounded_float(0.0, "value")


def _add_output(sp: argparse.ArgumentParser):
    sp.add_argument("--format", choices=sorted(RENDERERS), default="text")
    sp.add_argument("--out", metavar="FILE", help="write the report to FILE instead of stdout")
    sp.add_argument("--timing", action="store_true", help="include elapsed wall time (breaks byte-determinism)")


def _add_model(sp: argparse.ArgumentParser):
    sp.add_argument("--k", type=_branching, required=True, help="branching order (>= 2)")
    temp = sp.add_mutually_exclusive_group(required=True)
    temp.add_argument("--theta", type=_theta, help="theta = exp(2*beta) > 1")
    temp.add_argument("--beta", type=_positive, help="inverse temperature > 0")


def _add_kind(sp: argparse.ArgumentParser, kinds=KINDS):
    sp.add_argument("--kind", choices=kinds, required=True)
    sp.add_argument("--alpha", type=_positive, help="parameter of the alpha family")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog=PROG, description="Ising quantum Markov chains on Cayley trees")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("critical", help="critical theta and beta for branching order k")
    sp.add_argument("--k", type=_branching, required=True)
    _add_output(sp)

    sp = sub.add_parser("fixed-points", help="fixed points of the ratio map and planar fixed points")
    _add_model(sp)
    _add_output(sp)

    sp = sub.add_parser("trajectory", help="iterate the planar boundary-field map")
    _add_model(sp)
    sp.add_argument("--x0", type=_positive, required=True)
    sp.add_argument("--y0", type=_positive, required=True)
    sp.add_argument("--steps", type=_positive_int, default=MAX_STEPS, help="maximum number of steps")
    sp.add_argument("--points", action="store_true", help="list every iterate")
    _add_output(sp)

    sp = sub.add_parser("boundary", help="boundary condition fields and recursion residuals")
    _add_model(sp)
    _add_kind(sp)
    sp.add_argument("--n", type=_nonneg, default=6, help="deepest level to report")
    _add_output(sp)

    sp = sub.add_parser("evaluate", help="finite-volume state on a product observable (exact enumeration)")
    _add_model(sp)
    _add_kind(sp)
    sp.add_argument("--n", type=_nonneg, required=True, help="volume level")
    sp.add_argument("--observable", default="", help='comma list of site:P, e.g. "1.1:Z,2:X"')
    sp.add_argument("--workers", type=_positive_int, default=1)
    sp.add_argument("--cap", type=_positive_int, default=ENUMERATION_CAP, help="maximum number of sites")
    _add_output(sp)

    sp = sub.add_parser("correlation", help="Z expectation at the leaf (1,...,1) of level N+1")
    _add_model(sp)
    sp.add_argument("--kind", choices=("alpha0", "beta", "gamma"), required=True)
    sp.add_argument("--N", type=_nonneg, required=True)
    _add_output(sp)

    sp = sub.add_parser("gap", help="gap between the symmetric and the gamma state")
    _add_model(sp)
    sp.add_argument("--N", type=_nonneg, default=1)
    _add_output(sp)

    sp = sub.add_parser("phase-diagram", help="one row per theta")
    sp.add_argument("--k", type=_branching, required=True)
    grid = sp.add_mutually_exclusive_group(required=True)
    grid.add_argument("--thetas", help="comma list of theta values")
    grid.add_argument("--range", nargs=3, metavar=("MIN", "MAX", "COUNT"), help="evenly spaced theta grid")
    sp.add_argument("--workers", type=_positive_int, default=1)
    _add_output(sp)

    sp = sub.add_parser("verify", help="run the self-check suite")
    _add_model(sp)
    _add_output(sp)

    for sp in sub.choices.values():
        sp.set_defaults(parser=sp)
    return ap


def _model(a: argparse.Namespace) -> tuple[ModelParams, dict]:
    p = ModelParams.from_beta(a.k, a.beta) if a.beta is not None else ModelParams(a.k, a.theta)
    return p, {"k": p.k, "theta": p.theta, "beta": p.beta}


def _thetas(a: argparse.Namespace, ap: argparse.ArgumentParser) -> list[float]:
    if a.thetas is not None:
        raw = [x for x in a.thetas.split(",") if x.strip()]
        try:
            values = [_theta(x) for x in raw]
        except argparse.ArgumentTypeError as e:
            ap.error(f"argument --thetas: {e}")
        if not values:
            ap.error("argument --thetas: empty list")
        return values
    try:
        lo, hi = _theta(a.range[0]), _theta(a.range[1])
        count = _positive_int(a.range[2])
    except argparse.ArgumentTypeError as e:
        ap.error(f"argument --range: {e}")
    if hi < lo:
        ap.error("argument --range: MAX must be >= MIN")
    return [_round(x) for x in np.linspace(lo, hi, count)]


def _kind_bc(p: ModelParams, a: argparse.Namespace, ap: argparse.ArgumentParser):
    if a.kind == "alpha" and a.alpha is None:
        ap.error("argument --alpha: required with --kind alpha")
    if a.kind != "alpha" and a.alpha is not None:
        ap.error("argument --alpha: only valid with --kind alpha")
    return boundary_condition(p, a.kind, a.alpha)


def execute(a: argparse.Namespace) -> tuple[Report, int]:
    """Run a parsed command; late usage errors go through the subcommand parser (exit 2)."""
    cmd, ap = a.command, a.parser
    if cmd == "critical":
        c = critical_theta(a.k)
        return Report(cmd, {"k": a.k}, {"theta_c": c.theta, "beta_c": c.beta}), 0

    if cmd == "phase-diagram":
        thetas = _thetas(a, ap)
        rows = [{c: r.as_dict()[c] for c in PHASE_COLUMNS} for r in phase_diagram(a.k, thetas, workers=a.workers)]
        return Report(cmd, {"k": a.k, "count": len(rows)}, {"rows": rows}), 0

    p, params = _model(a)

    if cmd == "fixed-points":
        fp = find_fixed_points(p)
        regime = "transition" if p.has_transition else "unique"
        rows = [
            {"line": i, "t": t, "s": s, "x": pt[0], "y": pt[1]}
            for i, (t, s, pt) in enumerate(zip(fp.t, fp.s, fp.planar), start=1)
        ]
        return Report(cmd, params, {"regime": regime, "theta_c": p.theta_c, "count": fp.count, "rows": rows}), 0

    if cmd == "trajectory":
        params |= {"x0": a.x0, "y0": a.y0, "steps": a.steps}
        tr = iterate_trajectory(p, a.x0, a.y0, max_steps=a.steps)
        result: dict[str, Any] = {
            "verdict": tr.verdict,
            "predicted": tr.predicted,
            "steps": tr.steps,
            "exit_step": tr.exit_step,
            "limit": list(tr.limit) if tr.limit else None,
        }
        if a.points:
            result["rows"] = [{"step": i, "x": x, "y": y} for i, (x, y) in enumerate(tr.points)]
        return Report(cmd, params, result), 0

    if cmd == "boundary":
        bc = _kind_bc(p, a, ap)
        params |= {"kind": a.kind, "alpha": a.alpha, "n": a.n}
        rows = []
        for n in range(a.n + 1):
            h = bc.h(n)
            rows.append({"n": n, "h_plus": h.dp, "h_minus": h.dm, "h0": h.a0, "h3": h.a3,
                         "residual": recursion_residual(bc, p, n)})
        result = {"w0": bc.w0.a0, "normalization": bc.normalization(), "rows": rows}
        return Report(cmd, params, result), 0

    if cmd == "evaluate":
        bc = _kind_bc(p, a, ap)
        params |= {"kind": a.kind, "alpha": a.alpha, "n": a.n, "observable": a.observable}
        obs = parse_observable(a.observable, a.n)
        st = oracle_weights(p, bc, a.n, cap=a.cap, workers=a.workers)
        return Report(cmd, params, {"value": evaluate_state(st, obs), "configurations": len(st.weights)}), 0

    if cmd == "correlation":
        params |= {"kind": a.kind, "N": a.N}
        m_inf, c, lam = magnetization_terms(p, a.kind)
        result = {
            "site": ".".join(["1"] * (a.N + 1)),
            "value": leaf_sigma3_expectation(p, a.kind, a.N),
            "limit": m_inf,
            "coefficient": c,
            "lambda2": lam,
        }
        return Report(cmd, params, result), 0

    if cmd == "gap":
        params |= {"N": a.N}
        rep = gap_report(p, a.N)
        result = {
            "verdict": rep.verdict,
            "phi_alpha": rep.phi_alpha,
            "phi_gamma_N": rep.phi_gamma_N,
            "phi_limit": rep.phi_limit,
            "eps0": rep.eps0,
            "gap": rep.gap,
            "N0": rep.N0,
            "lambda2": rep.lambda2,
            "phi_beta_N": rep.phi_beta_N,
            "beta_gamma_gap": rep.beta_gamma_gap,
        }
        return Report(cmd, params, result), 0

    if cmd == "verify":
        checks = run_suite(p.k, p.theta)
        failed = sum(not c.passed for c in checks)
        rows = [asdict(c) for c in checks]
        result = {"checks": len(checks), "failed": failed, "rows": rows}
        return Report(cmd, params, result), 0 if failed == 0 else 1

    raise AssertionError(f"unhandled command {cmd}")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        report, status = execute(a)
    except CayleyQMCError as e:
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return 1
    if a.timing:
        report.elapsed = time.perf_counter() - t0
    text = RENDERERS[a.format](report)
    if a.out:
        try:
            with open(a.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            print(f"{PROG}: error: cannot write {a.out}: {e.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return status
