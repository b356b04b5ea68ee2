"""Command-line interface.

Exit codes: 0 compatible, 3 incompatible, 4 marginal, 1 input or solver
error.  ``vn`` exits 0 when a non-commuting pair was found and 3 when the
observables commute; ``nosignal`` exits 3 when the tables signal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import chsh, jm, matrixfile, measurement, nosignal
from .errors import IncompatError, ObservablesCompatibleError, SignalingError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPATIBLE = 3
EXIT_MARGINAL = 4

REPORT_KEYS = ("lambda0", "lambda_star", "mu", "verdict", "phi_star", "value", "gap")
VERDICT_EXIT = {jm.COMPATIBLE: EXIT_OK, jm.INCOMPATIBLE: EXIT_INCOMPATIBLE, jm.MARGINAL: EXIT_MARGINAL}

DEFAULTS = {"tol_psd": 1e-7, "tol_gap": 1e-8, "grid": 2048}


def _env_default(name, cast):
    """Value of ``INCOMPAT_<NAME>`` when set, else the built-in default."""
    var = "INCOMPAT_" + name.upper()
    raw = os.environ.get(var)
    if raw is None:
        return DEFAULTS[name]
    try:
        return cast(raw)
    except ValueError:
        raise IncompatError(f"{var}={raw!r} is not a valid {cast.__name__}") from None


def _effect(mf, name):
    try:
        return measurement.Effect(mf.matrix(name))
    except IncompatError as exc:
        raise type(exc)(f"matrix {name!r}: {exc}") from None


def _emit(args, payload, text_lines):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=False))
    else:
        print("\n".join(text_lines))


def _report_payload(report, scan, value):
    return dict(zip(REPORT_KEYS, (
        report.lambda0,
        report.lambda_star,
        report.mu_robustness,
        report.verdict,
        None if scan is None else scan.phi_star,
        value,
        report.gap,
    )))


def _pair_report(args):
    mf = matrixfile.load(args.file)
    q, p = _effect(mf, "Q"), _effect(mf, "P")
    report = jm.analyze_pair(q, p, gap_tol=args.tol_gap, tol=args.tol_psd)
    scan = chsh.lambda_star_scan(q, p, grid=args.grid)
    if args.noise_check and report.mu_robustness > 0:
        check = jm.noise_check(q, p, report.mu_robustness, seed=args.seed)
        print(f"noise check: weight {check.mu:.9g}, worst lambda0 {check.worst:.9g}", file=sys.stderr)
    return q, p, report, scan


def cmd_check_pair(args) -> int:
    _, _, report, scan = _pair_report(args)
    value = 1 + 2 * scan.lambda_star
    lines = [
        f"lambda0      {report.lambda0:.10f}",
        f"lambda_star  {report.lambda_star:.10f}",
        f"mu           {report.mu_robustness:.10f}",
        f"gap          {report.gap:.3e}",
        f"verdict      {report.verdict}",
    ]
    _emit(args, _report_payload(report, scan, value), lines)
    return VERDICT_EXIT[report.verdict]


def _write_witness(path, w):
    mf = matrixfile.MatrixFile(
        dim=None,
        matrices={"A1": w.A1, "A2": w.A2, "B1": w.B1, "B2": w.B2},
        vectors={"psi": w.psi},
        extra={"phi_star": w.phi_star, "value": w.value},
    )
    matrixfile.dump(mf, path)
    back = matrixfile.load(path)
    bo = chsh.bell_operator(back.matrix("A1"), back.matrix("A2"), back.matrix("B1"), back.matrix("B2"))
    return chsh.expectation(bo, back.vectors["psi"])


def cmd_chsh(args) -> int:
    q, p, report, scan = _pair_report(args)
    value = 1 + 2 * scan.lambda_star
    lines = [
        f"max CHSH     {value:.10f}",
        f"phi_star     {scan.phi_star:.10f}",
        f"lambda_star  {scan.lambda_star:.10f}",
        f"verdict      {report.verdict}",
    ]
    if args.witness:
        w = chsh.extract_witness(q, p, grid=args.grid)
        recheck = _write_witness(args.witness, w)
        msg = f"witness written to {args.witness}; re-read value {recheck:.12f}"
        if args.format == "json":
            print(msg, file=sys.stderr)
        else:
            lines.append(msg)
    _emit(args, _report_payload(report, scan, value), lines)
    return VERDICT_EXIT[report.verdict]


def _complex_rows(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def cmd_vn(args) -> int:
    mf = matrixfile.load(args.file)
    a1, a2 = mf.matrix("A1"), mf.matrix("A2")
    try:
        o1, o2 = measurement.dichotomize_vn(a1, a2, tol=args.tol_psd)
    except ObservablesCompatibleError as exc:
        _emit(args, {"verdict": "compatible", "commutator_norm": 0.0,
                     "fixed_b_value": 1.0, "optimal_value": 1.0},
              [f"verdict      compatible ({exc})"])
        return EXIT_INCOMPATIBLE
    k = float(np.linalg.norm(o1.op @ o2.op - o2.op @ o1.op, 2))
    fixed = chsh.max_violation_fixed_B(o1.op, o2.op)
    best = chsh.max_violation_vn(o1.op, o2.op)
    payload = {"verdict": "incompatible", "commutator_norm": k, "fixed_b_value": fixed,
               "optimal_value": best, "A1": _complex_rows(o1.op), "A2": _complex_rows(o2.op)}
    lines = [
        f"||[A1, A2]||      {k:.10f}",
        f"fixed-B value     {fixed:.10f}",
        f"optimal value     {best:.10f}",
        "A1 (+-1) =", np.array2string(o1.op, precision=6),
        "A2 (+-1) =", np.array2string(o2.op, precision=6),
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def _names(mf, key, prefix):
    names = mf.extra.get(key)
    if names is None:
        names = sorted(n for n in mf.matrices if n.startswith(prefix))
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise IncompatError(f"'{key}' must be a list of matrix names")
    return names


def cmd_multi(args) -> int:
    mf = matrixfile.load(args.file)
    if args.mode == "dichotomic":
        names = _names(mf, "effects", "T")
        report = jm.analyze_multi_dichotomic([_effect(mf, n) for n in names],
                                             gap_tol=args.tol_gap, tol=args.tol_psd)
    else:
        groups = mf.extra.get("povms")
        if groups is None:
            groups = [_names(mf, "A", "A"), _names(mf, "B", "B")]
        if not isinstance(groups, list) or len(groups) != 2:
            raise IncompatError("'povms' must list exactly two groups of matrix names")
        povms = []
        for g in groups:
            effects = [_effect(mf, n) for n in g]
            try:
                povms.append(measurement.NOutcomePOVM(tuple(effects)))
            except IncompatError as exc:
                raise type(exc)(f"POVM {g}: {exc}") from None
        report = jm.analyze_two_nvalued(*povms, gap_tol=args.tol_gap, tol=args.tol_psd)
    lines = [
        f"lambda0      {report.lambda0:.10f}",
        f"mu           {report.mu_robustness:.10f}",
        f"gap          {report.gap:.3e}",
        f"verdict      {report.verdict}",
    ]
    _emit(args, _report_payload(report, None, None), lines)
    return VERDICT_EXIT[report.verdict]


def _load_json(path):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise IncompatError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def cmd_nosignal(args) -> int:
    doc = _load_json(args.file)
    if not isinstance(doc, dict) or "t1" not in doc or "t2" not in doc:
        raise IncompatError("file must define triple distributions 't1' and 't2'")
    t1 = nosignal.TripleDistribution(doc["t1"])
    t2 = nosignal.TripleDistribution(doc["t2"])
    try:
        quad = nosignal.join_distributions(t1, t2, tol=args.tol_signal)
    except SignalingError as exc:
        _emit(args, {"verdict": "signaling", "max_deviation": exc.max_deviation,
                     "quad": None, "residuals": None, "chsh": None},
              [f"signaling detected: max marginal deviation {exc.max_deviation:.3e}"])
        return EXIT_INCOMPATIBLE
    res = nosignal.marginal_residuals(quad, t1, t2)
    value = nosignal.chsh_value_classical(quad) if quad.p.shape == (2, 2, 2, 2) else None
    payload = {"verdict": "no-signaling", "max_deviation": nosignal.signaling_deviation(t1, t2),
               "quad": quad.p.tolist(), "residuals": res, "chsh": value}
    lines = ["p(a1, a2, b1, b2):"]
    for idx in np.ndindex(*quad.p.shape):
        if quad.p[idx] != 0:
            lines.append(f"  {idx}  {quad.p[idx]:.12g}")
    lines.append("marginal residuals: " + ", ".join(f"{k} {v:.2e}" for k, v in res.items()))
    lines.append("classical CHSH: " + ("n/a (non-binary)" if value is None else f"{value:.12g}"))
    _emit(args, payload, lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="input file, or - for standard input")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--tol-psd", type=float, default=None,
                        help="verdict tolerance band (env INCOMPAT_TOL_PSD, default 1e-7)")
    common.add_argument("--tol-gap", type=float, default=None,
                        help="relative duality gap target (env INCOMPAT_TOL_GAP, default 1e-8)")
    common.add_argument("--grid", type=int, default=None,
                        help="scan grid size (env INCOMPAT_GRID, default 2048)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled noise diagnostics")

    parser = argparse.ArgumentParser(prog="incompat", description="Joint measurability and CHSH violations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-pair", parents=[common], help="decide joint measurability of effects Q, P")
    p.add_argument("--noise-check", action="store_true", help="mix with sampled noise effects at weight mu")
    p.set_defaults(func=cmd_check_pair)

    p = sub.add_parser("chsh", parents=[common], help="largest CHSH value for effects Q, P")
    p.add_argument("--witness", metavar="PATH", help="write state and observables attaining it")
    p.set_defaults(func=cmd_chsh, noise_check=False)

    p = sub.add_parser("vn", parents=[common], help="sharp observables A1, A2")
    p.set_defaults(func=cmd_vn)

    p = sub.add_parser("multi", parents=[common], help="two N-outcome POVMs or M dichotomic effects")
    p.add_argument("--mode", choices=("nvalued", "dichotomic"), default="dichotomic")
    p.set_defaults(func=cmd_multi)

    p = sub.add_parser("nosignal", parents=[common], help="glue two triple distributions")
    p.add_argument("--tol-signal", type=float, default=nosignal.SIGNAL_TOL)
    p.set_defaults(func=cmd_nosignal)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for name, cast in (("tol_psd", float), ("tol_gap", float), ("grid", int)):
            if getattr(args, name) is None:
                setattr(args, name, _env_default(name, cast))
        return args.func(args)
    except (IncompatError, OSError) as exc:
        print(f"incompat: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
