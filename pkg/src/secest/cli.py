"""Command-line entry point: ``secest run | analyze | design``.

Exit status is 0 on success, 1 for invalid input (bad flags, missing or
malformed files) and 2 when a computation fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .decoder import correctability_report
from .exceptions import ConfigError, DimensionError, MaxTriesExceeded, NotCorrectable, SecestError
from .lti import load_system

EXIT_OK, EXIT_INVALID, EXIT_FAILURE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="secest", description="Secure state estimation under sparse sensor attacks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate a scenario and write its outputs")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path)
    run.add_argument(
        "--mode",
        action="append",
        choices=["KfOnly", "SeOnly", "KfPlusSe"],
        help="estimator mode to run; repeat for several (default: those in the config)",
    )

    an = sub.add_parser("analyze", help="print the correctability report of a system file")
    an.add_argument("system", type=Path)
    an.add_argument("--q", type=int, help="attack budget for the window length (default: q_max)")
    an.add_argument("--out", type=Path, help="also write the report as JSON")

    des = sub.add_parser("design", help="run the pole-perturbation design and save the gain")
    des.add_argument("config", type=Path)
    des.add_argument("--seed", type=int)
    des.add_argument("--out", type=Path)
    return parser


def _cmd_run(args):
    from .scenario import ScenarioConfig, emit_outputs, run_scenario

    cfg = ScenarioConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.mode:
        cfg.modes = tuple(dict.fromkeys(args.mode))
    out = args.out or (Path(cfg.out) if cfg.out else Path("out"))
    report = run_scenario(cfg)
    emit_outputs(report, out)
    for mode, m in report.metrics().items():
        print(
            f"{mode:9s} state_rmse={m['state_rmse']:.4g} path_error={m['path_error']:.4g} "
            f"decoder_failures={m['decoder_failures']}"
        )
    print(f"outputs written to {out}")
    return EXIT_OK


def _cmd_analyze(args):
    try:
        system = load_system(args.system)
    except FileNotFoundError as exc:
        raise ConfigError(f"system file not found: {args.system}") from exc
    except (KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{args.system}: {exc}") from exc
    rep = correctability_report(system)
    q = rep.q_max if args.q is None else args.q
    if q < 0:
        raise ConfigError("--q must be nonnegative")
    try:
        rep = correctability_report(system, q=max(q, 0))
    except NotCorrectable as exc:
        print(f"q = {q} is not correctable: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    d = rep.to_dict()
    print(f"n = {rep.n}, p = {rep.p}")
    print(f"supports |supp(C v_i)|: {[int(s) for s in rep.supports]}")
    print(f"s_min = {rep.s_min}")
    print(f"q_max = {rep.q_max}")
    if rep.T_star is None:
        print(f"q = {q}: not correctable (needs 2q < s_min), no finite T*")
    else:
        print(f"q = {rep.q}, T* = {rep.T_star}")
    for name, ok in rep.conditions.items():
        print(f"{name}: {ok}")
    if args.out:
        args.out.write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_design(args):
    from .scenario import ScenarioConfig, make_selection
    from .quadrotor import (
        QuadrotorParams,
        build_quadrotor,
        default_pole_request,
        design_secure_feedback,
        lqr_gain,
        lqr_inspired_poles,
    )

    cfg = ScenarioConfig.load(args.config)
    model = build_quadrotor(QuadrotorParams(**cfg.plant))
    sel = make_selection(cfg)
    ctl = dict(cfg.controller)
    if ctl.get("poles") is not None:
        initial = np.asarray(ctl["poles"], dtype=float)
    elif ctl.get("initial", "default") == "lqr":
        initial = lqr_inspired_poles(lqr_gain(model, C=sel.C))
    else:
        initial = default_pole_request(model.n)
    seed = args.seed if args.seed is not None else int(ctl.get("seed", 0))
    try:
        d = design_secure_feedback(model, sel.C, initial, max_tries=int(ctl.get("max_tries", 1000)), seed=seed)
    except MaxTriesExceeded as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILURE
    out = args.out or Path(cfg.out or ".") / "gain.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "G": d.G.tolist(),
        "sensors": list(sel.indices),
        "requested_poles": np.asarray(d.requested).tolist(),
        "eigenvalues": np.real(d.eigenvalues).tolist(),
        "tries": int(d.tries),
        "correctability": d.report.to_dict(),
    }
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"design found after {d.tries} tries; s_min = {d.report.s_min}, q_max = {d.report.q_max}")
    print(f"gain written to {out}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "analyze": _cmd_analyze, "design": _cmd_design}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DimensionError) as exc:
        print(f"secest: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SecestError, ArithmeticError, np.linalg.LinAlgError, OSError) as exc:
        print(f"secest: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
