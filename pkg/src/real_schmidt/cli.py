"""Command-line entry point: ``real-schmidt <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import flowfield, oracle, schmidt4
from .errors import NormalFormFailed, StepSizeUnderflow
from .reduce5 import reduce_to_s05
from .states import (
    ToleranceConfig,
    apply_local_gate,
    embed_s05,
    normalize,
    reduced_purity,
)

log = logging.getLogger("real_schmidt")

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


class InputError(Exception):
    pass


# -- serialization ------------------------------------------------------------

def _render(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError("non-finite number in output")
        text = format(float(obj), ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_render(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """JSON text with every float written to 17 significant digits."""
    return _render(obj) + "\n"


def load_state_file(path):
    """Read a StateFile; returns (normalized amplitudes, label)."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not isinstance(data, dict) or "amplitudes" not in data:
        raise InputError(f"{path}: missing field 'amplitudes'")
    amps = data["amplitudes"]
    if not isinstance(amps, list) or len(amps) != 8:
        n = len(amps) if isinstance(amps, list) else "a non-list"
        raise InputError(f"{path}: field 'amplitudes' must hold exactly 8 numbers, got {n}")
    if not all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in amps):
        raise InputError(f"{path}: field 'amplitudes' must hold numbers only")
    label = data.get("label")
    if label is not None and not isinstance(label, str):
        raise InputError(f"{path}: field 'label' must be a string")
    raw = np.array(amps, dtype=float)
    try:
        u = normalize(raw)
    except ValueError as exc:
        raise InputError(f"{path}: field 'amplitudes': {exc}") from exc
    norm = float(np.linalg.norm(raw))
    if abs(norm - 1.0) > 1e-9:
        log.warning("%s: amplitudes had norm %.12g; normalized", path, norm)
    return u, label


def gate_to_json(gate):
    return {f"q{k}": {"theta": gate.thetas[k], "reflect": gate.reflects[k]} for k in range(3)}


def result_to_json(result, label=None):
    lam = result.lambdas
    inv = flowfield.invariants(np.array([lam[0], 0.0, lam[1], lam[2], lam[3], lam[4]]))
    out = {
        "lambdas": list(lam),
        "gate": gate_to_json(result.gate),
        "residual": result.residual,
        "path": result.path,
        "invariants": {"I0": inv.I0, "I2": inv.I2, "I3": inv.I3, "I4": inv.I4},
    }
    if label is not None:
        out["label"] = label
    return out


def _fmt_gate(gate):
    return "  ".join(
        f"q{k}: theta={gate.thetas[k]:.12g}{' +X' if gate.reflects[k] else ''}" for k in (2, 1, 0)
    )


# -- subcommands --------------------------------------------------------------

def cmd_normal_form(args):
    s, label = load_state_file(args.input)
    cfg = ToleranceConfig(zero_tol=args.tol)
    try:
        result = schmidt4.normal_form(s, cfg, canonical_sign=args.canonical_sign)
    except NormalFormFailed as exc:
        print(f"normal form failed: path={exc.path} best residual={exc.best_residual:.3e}", file=sys.stderr)
        return EXIT_FAILED
    text = dumps(result_to_json(result, label))
    if args.out:
        Path(args.out).write_text(text)
    kets = ("000", "011", "101", "110", "111")
    print("normal form: " + " ".join(f"{l:+.12f}|{k}>" for l, k in zip(result.lambdas, kets)))
    print(f"path: {result.path}")
    print(f"residual: {result.residual:.3e}")
    print(f"gate: {_fmt_gate(result.gate)}")
    return EXIT_OK


def cmd_invariants(args):
    s, _ = load_state_file(args.input)
    w, _ = reduce_to_s05(s)
    inv = flowfield.invariants(w)
    print(f"I0 = {inv.I0:.15g}")
    print(f"I2 = {inv.I2:.15g}")
    print(f"I3 = {inv.I3:.15g}")
    print(f"I4 = {inv.I4:.15g}")
    for k in range(3):
        print(f"purity q{k} = {reduced_purity(s, k):.15g}")
    return EXIT_OK


CSV_COLUMNS = ["t", "x1", "x2", "x3", "x4", "x5", "x6", "theta0", "theta1", "theta2", "I0", "I2", "I3", "I4"]


def cmd_flow(args):
    s, _ = load_state_file(args.input)
    w, _ = reduce_to_s05(s)
    if args.direction not in (1, -1):
        raise InputError("--direction must be 1 or -1")
    if args.samples < 2 or not args.t_max > 0:
        raise InputError("--samples must be >= 2 and --t-max positive")
    samples = np.linspace(0.0, args.t_max, args.samples)[1:]
    try:
        trace = flowfield.integrate_flow(
            w, args.direction, ToleranceConfig(), t_max=args.t_max,
            stop_on_event=args.stop_at_event, sample_times=samples,
        )
    except StepSizeUnderflow as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for t, x, th in zip(trace.times, trace.states, trace.angles):
                inv = flowfield.invariants(x).as_array()
                writer.writerow([format(v, ".17g") for v in (t, *x, *th, *inv)])
    print(f"outcome: {trace.outcome.value} at t={trace.t_end:.12g}")
    print(f"invariant drift: {trace.invariant_drift:.3e}")
    return EXIT_OK


STABILITY_NOTE = "grid search gives an upper bound on the minimum; stability across grids is evidence, not proof"


def _report_search(residual, gate, triple):
    print(f"residual: {residual:.6e}")
    print(f"best gate: {_fmt_gate(gate)}")
    if triple:
        print("stability: " + ", ".join(f"grid {n}: {r:.6e}" for n, r in triple))
        print(f"note: {STABILITY_NOTE}")


def cmd_oracle(args):
    s, _ = load_state_file(args.input)
    try:
        pattern = oracle.parse_pattern(args.pattern)
    except ValueError as exc:
        raise InputError(f"--pattern: {exc}") from exc
    cfg = oracle.SearchConfig(grid_n=args.grid, seed=args.seed)
    residual, gate = oracle.pattern_residual(s, pattern, cfg)
    triple = None
    if args.verify_stability:
        triple = oracle.stability_triple(lambda c: oracle.pattern_residual(s, pattern, c), args.grid, seed=args.seed)
    print(f"pattern: {oracle.pattern_label(pattern)}")
    _report_search(residual, gate, triple)
    return EXIT_OK


def cmd_equiv(args):
    a, _ = load_state_file(args.a)
    b, _ = load_state_file(args.b)
    cfg = oracle.SearchConfig(grid_n=args.grid, seed=args.seed)
    residual, gate = oracle.equivalence_residual(a, b, cfg)
    triple = None
    if args.verify_stability:
        triple = oracle.stability_triple(lambda c: oracle.equivalence_residual(a, b, c), args.grid, seed=args.seed)
    _report_search(residual, gate, triple)
    return EXIT_OK


def cmd_random(args):
    u = oracle.random_state(args.seed)
    text = dumps({"amplitudes": list(u), "label": f"random seed {args.seed}"})
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _grid_arg(text):
    n = int(text)
    if n < 8:
        raise argparse.ArgumentTypeError("grid must be at least 8")
    return n


def build_parser():
    p = argparse.ArgumentParser(prog="real-schmidt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("normal-form", help="reduce a state to the five-term normal form")
    q.add_argument("input")
    q.add_argument("--tol", type=float, default=1e-10, help="zero threshold for eliminated amplitudes")
    q.add_argument("--canonical-sign", action="store_true", help="flip the global sign so lambda1 >= 0")
    q.add_argument("--out", help="write the ResultFile JSON here")
    q.set_defaults(func=cmd_normal_form)

    q = sub.add_parser("invariants", help="first integrals and single-qubit purities")
    q.add_argument("input")
    q.set_defaults(func=cmd_invariants)

    q = sub.add_parser("flow", help="integrate the tangent flow and write a CSV trace")
    q.add_argument("input")
    q.add_argument("--t-max", type=float, default=10.0)
    q.add_argument("--direction", type=int, default=1)
    q.add_argument("--samples", type=int, default=101)
    q.add_argument("--stop-at-event", action="store_true", help="stop at the first x2 sign change")
    q.add_argument("--csv")
    q.set_defaults(func=cmd_flow)

    q = sub.add_parser("oracle", help="brute-force reachability of an amplitude pattern")
    q.add_argument("input")
    q.add_argument("--pattern", default="000,011,101,110,111")
    q.add_argument("--grid", type=_grid_arg, default=48)
    q.add_argument("--seed", type=int)
    q.add_argument("--verify-stability", action="store_true")
    q.set_defaults(func=cmd_oracle)

    q = sub.add_parser("equiv", help="brute-force local orthogonal equivalence of two states")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--grid", type=_grid_arg, default=48)
    q.add_argument("--seed", type=int)
    q.add_argument("--verify-stability", action="store_true")
    q.set_defaults(func=cmd_equiv)

    q = sub.add_parser("random", help="emit a reproducible random state file")
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_random)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
