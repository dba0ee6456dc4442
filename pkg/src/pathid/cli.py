"""Command-line interface.

Commands: simulate, sweep, fit, graph, verify.  JSON reports are printed
to stdout with sorted keys and written unchanged to --json when given, so
repeated runs with the same flags are byte-identical; progress and timing
go to stderr.  Exit codes: 0 ok, 1 verification failure, 2 parse error,
3 evolution error, 4 degenerate fit data, 5 graph error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import detection, fileio, graphmatch, verify
from .engine import Scenario, SweepSpec, build_scenario, evolve, scenario_names, sweep
from .errors import DegenerateDataError, EvolutionError, FileFormatError, GraphError, PathIdError
from .fock import DEFAULT_EPS_AMP, DEFAULT_N_MAX, FockState

DEFAULT_SEED = 12345

EXIT_CODES = (
    (FileFormatError, 2),
    (EvolutionError, 3),
    (DegenerateDataError, 4),
    (GraphError, 5),
)


def _default_n_max() -> int:
    raw = os.environ.get("PATHID_NMAX")
    if raw is None:
        return DEFAULT_N_MAX
    try:
        return int(raw)
    except ValueError:
        raise FileFormatError(f"PATHID_NMAX={raw!r} is not an integer") from None


def _add_common(parser: argparse.ArgumentParser, *, with_source: bool = True) -> None:
    if with_source:
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument("--scenario", choices=scenario_names(), help="built-in scenario name")
        group.add_argument("--circuit", metavar="FILE", help="circuit JSON file")
        parser.add_argument("--set", dest="bindings", action="append", default=[],
                            metavar="NAME=ANGLE", help="bind a phase parameter (repeatable); "
                            "angles accept radians or pi forms like pi/4")
        parser.add_argument("--g", type=float, default=None, help="override the scenario pair-source gain")
        parser.add_argument("--order", type=int, default=None,
                            help="override the perturbative expansion order of a scenario")
        parser.add_argument("--input", default=None, metavar="OCCS",
                            help="comma-separated input occupations (circuit files only)")
    parser.add_argument("--nmax", type=int, default=None,
                        help=f"total photon cap (default {DEFAULT_N_MAX}, or PATHID_NMAX)")
    parser.add_argument("--eps", type=float, default=DEFAULT_EPS_AMP, help="amplitude prune threshold")
    parser.add_argument("--json", metavar="FILE", default=None, help="also write the JSON report here")
    parser.add_argument("--timing", action="store_true", help="include wall-clock time in the report")


def _parse_bindings(pairs: list[str]) -> dict[str, float]:
    bindings: dict[str, float] = {}
    for item in pairs:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise FileFormatError(f"--set needs NAME=ANGLE, got {item!r}")
        bindings[name.strip()] = fileio.parse_angle(value.strip())
    return bindings


def _scenario_options(args) -> dict:
    options = {}
    if args.g is not None:
        options["g"] = args.g
    if args.order is not None:
        options["order"] = args.order
    return options


def _load_source(args) -> tuple[Scenario | None, "object", FockState, dict[str, float], dict]:
    """Resolve --scenario/--circuit into (scenario, circuit, input, bindings, meta)."""
    user = _parse_bindings(args.bindings)
    if args.scenario:
        scenario = build_scenario(args.scenario, **_scenario_options(args))
        bindings = scenario.resolve_bindings(user)
        initial = scenario.input_state
        if args.input is not None:
            raise FileFormatError("--input applies to --circuit runs; scenarios fix their input state")
        meta = {"scenario": args.scenario}
        return scenario, scenario.circuit, initial, bindings, meta
    circuit = fileio.circuit_from_json(fileio.load_json(args.circuit))
    if args.input is None:
        initial = FockState((0,) * len(circuit.registry))
    else:
        try:
            initial = FockState(tuple(int(x) for x in args.input.split(",")))
        except ValueError as exc:
            raise FileFormatError(f"bad --input {args.input!r}: {exc}") from exc
    meta = {"circuit_file": args.circuit}
    return None, circuit, initial, bindings_from_file(circuit, user), meta


def bindings_from_file(circuit, user: dict[str, float]) -> dict[str, float]:
    required = circuit.parameter_names()
    unknown = sorted(set(user) - required)
    if unknown:
        raise EvolutionError(f"unknown parameters for this circuit: {', '.join(unknown)}")
    return {name: user.get(name, 0.0) for name in sorted(required)}


def _emit(report: dict, args, started: float) -> None:
    if args.timing:
        report["elapsed_s"] = time.perf_counter() - started
    text = fileio.dump_json(report)
    sys.stdout.write(text)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fp:
            fp.write(text)


def _state_report(state) -> dict:
    return {
        "norm2": state.norm2(),
        "basis_probabilities": {
            ",".join(str(n) for n in fock.occ): abs(amp) ** 2 for fock, amp in state.items()
        },
    }


# -- commands -------------------------------------------------------------------


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    scenario, circuit, initial, bindings, meta = _load_source(args)
    n_max = args.nmax if args.nmax is not None else _default_n_max()
    result = evolve(circuit, initial, bindings, n_max=n_max, eps_amp=args.eps)
    if args.dump_circuit:
        with open(args.dump_circuit, "w", encoding="utf-8") as fp:
            fp.write(fileio.dump_json(fileio.circuit_to_json(circuit)))
    report = {
        "version": fileio.FILE_VERSION,
        "command": "simulate",
        **meta,
        "bindings": bindings,
        "n_max": n_max,
        **_state_report(result.state),
        "truncation": {"drops": result.truncation_drops, "leaked_norm2": result.leaked_norm2},
    }
    if scenario is not None:
        report["pattern_probabilities"] = {
            label: detection.probability(result.state, pattern)
            for label, pattern in sorted(scenario.patterns.items())
        }
    _emit(report, args, started)
    return 0


def _sweep_patterns(args, scenario: Scenario | None) -> dict[str, detection.DetectionPattern]:
    if args.pattern:
        return dict(fileio.parse_pattern_arg(p) for p in args.pattern)
    if scenario is not None:
        return dict(scenario.patterns)
    raise FileFormatError("circuit-file sweeps need at least one --pattern label=mode:count,...")


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    scenario, circuit, initial, bindings, meta = _load_source(args)
    n_max = args.nmax if args.nmax is not None else _default_n_max()
    patterns = _sweep_patterns(args, scenario)
    parameter = args.param or (scenario.sweep_parameter if scenario else None)
    if not parameter:
        raise EvolutionError("no sweep parameter: pass --param")
    start = fileio.parse_angle(args.start)
    stop = fileio.parse_angle(args.stop)

    if scenario is not None:
        values = SweepSpec(parameter, start, stop, args.points).values()
        user = _parse_bindings(args.bindings)
        points = scenario.sweep_values(parameter, values, user, n_max=n_max, eps_amp=args.eps)
    else:
        spec = SweepSpec(parameter, start, stop, args.points, base=bindings)
        points = sweep(circuit, initial, spec, n_max=n_max, eps_amp=args.eps)

    rows = []
    series: dict[str, list[float]] = {label: [] for label in sorted(patterns)}
    for value, state in points:
        for label in sorted(patterns):
            p = detection.probability(state, patterns[label])
            series[label].append(p)
            rows.append((value, label, p))

    include_counts = args.shots is not None
    count_series: dict[str, list[int]] = {}
    if include_counts:
        seed = args.seed if args.seed is not None else DEFAULT_SEED
        counts = detection.poisson_counts([r[2] for r in rows], args.shots, seed)
        rows = [(phase, label, p, c) for (phase, label, p), c in zip(rows, counts)]
        for _, label, _, c in rows:
            count_series.setdefault(label, []).append(c)

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fp:
            fp.write(fileio.format_sweep_csv(rows, include_counts))

    if args.dump_states:
        dump = {
            "version": fileio.FILE_VERSION,
            "parameter": parameter,
            "points": [
                {
                    "value": value,
                    "amplitudes": {
                        ",".join(str(n) for n in fock.occ): [amp.real, amp.imag]
                        for fock, amp in state.items()
                    },
                }
                for value, state in points
            ],
        }
        with open(args.dump_states, "w", encoding="utf-8") as fp:
            fp.write(fileio.dump_json(dump))

    report = {
        "version": fileio.FILE_VERSION,
        "command": "sweep",
        **meta,
        "parameter": parameter,
        "start": start,
        "stop": stop,
        "points": args.points,
        "patterns": {label: str(p) for label, p in sorted(patterns.items())},
        "probability_range": {
            label: [min(vals), max(vals)] for label, vals in series.items()
        },
    }
    if include_counts:
        report["shots"] = args.shots
        report["seed"] = args.seed if args.seed is not None else DEFAULT_SEED
        report["count_range"] = {label: [min(c), max(c)] for label, c in sorted(count_series.items())}
    if args.csv:
        report["csv"] = args.csv
    _emit(report, args, started)
    return 0


def cmd_fit(args) -> int:
    started = time.perf_counter()
    series = fileio.read_sweep_csv_path(args.csv_file)
    fits: dict[str, dict] = {}
    failures: dict[str, str] = {}
    for label, rows in sorted(series.items()):
        samples = [(phase, counts if counts is not None else prob) for phase, prob, counts in rows]
        try:
            fit = detection.fit_fringe(samples)
        except DegenerateDataError as exc:
            failures[label] = str(exc)
            continue
        fits[label] = {
            "visibility": fit.visibility,
            "phi_c": fit.phi_c,
            "period": fit.period,
            "offset": fit.offset,
            "residual_rms": fit.residual_rms,
        }
    report = {
        "version": fileio.FILE_VERSION,
        "command": "fit",
        "csv": args.csv_file,
        "fits": fits,
        "degenerate": failures,
    }
    _emit(report, args, started)
    if not fits:
        sys.stderr.write("fit: every pattern was degenerate\n")
        return 4
    return 0


def cmd_graph(args) -> int:
    started = time.perf_counter()
    graph = fileio.graph_from_json(fileio.load_json(args.graph_file))
    amplitudes = graphmatch.pair_amplitudes(graph)
    matchings = graphmatch.perfect_matchings(graph)
    distribution = graphmatch.normalized_distribution(amplitudes)
    report = {
        "version": fileio.FILE_VERSION,
        "command": "graph",
        "graph_file": args.graph_file,
        "vertices": list(graph.vertices),
        "matchings": [[graphmatch.pair_label(u, v) for u, v in matching] for matching in matchings],
        "pair_amplitudes": {label: [amp.real, amp.imag] for label, amp in sorted(amplitudes.items())},
        "distribution": distribution.probabilities,
    }
    if len(graph.vertices) == 4:
        quad = graphmatch.quad_amplitude(graph)
        report["quad_amplitude"] = [quad.real, quad.imag]
    if args.crosscheck:
        user = _parse_bindings(args.bindings)
        deviation = graphmatch.graph_vs_engine_crosscheck(graph, args.crosscheck, user or None)
        report["crosscheck"] = {"scenario": args.crosscheck, "l_infinity": deviation}
    _emit(report, args, started)
    return 0


def cmd_verify(args) -> int:
    started = time.perf_counter()
    results = verify.run_checks(args.filter)
    if not results:
        sys.stderr.write(f"verify: no checks match filter {args.filter!r}\n")
        return 1
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.name}: {result.detail}")
    all_passed = all(r.passed for r in results)
    report = {
        "version": fileio.FILE_VERSION,
        "command": "verify",
        "filter": args.filter,
        "all_passed": all_passed,
        "checks": [r.as_dict() for r in results],
    }
    if args.json:
        text = fileio.dump_json(report | ({"elapsed_s": time.perf_counter() - started} if args.timing else {}))
        with open(args.json, "w", encoding="utf-8") as fp:
            fp.write(text)
    return 0 if all_passed else 1


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathid",
        description="Truncated Fock-space simulator for networks of coherently pumped photon-pair sources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="evolve once and print pattern probabilities")
    _add_common(p_sim)
    p_sim.add_argument("--dump-circuit", metavar="FILE", default=None,
                       help="also write the wired circuit as a circuit JSON file")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="sweep one phase parameter and emit CSV")
    _add_common(p_sweep)
    p_sweep.add_argument("--param", default=None, help="parameter to sweep (scenario default otherwise)")
    p_sweep.add_argument("--start", default="0", help="sweep start angle (default 0)")
    p_sweep.add_argument("--stop", default="2pi", help="sweep stop angle, half-open (default 2pi)")
    p_sweep.add_argument("--points", type=int, default=24)
    p_sweep.add_argument("--pattern", action="append", default=[],
                         metavar="LABEL=SPEC", help="detection pattern like abcd=a:1,b:1,c:1,d:1 (repeatable)")
    p_sweep.add_argument("--csv", metavar="FILE", default=None, help="write the sweep CSV here")
    p_sweep.add_argument("--dump-states", metavar="FILE", default=None,
                         help="write per-point state amplitudes as JSON")
    p_sweep.add_argument("--shots", type=int, default=None, help="add Poisson counts at this shot rate")
    p_sweep.add_argument("--seed", type=int, default=None, help=f"counts RNG seed (default {DEFAULT_SEED})")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fit = sub.add_parser("fit", help="fit fringes in a sweep CSV")
    p_fit.add_argument("csv_file", help="CSV produced by the sweep command")
    _add_common(p_fit, with_source=False)
    p_fit.set_defaults(func=cmd_fit)

    p_graph = sub.add_parser("graph", help="perfect matchings and pair distribution of a graph file")
    p_graph.add_argument("graph_file", help="graph JSON file")
    p_graph.add_argument("--crosscheck", metavar="SCENARIO", default=None,
                         help="compare against the Fock engine distribution of this scenario")
    p_graph.add_argument("--set", dest="bindings", action="append", default=[],
                         metavar="NAME=ANGLE", help="bindings for the crosscheck scenario")
    _add_common(p_graph, with_source=False)
    p_graph.set_defaults(func=cmd_graph)

    p_verify = sub.add_parser("verify", help="run the built-in verification suite")
    p_verify.add_argument("--filter", default=None, help="run only checks whose name contains this substring")
    _add_common(p_verify, with_source=False)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PathIdError as exc:
        for kind, code in EXIT_CODES:
            if isinstance(exc, kind):
                sys.stderr.write(f"error: {exc}\n")
                return code
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
