"""File formats: circuit and graph JSON documents, sweep CSV, angle parsing.

Both document kinds carry a mandatory ``"version": "pathid/1"`` field.
Angles are accepted as plain radians or as symbolic multiples of pi
("pi", "-pi/4", "3pi/2").  Phase fields inside circuit files may also name
a declared parameter or spell out an affine combination
``{"const": ..., "terms": {"theta1": 2.0}}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from typing import Iterable, Mapping, Sequence, TextIO

from . import elements as el
from .detection import CountPredicate, DetectionPattern
from .engine import Circuit
from .errors import FileFormatError
from .fock import ModeRegistry
from .graphmatch import WeightedGraph

FILE_VERSION = "pathid/1"

_ANGLE_RE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d*)?))?$", re.IGNORECASE)


def parse_angle(value) -> float:
    """Radians from a number or a 'pi'-style string like '3pi/2'."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    text = str(value).strip()
    match = _ANGLE_RE.match(text)
    if match:
        sign = -1.0 if match.group(1) == "-" else 1.0
        coeff = float(match.group(2)) if match.group(2) else 1.0
        divisor = float(match.group(3)) if match.group(3) else 1.0
        if divisor == 0:
            raise FileFormatError(f"zero divisor in angle {value!r}")
        return sign * coeff * math.pi / divisor
    try:
        return float(text)
    except ValueError:
        raise FileFormatError(f"cannot parse angle {value!r}") from None


# -- phase expressions -------------------------------------------------------


def phase_to_json(expr: el.PhaseExpr):
    if not expr.terms:
        return expr.const
    if expr.const == 0.0 and len(expr.terms) == 1 and expr.terms[0][1] == 1.0:
        return expr.terms[0][0]
    return {"const": expr.const, "terms": {name: coeff for name, coeff in expr.terms}}


def phase_from_json(value, parameters: Sequence[str]) -> el.PhaseExpr:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return el.PhaseExpr(const=float(value))
    if isinstance(value, str):
        if value in parameters:
            return el.PhaseExpr.of(value)
        try:
            return el.PhaseExpr(const=parse_angle(value))
        except FileFormatError:
            raise FileFormatError(
                f"phase {value!r} is neither an angle nor a declared parameter "
                f"(declared: {sorted(parameters)})"
            ) from None
    if isinstance(value, Mapping):
        terms = {}
        for name, coeff in (value.get("terms") or {}).items():
            if name not in parameters:
                raise FileFormatError(f"phase term references undeclared parameter {name!r}")
            terms[str(name)] = float(coeff)
        const = parse_angle(value.get("const", 0.0))
        return el.PhaseExpr.combination(terms, const)
    raise FileFormatError(f"cannot parse phase value {value!r}")


# -- circuit documents ---------------------------------------------------------


def circuit_to_json(circuit: Circuit, default_gain: float | None = None) -> dict:
    elements = []
    for item in circuit.elements:
        if isinstance(item, el.PhaseShifter):
            elements.append({"type": "phase", "mode": item.mode, "phase": phase_to_json(item.phase)})
        elif isinstance(item, el.BeamSplitter):
            elements.append({
                "type": "beamsplitter",
                "modes": [item.mode1, item.mode2],
                "transmissivity": item.transmissivity,
            })
        elif isinstance(item, el.ModeSwap):
            elements.append({"type": "swap", "modes": [item.mode1, item.mode2]})
        elif isinstance(item, el.LossChannel):
            elements.append({
                "type": "loss",
                "mode": item.mode,
                "efficiency": item.efficiency,
                "loss_mode": item.loss_mode,
            })
        elif isinstance(item, el.PairSourcePerturbative):
            elements.append({
                "type": "pair_perturbative",
                "modes": [item.mode_a, item.mode_b],
                "gain": item.gain,
                "pump_phase": phase_to_json(item.pump_phase),
                "order": item.order,
            })
        elif isinstance(item, el.PairSourceExactSPDC):
            elements.append({
                "type": "pair_exact",
                "pump": item.pump_mode,
                "modes": [item.mode_a, item.mode_b],
                "coupling": item.coupling,
            })
        else:
            raise FileFormatError(f"unserializable element {item!r}")
    doc = {
        "version": FILE_VERSION,
        "modes": list(circuit.registry.labels),
        "model": circuit.model,
        "elements": elements,
        "parameters": sorted(circuit.parameter_names()),
    }
    if default_gain is not None:
        doc["g"] = default_gain
    return doc


def _two_modes(entry: Mapping, key: str = "modes") -> tuple[str, str]:
    modes = entry.get(key)
    if not isinstance(modes, list) or len(modes) != 2:
        raise FileFormatError(f"element {entry.get('type')!r} needs a two-entry {key!r} list")
    return str(modes[0]), str(modes[1])


def circuit_from_json(doc: Mapping) -> Circuit:
    if not isinstance(doc, Mapping):
        raise FileFormatError("circuit document must be a JSON object")
    version = doc.get("version")
    if version != FILE_VERSION:
        raise FileFormatError(f"unsupported or missing version {version!r} (expected {FILE_VERSION!r})")
    modes = doc.get("modes")
    if not isinstance(modes, list) or not modes:
        raise FileFormatError("circuit document needs a non-empty 'modes' list")
    model = doc.get("model", "perturbative")
    parameters = [str(p) for p in doc.get("parameters", [])]
    for name in parameters:
        try:
            parse_angle(name)
        except FileFormatError:
            continue
        raise FileFormatError(f"parameter name {name!r} would shadow an angle literal")
    default_gain = doc.get("g")

    def gain_of(entry: Mapping, key: str) -> float:
        value = entry.get(key, default_gain)
        if value is None:
            raise FileFormatError(f"element {entry.get('type')!r} needs {key!r} or a file-level 'g'")
        return float(value)

    elements: list[el.CircuitElement] = []
    for position, entry in enumerate(doc.get("elements", [])):
        if not isinstance(entry, Mapping) or "type" not in entry:
            raise FileFormatError(f"element {position} is not an object with a 'type'")
        kind = entry["type"]
        try:
            if kind == "phase":
                elements.append(el.PhaseShifter(str(entry["mode"]), phase_from_json(entry.get("phase", 0.0), parameters)))
            elif kind == "beamsplitter":
                m1, m2 = _two_modes(entry)
                elements.append(el.BeamSplitter(m1, m2, float(entry.get("transmissivity", 0.5))))
            elif kind == "swap":
                m1, m2 = _two_modes(entry)
                elements.append(el.ModeSwap(m1, m2))
            elif kind == "loss":
                elements.append(el.LossChannel(str(entry["mode"]), float(entry["efficiency"]), str(entry["loss_mode"])))
            elif kind == "pair_perturbative":
                m1, m2 = _two_modes(entry)
                elements.append(el.PairSourcePerturbative(
                    m1, m2, gain_of(entry, "gain"),
                    phase_from_json(entry.get("pump_phase", 0.0), parameters),
                    int(entry.get("order", 2)),
                ))
            elif kind == "pair_exact":
                m1, m2 = _two_modes(entry)
                elements.append(el.PairSourceExactSPDC(str(entry["pump"]), m1, m2, gain_of(entry, "coupling")))
            else:
                raise FileFormatError(f"unknown element type {kind!r} at position {position}")
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"bad element {position} ({kind!r}): {exc}") from exc

    try:
        circuit = Circuit(ModeRegistry(str(m) for m in modes), tuple(elements), model=str(model))
    except ValueError as exc:
        raise FileFormatError(str(exc)) from exc
    declared, referenced = set(parameters), set(circuit.parameter_names())
    if declared != referenced:
        raise FileFormatError(
            f"declared parameters {sorted(declared)} do not match referenced {sorted(referenced)}"
        )
    return circuit


# -- graph documents ---------------------------------------------------------


def weight_to_json(weight: complex) -> list[float]:
    w = complex(weight)
    return [w.real, w.imag]


def weight_from_json(value) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value))
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, Mapping):
        if "re" in value or "im" in value:
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        if "mod" in value:
            import cmath

            return float(value["mod"]) * cmath.exp(1j * parse_angle(value.get("arg", 0.0)))
    raise FileFormatError(f"cannot parse complex weight {value!r}")


def graph_to_json(graph: WeightedGraph) -> dict:
    return {
        "version": FILE_VERSION,
        "vertices": list(graph.vertices),
        "edges": [
            {"pair": [u, v], "weight": weight_to_json(w)}
            for (u, v), w in graph.edges.items()
        ],
    }


def graph_from_json(doc: Mapping) -> WeightedGraph:
    if not isinstance(doc, Mapping):
        raise FileFormatError("graph document must be a JSON object")
    if doc.get("version") != FILE_VERSION:
        raise FileFormatError(f"unsupported or missing version {doc.get('version')!r}")
    vertices = doc.get("vertices")
    if not isinstance(vertices, list) or not vertices:
        raise FileFormatError("graph document needs a non-empty 'vertices' list")
    edges = {}
    for position, entry in enumerate(doc.get("edges", [])):
        if not isinstance(entry, Mapping):
            raise FileFormatError(f"edge {position} is not an object")
        try:
            u, v = _two_modes(entry, key="pair")
            edges[(u, v)] = weight_from_json(entry["weight"])
        except KeyError as exc:
            raise FileFormatError(f"edge {position} missing field {exc}") from exc
    return WeightedGraph(tuple(str(v) for v in vertices), edges)


# -- generic JSON helpers -------------------------------------------------------


def load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return json.load(fp)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def dump_json(data) -> str:
    """Deterministic pretty JSON (sorted keys, trailing newline)."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


# -- detection patterns ---------------------------------------------------------


def parse_pattern(text: str) -> DetectionPattern:
    """Pattern from 'a:1,b:1,c:0' with '>=n' and 'any' predicates allowed."""
    constraints = {}
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise FileFormatError(f"bad pattern term {chunk!r} (expected mode:count)")
        mode, _, spec = chunk.partition(":")
        mode, spec = mode.strip(), spec.strip()
        try:
            if spec == "any":
                constraints[mode] = CountPredicate("any")
            elif spec.startswith(">="):
                constraints[mode] = CountPredicate("ge", int(spec[2:]))
            else:
                constraints[mode] = CountPredicate("eq", int(spec))
        except ValueError as exc:
            raise FileFormatError(f"bad pattern term {chunk!r}: {exc}") from exc
    if not constraints:
        raise FileFormatError(f"empty pattern {text!r}")
    return DetectionPattern.of(constraints)


def parse_pattern_arg(text: str) -> tuple[str, DetectionPattern]:
    """'label=a:1,b:1' -> (label, pattern)."""
    label, sep, body = str(text).partition("=")
    if not sep or not label.strip():
        raise FileFormatError(f"pattern argument {text!r} needs the form label=mode:count,...")
    return label.strip(), parse_pattern(body)


# -- sweep CSV -------------------------------------------------------------------

CSV_FIELDS = ("phase_rad", "pattern_id", "probability")


def write_sweep_csv(fp: TextIO, rows: Iterable[tuple], include_counts: bool = False) -> None:
    """Rows of (phase, pattern_id, probability[, counts]); full-precision floats."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_FIELDS + (("counts",) if include_counts else ()))
    for row in rows:
        phase, pattern_id, prob = row[0], row[1], row[2]
        out = [repr(float(phase)), str(pattern_id), repr(float(prob))]
        if include_counts:
            out.append(str(int(row[3])))
        writer.writerow(out)


def read_sweep_csv(fp: TextIO) -> dict[str, list[tuple[float, float, int | None]]]:
    """Per-pattern (phase, probability, counts) series, in file order."""
    reader = csv.DictReader(fp)
    if reader.fieldnames is None or not set(CSV_FIELDS) <= set(reader.fieldnames):
        raise FileFormatError(f"sweep CSV needs columns {CSV_FIELDS}")
    series: dict[str, list[tuple[float, float, int | None]]] = {}
    for line, row in enumerate(reader, start=2):
        try:
            phase = float(row["phase_rad"])
            prob = float(row["probability"])
            counts = int(row["counts"]) if row.get("counts") not in (None, "") else None
        except (TypeError, ValueError) as exc:
            raise FileFormatError(f"sweep CSV line {line}: {exc}") from exc
        series.setdefault(str(row["pattern_id"]), []).append((phase, prob, counts))
    if not series:
        raise FileFormatError("sweep CSV has no data rows")
    return series


def read_sweep_csv_path(path: str) -> dict[str, list[tuple[float, float, int | None]]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fp:
            return read_sweep_csv(fp)
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def format_sweep_csv(rows: Iterable[tuple], include_counts: bool = False) -> str:
    buffer = io.StringIO()
    write_sweep_csv(buffer, rows, include_counts)
    return buffer.getvalue()
