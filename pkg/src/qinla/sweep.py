"""
Parameter sweeps and figure presets.

A sweep varies one of ``g``, ``n_s``, ``m_probes`` or ``a`` and evaluates a
list of protocols at every axis value. Points outside the physical region are
kept as rows carrying a skip reason, so a sweep always returns one row per
(axis value, protocol). Output is a CSV plus a sidecar JSON with metadata.

CSV columns::

    axis,protocol,probability,log_probability,exponent_per_use,s_star,physical,skip_reason
"""

import csv
import datetime
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import jsonschema
import numpy as np

from . import __version__
from .bounds import Protocol, evaluate
from .errors import DomainError, PhysicalityViolation, QinlaError
from .nla import NlaConfig, g_max, ns_max
from .states import QiScenario

__all__ = [
    "CSV_COLUMNS",
    "SWEEP_SCHEMA",
    "SweepSpec",
    "SweepRow",
    "run_sweep",
    "write_sweep",
    "load_presets",
    "run_figure",
    "FIGURES",
]

CSV_COLUMNS = (
    "axis",
    "protocol",
    "probability",
    "log_probability",
    "exponent_per_use",
    "s_star",
    "physical",
    "skip_reason",
)

FIGURES = ("fig2", "fig3", "fig4", "fig5")

_number_or_gmax = {"oneOf": [{"type": "number"}, {"const": "gmax"}]}

SWEEP_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "qinla sweep configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "protocols": {
            "type": "array",
            "items": {"enum": [p.value for p in Protocol]},
            "minItems": 1,
        },
        "n_s": {"type": "number", "minimum": 0},
        "n_b": {"type": "number", "minimum": 0},
        "kappa": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "m_probes": {"type": "integer", "minimum": 1},
        "g": _number_or_gmax,
        "a": {"type": "number", "minimum": 1},
        "axis": {"enum": ["g", "n_s", "m_probes", "a"]},
        "start": _number_or_gmax,
        "stop": _number_or_gmax,
        "points": {"type": "integer", "minimum": 2},
        "scale": {"enum": ["linear", "log"]},
        "ns_policy": {"enum": ["fixed", "local_max_fraction"]},
        "ns_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
    "required": ["axis", "start", "stop"],
}


@dataclass(frozen=True)
class SweepSpec:
    """One sweep. ``g``, ``start`` and ``stop`` accept ``"gmax"``, resolved
    from ``kappa`` and ``epsilon = 2 n_b / kappa``."""

    axis: str
    start: Union[float, str]
    stop: Union[float, str]
    name: str = "sweep"
    protocols: tuple = ("qi_nla", "cs_nla")
    n_s: float = 0.1
    n_b: float = 0.1
    kappa: float = 0.2
    m_probes: int = 100
    g: Union[float, str] = 1.0
    a: float = 1.0
    points: int = 41
    scale: str = "linear"
    ns_policy: str = "fixed"
    ns_fraction: float = 0.99

    @classmethod
    def from_mapping(cls, mapping):
        try:
            jsonschema.validate(dict(mapping), SWEEP_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise DomainError(f"invalid sweep configuration: {exc.message}") from None
        data = dict(mapping)
        if "protocols" in data:
            data["protocols"] = tuple(data["protocols"])
        spec = cls(**data)
        spec.axis_values()
        return spec

    def to_dict(self):
        out = asdict(self)
        out["protocols"] = list(self.protocols)
        return out

    def replace(self, **changes):
        data = self.to_dict()
        data.update({k: v for k, v in changes.items() if v is not None})
        return SweepSpec.from_mapping(data)

    def g_max(self):
        return g_max(self.kappa, 2.0 * self.n_b / self.kappa)

    def _resolve(self, value):
        return self.g_max() if value == "gmax" else float(value)

    def axis_values(self):
        """Axis values in sweep order; identical endpoints collapse to one point."""
        start, stop = self._resolve(self.start), self._resolve(self.stop)
        if self.axis == "m_probes" and (start < 1 or stop < 1):
            raise DomainError("m_probes axis must start at >= 1")
        if self.scale == "log" and (start <= 0 or stop <= 0):
            raise DomainError("log-scaled axis needs positive endpoints")
        if start == stop:
            values = np.array([start])
        elif self.scale == "log":
            values = np.geomspace(start, stop, self.points)
        else:
            values = np.linspace(start, stop, self.points)
        if self.axis == "m_probes":
            values = np.rint(values)
        return [float(v) for v in values]


@dataclass
class SweepRow:
    axis: float
    protocol: str
    probability: Optional[float] = None
    log_probability: Optional[float] = None
    exponent_per_use: Optional[float] = None
    s_star: Optional[float] = None
    physical: bool = True
    skip_reason: str = ""

    def csv_fields(self):
        def num(x):
            return "" if x is None else repr(float(x))

        return [
            num(self.axis),
            self.protocol,
            num(self.probability),
            num(self.log_probability),
            num(self.exponent_per_use),
            num(self.s_star),
            "true" if self.physical else "false",
            self.skip_reason,
        ]


def _reason(exc):
    return f"{type(exc).__name__}: {exc}"


def _point_inputs(spec, value):
    params = {
        "n_s": spec.n_s,
        "n_b": spec.n_b,
        "kappa": spec.kappa,
        "m_probes": spec.m_probes,
        "g": spec._resolve(spec.g),
        "a": spec.a,
    }
    params[spec.axis] = int(value) if spec.axis == "m_probes" else value
    if spec.ns_policy == "local_max_fraction":
        params["n_s"] = spec.ns_fraction * ns_max(params["n_b"], params["kappa"], params["g"])
    scenario = QiScenario(params["n_s"], params["n_b"], params["kappa"], params["m_probes"])
    return scenario, NlaConfig(params["g"], params["a"])


def evaluate_point(spec, value):
    """Rows for every protocol at one axis value."""
    try:
        scenario, nla = _point_inputs(spec, value)
    except QinlaError as exc:
        return [SweepRow(value, p, physical=False, skip_reason=_reason(exc)) for p in spec.protocols]
    rows = []
    for p in spec.protocols:
        try:
            res = evaluate(p, scenario, nla)
        except (PhysicalityViolation, DomainError) as exc:
            rows.append(SweepRow(value, p, physical=False, skip_reason=_reason(exc)))
            continue
        rows.append(
            SweepRow(value, p, res.probability, res.log_probability, res.exponent_per_use, res.s_star)
        )
    return rows


def _evaluate_args(args):
    return evaluate_point(*args)


def run_sweep(spec, workers=1):
    """Evaluate ``spec``; rows are ordered by axis value then protocol order.

    With ``workers > 1`` points are farmed out to a process pool; ordering is
    unaffected.
    """
    values = spec.axis_values()
    jobs = [(spec, v) for v in values]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate_args, jobs))
    else:
        chunks = [evaluate_point(*job) for job in jobs]
    return [row for chunk in chunks for row in chunk]


def write_sweep(spec, out_path, workers=1):
    """Run ``spec`` and write ``out_path`` (CSV) plus ``out_path.with_suffix('.json')``.

    Raises :class:`DomainError` if no point of the sweep is physical.
    """
    out_path = Path(out_path)
    t0 = time.perf_counter()
    rows = run_sweep(spec, workers)
    wall = time.perf_counter() - t0
    if not any(r.physical for r in rows):
        raise DomainError(f"sweep {spec.name!r} has no physical points")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_fields())
    meta = {
        "spec": spec.to_dict(),
        "resolved": {"g": spec._resolve(spec.g), "g_max": spec.g_max() if spec.n_b < spec.kappa else None},
        "axis_values": spec.axis_values(),
        "columns": list(CSV_COLUMNS),
        "rows": len(rows),
        "skipped": sum(not r.physical for r in rows),
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "wall_time_s": wall,
    }
    meta_path = out_path.with_suffix(".json")
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    return out_path, meta_path, rows


def load_presets():
    """Figure presets from the packaged ``presets.json``."""
    text = resources.files("qinla").joinpath("presets.json").read_text()
    raw = json.loads(text)
    return {name: [SweepSpec.from_mapping(panel) for panel in panels] for name, panels in raw.items()}


def run_figure(name, out_dir, workers=1):
    """Run every panel of a figure preset; returns the written CSV paths."""
    presets = load_presets()
    if name not in presets:
        raise DomainError(f"unknown figure {name!r}; choose from {sorted(presets)}")
    out_dir = Path(out_dir)
    return [write_sweep(spec, out_dir / f"{spec.name}.csv", workers)[0] for spec in presets[name]]
