"""Lossless JSON/CSV serialization for every result type, with parse().

All floats are written with 17 significant digits so that a serialize ->
parse round trip reproduces each value bit for bit.  CSV output carries
the non-tabular parts of a result as ``# key: <json>`` comment lines
above the header; missing values in rows are written as ``NA``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import re

import numpy as np

from .analysis import CapacityReport, CompareResult, ScanSeries, SpacingStats
from .dho import CollapseReport
from .model import EnergyValue, ModelParams, Parity
from .solver import EnergyLevel, SolverOptions, Spectrum

__all__ = ["serialize", "parse", "to_record", "from_record"]

_FORMATS = ("json", "csv")


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _dumps(obj) -> str:
    """json.dumps with every float at 17 significant digits.

    The stock encoder hardwires float.__repr__, so floats are swapped
    for placeholder strings first and substituted back in one pass.
    """
    reps = []

    def conv(o):
        if isinstance(o, bool) or o is None or isinstance(o, (int, str)):
            return o
        if isinstance(o, float):
            reps.append(_fmt(o))
            return f"@@f{len(reps) - 1}@@"
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        raise TypeError(f"cannot serialize {type(o).__name__}")

    text = json.dumps(conv(obj), indent=2)
    return re.sub(r'"@@f(\d+)@@"', lambda m: reps[int(m.group(1))], text)


def _params_dict(p: ModelParams) -> dict:
    return {"kappa": p.kappa, "delta": p.delta, "omega": p.omega}


def _params_from(d: dict) -> ModelParams:
    return ModelParams(d["kappa"], d["delta"], d["omega"])


def _options_dict(o: SolverOptions) -> dict:
    return dataclasses.asdict(o)


def _options_from(d: dict) -> SolverOptions:
    return SolverOptions(**d)


def to_record(result) -> dict:
    """Plain tagged dict for one result object.

    The record has a ``type`` tag, a ``meta`` mapping of everything
    non-tabular, and ``columns``/``rows`` for the tabular part.
    """
    if isinstance(result, Spectrum):
        meta = {
            "params": _params_dict(result.params),
            "variable": result.variable,
            "options": _options_dict(result.options),
        }
        cols = ["index", "parity", "epsilon", "x", "zeta", "energy",
                "bracket_lo", "bracket_hi", "residual", "n_trunc", "stable"]
        rows = [
            [lv.index, str(lv.parity), lv.value.epsilon, lv.value.x(result.params),
             lv.value.zeta(result.params), lv.value.energy(result.params),
             lv.bracket[0], lv.bracket[1], lv.residual, lv.n_trunc, lv.stable]
            for lv in result.levels
        ]
        return {"type": "spectrum", "meta": meta, "columns": cols, "rows": rows}
    if isinstance(result, ScanSeries):
        meta = {
            "variable": result.variable,
            "label": result.label,
            "poles": [float(p) for p in result.poles],
        }
        rows = [[float(t), None if math.isnan(v) else float(v)]
                for t, v in zip(result.t, result.values)]
        return {"type": "scan", "meta": meta,
                "columns": ["t", "F"], "rows": rows}
    if isinstance(result, SpacingStats):
        meta = {
            "count": result.count,
            "mean": result.mean,
            "min": result.min,
            "max": result.max,
            "histogram": [int(h) for h in result.histogram],
            "bin_edges": [float(e) for e in result.bin_edges],
        }
        rows = [[float(s)] for s in result.spacings]
        return {"type": "spacing_stats", "meta": meta,
                "columns": ["spacing"], "rows": rows}
    if isinstance(result, CapacityReport):
        meta = {
            "params": _params_dict(result.params),
            "parity": str(result.parity),
            "n_ceiling": result.n_ceiling,
            "budget": result.budget,
            "first_failure": result.first_failure,
        }
        rows = [[result.levels_computed, result.elapsed]]
        return {"type": "capacity", "meta": meta,
                "columns": ["levels_computed", "elapsed"], "rows": rows}
    if isinstance(result, CompareResult):
        meta = {
            "params": _params_dict(result.params),
            "dev_parity_schweber": result.dev_parity_schweber,
            "dev_parity_braak": result.dev_parity_braak,
            "dev_schweber_braak": result.dev_schweber_braak,
        }
        rows = [
            [k, float(a), float(b), float(c)]
            for k, (a, b, c) in enumerate(zip(
                result.zeta_parity, result.zeta_schweber, result.zeta_braak))
        ]
        cols = ["index", "zeta_parity", "zeta_schweber", "zeta_braak"]
        return {"type": "compare", "meta": meta, "columns": cols, "rows": rows}
    if isinstance(result, CollapseReport):
        meta = {"l": result.l, "kappa": result.kappa, "n_max": result.n_max}
        rows = [[result.spectral_decays, result.rel_dev_at_nmax,
                 result.off_spectrum_grows]]
        cols = ["spectral_decays", "rel_dev_at_nmax", "off_spectrum_grows"]
        return {"type": "collapse", "meta": meta, "columns": cols, "rows": rows}
    raise TypeError(f"no serialization for {type(result).__name__}")


def from_record(record: dict):
    """Rebuild the result object for a record produced by to_record."""
    kind = record["type"]
    meta = record["meta"]
    rows = record["rows"]
    if kind == "spectrum":
        params = _params_from(meta["params"])
        levels = tuple(
            EnergyLevel(
                index=int(r[0]),
                parity=Parity.from_string(r[1]),
                value=EnergyValue(float(r[2])),
                bracket=(float(r[6]), float(r[7])),
                residual=float(r[8]),
                n_trunc=int(r[9]),
                stable=bool(r[10]),
            )
            for r in rows
        )
        return Spectrum(params=params, levels=levels,
                        variable=meta["variable"],
                        options=_options_from(meta["options"]))
    if kind == "scan":
        t = np.array([r[0] for r in rows], dtype=float)
        vals = np.array([math.nan if r[1] is None else r[1] for r in rows])
        return ScanSeries(variable=meta["variable"], label=meta["label"],
                          t=t, values=vals,
                          poles=np.asarray(meta["poles"], dtype=float))
    if kind == "spacing_stats":
        return SpacingStats(
            spacings=np.array([r[0] for r in rows], dtype=float),
            histogram=np.asarray(meta["histogram"], dtype=int),
            bin_edges=np.asarray(meta["bin_edges"], dtype=float),
            count=int(meta["count"]),
            mean=float(meta["mean"]),
            min=float(meta["min"]),
            max=float(meta["max"]),
        )
    if kind == "capacity":
        (levels_computed, elapsed), = rows
        failure = meta["first_failure"]
        if failure is not None:
            failure = dict(failure)
        return CapacityReport(
            params=_params_from(meta["params"]),
            parity=Parity.from_string(meta["parity"]),
            levels_computed=int(levels_computed),
            n_ceiling=int(meta["n_ceiling"]),
            elapsed=float(elapsed),
            budget=float(meta["budget"]),
            first_failure=failure,
        )
    if kind == "compare":
        cols = list(zip(*rows)) if rows else [[], [], [], []]
        return CompareResult(
            params=_params_from(meta["params"]),
            zeta_parity=np.asarray(cols[1], dtype=float),
            zeta_schweber=np.asarray(cols[2], dtype=float),
            zeta_braak=np.asarray(cols[3], dtype=float),
            dev_parity_schweber=float(meta["dev_parity_schweber"]),
            dev_parity_braak=float(meta["dev_parity_braak"]),
            dev_schweber_braak=float(meta["dev_schweber_braak"]),
        )
    if kind == "collapse":
        (decays, rel_dev, grows), = rows
        return CollapseReport(
            l=int(meta["l"]),
            kappa=float(meta["kappa"]),
            n_max=int(meta["n_max"]),
            spectral_decays=bool(decays),
            rel_dev_at_nmax=float(rel_dev),
            off_spectrum_grows=bool(grows),
        )
    raise ValueError(f"unknown record type {kind!r}")


def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


def _uncell(s: str):
    if s == "NA":
        return None
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def serialize(result, fmt: str = "json") -> str:
    """Render a result object as a JSON or CSV string."""
    if fmt not in _FORMATS:
        raise ValueError(f"format must be one of {_FORMATS}")
    record = to_record(result)
    if fmt == "json":
        return _dumps(record) + "\n"
    buf = io.StringIO()
    buf.write(f"# type: {_dumps(record['type'])}\n")
    for key, val in record["meta"].items():
        blob = " ".join(line.strip() for line in _dumps(val).splitlines())
        buf.write(f"# {key}: {blob}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(record["columns"])
    for row in record["rows"]:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse(text: str):
    """Inverse of serialize for both formats; returns the result object."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return from_record(json.loads(text))
    meta = {}
    kind = None
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, blob = line[2:].partition(": ")
            if key == "type":
                kind = json.loads(blob)
            else:
                meta[key] = json.loads(blob)
        elif line.strip():
            body.append(line)
    if kind is None:
        raise ValueError("missing '# type:' comment line")
    reader = csv.reader(io.StringIO("\n".join(body)))
    table = list(reader)
    columns, rows = table[0], [[_uncell(c) for c in r] for r in table[1:]]
    return from_record({"type": kind, "meta": meta,
                        "columns": columns, "rows": rows})
