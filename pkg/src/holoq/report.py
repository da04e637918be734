"""Machine-readable result records (JSON and CSV)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np


def encode_matrix(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex).tolist()]


def decode_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


@dataclass
class ReportRecord:
    scheme: str
    parameters: dict = field(default_factory=dict)
    gate: np.ndarray | None = None
    closure_defect: float = math.nan
    dyn_phase_max: float = math.nan
    infidelity: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "scheme": self.scheme,
            "parameters": self.parameters,
            "gate": None if self.gate is None else encode_matrix(self.gate),
            "closure_defect": self.closure_defect,
            "dyn_phase_max": self.dyn_phase_max,
            "infidelity": self.infidelity,
        }
        if self.extra:
            d["extra"] = self.extra
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ReportRecord":
        gate = None if d.get("gate") is None else decode_matrix(d["gate"])
        return cls(d["scheme"], d.get("parameters", {}), gate, d.get("closure_defect", math.nan),
                   d.get("dyn_phase_max", math.nan), d.get("infidelity", {}), d.get("extra", {}))


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    if isinstance(obj, ReportRecord):
        obj = obj.to_dict()
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> ReportRecord:
    return ReportRecord.from_dict(json.loads(text))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else k, value[k], out)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out[prefix] = value


def rows_to_csv(rows: list[dict], header: list[str] | None = None) -> str:
    """CSV with 17 significant digits; nested values are flattened with dotted keys."""
    flat = []
    for r in rows:
        f: dict = {}
        _flatten("", r, f)
        flat.append(f)
    if header is None:
        header = []
        for f in flat:
            header.extend(k for k in f if k not in header)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for f in flat:
        w.writerow([_fmt(f.get(k, "")) for k in header])
    return buf.getvalue()
