"""Experiment reports: scalars, series and verdicts, serialized deterministically."""
import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = 1


def plain(value):
    """JSON-ready copy of a value: fractions become "p/q" strings, numpy scalars become Python ones."""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, complex):
        return [plain(value.real), plain(value.imag)]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    return value


@dataclass
class Verdict:
    name: str
    passed: bool
    tolerance: str
    detail: str = ""


@dataclass
class ExperimentReport:
    name: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    scalars: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    def scalar(self, key, value):
        self.scalars[key] = value
        return value

    def add_series(self, key, points):
        """points: iterable of (scale_index, value)."""
        self.series[key] = [(int(k), v) for k, v in points]

    def tolerance(self, key, value):
        self.tolerances[key] = value

    def verdict(self, name, passed, tolerance, detail=""):
        if tolerance not in self.tolerances:
            raise KeyError(f"verdict {name!r} cites undefined tolerance {tolerance!r}")
        self.verdicts.append(Verdict(name, bool(passed), tolerance, detail))
        return bool(passed)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def failures(self):
        return [v for v in self.verdicts if not v.passed]

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.name,
            "params": plain(self.params),
            "seed": self.seed,
            "scalars": plain(self.scalars),
            "series": {k: [[i, plain(v)] for i, v in pts] for k, pts in self.series.items()},
            "tolerances": plain(self.tolerances),
            "verdicts": [{"name": v.name, "passed": v.passed, "tolerance": v.tolerance,
                          "detail": v.detail} for v in self.verdicts],
            "passed": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def series_csv(self, key):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale_index", "value"])
        for i, v in self.series[key]:
            w.writerow([i, json.dumps(plain(v))])
        return buf.getvalue()

    def merge(self, other, prefix):
        """Fold another report in, namespacing its keys with `prefix`."""
        for k, v in other.scalars.items():
            self.scalars[f"{prefix}.{k}"] = v
        for k, v in other.series.items():
            self.series[f"{prefix}.{k}"] = v
        for k, v in other.tolerances.items():
            self.tolerances[f"{prefix}.{k}"] = v
        for v in other.verdicts:
            self.verdicts.append(Verdict(f"{prefix}.{v.name}", v.passed, f"{prefix}.{v.tolerance}", v.detail))
        return self


def report_from_dict(doc):
    rep = ExperimentReport(doc["experiment"], doc.get("params", {}), doc.get("seed"))
    rep.scalars = dict(doc.get("scalars", {}))
    rep.series = {k: [(int(i), v) for i, v in pts] for k, pts in doc.get("series", {}).items()}
    rep.tolerances = dict(doc.get("tolerances", {}))
    rep.verdicts = [Verdict(v["name"], v["passed"], v["tolerance"], v.get("detail", ""))
                    for v in doc.get("verdicts", [])]
    return rep
