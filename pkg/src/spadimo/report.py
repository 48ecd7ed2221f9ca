"""CSV ingestion and the JSON/CSV forms of explanation results."""

from dataclasses import dataclass, field
import csv
import hashlib
import io
import json
import math

import numpy as np

from . import __version__
from .errors import EmptyInput, ParseError
from .explain import FlaggedVariable, SpadimoReport, Termination, TraceEntry
from .robust import DataMatrix

_MISSING = {"", "na", "nan", "null", "none", "?"}


def _number(text):
    """Parsed float, or None for a missing or non-numeric cell."""
    cell = text.strip()
    if cell.lower() in _MISSING:
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _is_header(row):
    return any(_number(cell) is None and cell.strip().lower() not in _MISSING for cell in row)


@dataclass(frozen=True)
class LoadedData:
    data: DataMatrix
    source_lines: tuple  # file line number of each kept row
    dropped_lines: tuple = ()


def load_csv(source, drop_incomplete=False):
    """Read a comma-separated numeric table; a non-numeric first row is a header.

    ``source`` is a path or an open text stream. Rows with missing or
    non-numeric cells raise ParseError listing their line numbers, unless
    ``drop_incomplete`` is set, in which case they are skipped.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    rows = [(k + 1, r) for k, r in enumerate(csv.reader(io.StringIO(text)))
            if any(c.strip() for c in r)]
    if not rows:
        raise EmptyInput("input has no rows")
    names = None
    if _is_header(rows[0][1]):
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise EmptyInput("input has a header but no data rows")
    width = len(names) if names is not None else len(rows[0][1])
    ragged = [line for line, r in rows if len(r) != width]
    if ragged:
        raise ParseError(f"expected {width} fields on every row; ragged lines: "
                         + ", ".join(map(str, ragged)), ragged)
    values, kept, dropped = [], [], []
    for line, r in rows:
        parsed = [_number(c) for c in r]
        if any(v is None for v in parsed):
            dropped.append(line)
        else:
            values.append(parsed)
            kept.append(line)
    if dropped and not drop_incomplete:
        raise ParseError("missing or non-numeric cells on lines: "
                         + ", ".join(map(str, dropped)), dropped)
    if not values:
        raise EmptyInput("no complete data rows")
    return LoadedData(DataMatrix(np.array(values), names), tuple(kept), tuple(dropped))


def fingerprint(data):
    values = np.ascontiguousarray(data.values, dtype="<f8")
    return {
        "n": data.n,
        "p": data.p,
        "column_names": data.names(),
        "sha256": hashlib.sha256(values.tobytes()).hexdigest(),
    }


def _float(x):
    return None if x is None else float(x)


def report_to_dict(report, names):
    return {
        "case": report.case_index + 1,
        "terminated": report.terminated.value,
        "selected_eta": _float(report.selected_eta),
        "initial_outlyingness_sq": _float(report.initial_outlyingness_sq),
        "flagged": [
            {"column": f.column + 1, "name": names[f.column], "sign": f.sign,
             "coefficient": f.coefficient, "eta": f.eta}
            for f in report.flagged
        ],
        "trace": [
            {"eta": t.eta, "remaining": t.remaining, "df": t.df,
             "outlyingness_sq": _float(t.outlyingness_sq), "cutoff": _float(t.cutoff),
             "new_flags": [c + 1 for c in t.new_flags], "note": t.note}
            for t in report.trace
        ],
    }


def report_from_dict(d):
    flagged = [FlaggedVariable(f["column"] - 1, f["sign"], f["coefficient"], f["eta"])
               for f in d["flagged"]]
    trace = [TraceEntry(t["eta"], t["remaining"], t["df"], t["outlyingness_sq"], t["cutoff"],
                        tuple(c - 1 for c in t["new_flags"]), t["note"])
             for t in d["trace"]]
    return SpadimoReport(d["case"] - 1, flagged, d["selected_eta"], trace,
                         Termination(d["terminated"]), d["initial_outlyingness_sq"])


@dataclass
class ExplanationDocument:
    fingerprint: dict
    centers: list
    scales: list
    params: dict
    reports: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # {"case", "error", "message"}
    version: str = __version__

    def to_dict(self):
        names = self.fingerprint["column_names"]
        return {
            "version": self.version,
            "fingerprint": self.fingerprint,
            "standardization": {"centers": [float(c) for c in self.centers],
                                "scales": [float(s) for s in self.scales]},
            "params": self.params,
            "reports": [report_to_dict(r, names) for r in self.reports],
            "errors": self.errors,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            fingerprint=d["fingerprint"],
            centers=d["standardization"]["centers"],
            scales=d["standardization"]["scales"],
            params=d["params"],
            reports=[report_from_dict(r) for r in d["reports"]],
            errors=d["errors"],
            version=d["version"],
        )


def dumps(obj):
    """Stable JSON: sorted keys, shortest round-trip float repr, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def explanation_csv(doc):
    names = doc.fingerprint["column_names"]
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["case", "column", "name", "sign", "coefficient", "eta", "terminated"])
    for r in doc.reports:
        for f in r.flagged:
            out.writerow([r.case_index + 1, f.column + 1, names[f.column], f.sign,
                          repr(f.coefficient), repr(f.eta), r.terminated.value])
    return buf.getvalue()
