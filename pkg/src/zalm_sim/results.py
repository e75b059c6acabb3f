"""Result-file and herald-log writers."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence, TextIO

from .config import SimConfig, config_hash
from .engine import Metrics, TrialOutcome
from .quantum_core import BellKind

SCHEMA_VERSION = 1

RESULT_COLUMNS = (
    "schema_version", "param", "param_value", "n_trials", "seed",
    "herald_rate", "ebits_per_use", "avg_fidelity", "fidelity_stderr",
    *(f"n_{k.value}" for k in BellKind),
    "config_hash", "code_version",
)

HERALD_LOG_COLUMNS = ("trial_id", "bell_kind", "channel_index", "herald_time_ps")


def result_row(param: str, value: Any, metrics: Metrics, cfg: SimConfig) -> dict:
    from . import __version__

    row = {
        "schema_version": SCHEMA_VERSION,
        "param": param,
        "param_value": value,
        "n_trials": metrics.n_trials,
        "seed": cfg.seed,
        "herald_rate": metrics.herald_rate,
        "ebits_per_use": metrics.ebits_per_use,
        "avg_fidelity": metrics.avg_fidelity,
        "fidelity_stderr": metrics.fidelity_stderr,
    }
    for k in BellKind:
        row[f"n_{k.value}"] = metrics.bell_counts.get(k.value, 0)
    row["config_hash"] = config_hash(cfg)
    row["code_version"] = __version__
    return row


def _json_value(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, tuple):
        return list(v)
    return v


def render(rows: Sequence[dict], fmt: str) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION,
               "rows": [{k: _json_value(r[k]) for k in RESULT_COLUMNS} for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}; expected csv or json")


def read_results(text: str, fmt: str) -> list[dict]:
    if fmt == "json":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {doc.get('schema_version')}")
        return doc["rows"]
    return list(csv.DictReader(io.StringIO(text)))


def write_herald_log(outcomes: Iterable[TrialOutcome], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HERALD_LOG_COLUMNS)
    for o in outcomes:
        if o.heralded:
            w.writerow([o.trial_id, o.bell.value, o.channel_index, repr(o.herald_time_ps)])
