"""Fixed-precision output encoders.

Floats are written with 9 significant digits so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import json
from functools import lru_cache

import numpy as np

from .core import PressingResult

CSV_HEADER = ("frame_id,timestamp_s,mode,defending_side,defender_id,target_id,"
              "tti,prob,total_pressure,carrier_id,flag")


def fmt(x: float) -> str:
    return "%.9g" % x


@lru_cache(maxsize=256)
def _vector_template(n: int) -> str:
    return "[" + ",".join(["%.9g"] * n) + "]"


@lru_cache(maxsize=256)
def _matrix_template(m: int, n: int) -> str:
    return "[" + ",".join([_vector_template(n)] * m) + "]"


def _floats(values) -> str:
    values = values.tolist() if isinstance(values, np.ndarray) else list(values)
    return _vector_template(len(values)) % tuple(values)


def _matrix(m: np.ndarray) -> str:
    rows, cols = m.shape
    return _matrix_template(rows, cols) % tuple(m.ravel().tolist())


def _ids(ids) -> str:
    return json.dumps(list(ids), separators=(",", ":"))


def manifest_line(manifest: dict) -> str:
    return json.dumps({"manifest": manifest}, sort_keys=True, separators=(",", ":"))


@lru_cache(maxsize=64)
def _record_template(m: int, n: int, no_carrier: bool) -> str:
    tail = ',"no_carrier":true}' if no_carrier else "}"
    return ('{"frame_id":%d,"defending_side":%s,"defender_ids":%s,"target_ids":%s,'
            '"tti":' + _matrix_template(m, n) +
            ',"prob":' + _matrix_template(m, n) +
            ',"total_pressure":' + _vector_template(n) +
            ',"carrier_id":%s,"timestamp_s":%.9g,"mode":%s' + tail)


@lru_cache(maxsize=1024)
def _json(value) -> str:
    return json.dumps(list(value) if isinstance(value, tuple) else value, separators=(",", ":"))


def result_to_jsonl(r: PressingResult) -> str:
    m, n = r.prob_matrix.shape
    values = np.concatenate([r.tti_matrix.ravel(), r.prob_matrix.ravel(), r.total_pressure]).tolist()
    return _record_template(m, n, r.no_carrier) % (
        r.frame_id, _json(r.defending_side), _json(r.defender_ids), _json(r.target_ids),
        *values, _json(r.carrier_id), r.timestamp_s, _json(r.mode))


def error_to_jsonl(frame_id: int, timestamp_s: float, side: str, mode: str, message: str) -> str:
    return json.dumps({"frame_id": frame_id, "defending_side": side, "timestamp_s": float(fmt(timestamp_s)),
                       "mode": mode, "error": message}, separators=(",", ":"))


def _csv_field(s) -> str:
    if s is None:
        return ""
    s = str(s)
    if any(c in s for c in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def result_to_csv(r: PressingResult) -> str:
    head = "%d,%s,%s,%s," % (r.frame_id, fmt(r.timestamp_s), r.mode, r.defending_side)
    carrier = _csv_field(r.carrier_id)
    if r.no_carrier or not r.defender_ids or not r.target_ids:
        return head + ",,,,,%s,%s\n" % (carrier, "no_carrier" if r.no_carrier else "empty")
    tti = r.tti_matrix.tolist()
    prob = r.prob_matrix.tolist()
    total = r.total_pressure.tolist()
    targets = [_csv_field(t) for t in r.target_ids]
    lines = []
    for i, d in enumerate(r.defender_ids):
        d = _csv_field(d)
        for j, t in enumerate(targets):
            lines.append("%s%s,%s,%.9g,%.9g,%.9g,%s,\n" % (head, d, t, tti[i][j], prob[i][j], total[j], carrier))
    return "".join(lines)


def error_to_csv(frame_id: int, timestamp_s: float, side: str, mode: str, message: str) -> str:
    return "%d,%s,%s,%s,,,,,,,%s\n" % (frame_id, fmt(timestamp_s), mode, side, _csv_field("error: " + message))
