import csv
import io
import json

import numpy as np
import pytest

from helpers import random_frame
from pressing_intensity.core import ModelParams, PressingResult, frozen_array
from pressing_intensity.passlanes import no_carrier_result
from pressing_intensity.pressure import pressing_matrix
from pressing_intensity.serialization import (
    CSV_HEADER,
    error_to_csv,
    error_to_jsonl,
    fmt,
    manifest_line,
    result_to_csv,
    result_to_jsonl,
)

P = ModelParams()


def test_fmt_nine_significant_digits():
    assert fmt(0.1) == "0.1"
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(1e-30) == "1e-30"
    assert fmt(123456789012.0) == "1.23456789e+11"


def test_jsonl_record_parses_and_rounds(rng):
    r = pressing_matrix(random_frame(rng, owner="A03"), "home", P)
    obj = json.loads(result_to_jsonl(r))
    assert list(obj) == ["frame_id", "defending_side", "defender_ids", "target_ids", "tti", "prob",
                         "total_pressure", "carrier_id", "timestamp_s", "mode"]
    assert obj["defender_ids"] == list(r.defender_ids)
    assert obj["carrier_id"] == "A03"
    assert np.allclose(obj["prob"], r.prob_matrix, rtol=1e-8, atol=0)
    assert obj["tti"][2][3] == float(fmt(r.tti_matrix[2, 3]))


def test_no_carrier_jsonl(rng):
    r = no_carrier_result(random_frame(rng), "away")
    obj = json.loads(result_to_jsonl(r))
    assert obj["no_carrier"] is True and obj["prob"] == [] and obj["carrier_id"] is None


def test_error_records():
    obj = json.loads(error_to_jsonl(3, 0.12, "home", "players", "empty team"))
    assert obj == {"frame_id": 3, "defending_side": "home", "timestamp_s": 0.12, "mode": "players",
                   "error": "empty team"}
    row = next(csv.reader([error_to_csv(3, 0.12, "home", "players", "a, b")]))
    assert row[-1] == "error: a, b" and len(row) == len(CSV_HEADER.split(","))


def test_csv_long_rows(rng):
    r = pressing_matrix(random_frame(rng, n_home=3, n_away=4), "home", P)
    rows = list(csv.DictReader(io.StringIO(CSV_HEADER + "\n" + result_to_csv(r))))
    assert len(rows) == 3 * 5
    row = rows[6]
    i, j = divmod(6, 5)
    assert row["defender_id"] == r.defender_ids[i] and row["target_id"] == r.target_ids[j]
    assert float(row["prob"]) == float(fmt(r.prob_matrix[i, j]))
    assert float(row["total_pressure"]) == float(fmt(r.total_pressure[j]))


def test_csv_no_carrier_row(rng):
    rows = list(csv.reader([result_to_csv(no_carrier_result(random_frame(rng), "home"))]))
    assert rows[0][-1] == "no_carrier" and len(rows[0]) == 11


def test_csv_quotes_awkward_ids():
    r = PressingResult(0, "home", ('H,1',), ('A"1',), frozen_array(np.ones((1, 1))),
                       frozen_array(np.ones((1, 1))), frozen_array(np.ones(1)))
    row = next(csv.reader([result_to_csv(r)]))
    assert row[4:6] == ["H,1", 'A"1']


def test_manifest_line_sorted():
    assert manifest_line({"b": 1, "a": {"d": 2, "c": 3}}) == '{"manifest":{"a":{"c":3,"d":2},"b":1}}'
