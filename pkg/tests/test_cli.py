from __future__ import annotations

import json
import math

import numpy as np
import pytest

from qunion.cli import csv_text, main
from qunion.jsonio import channel_to_json, dumps, operator_to_json
from qunion.operators import identity_channel, max_entangled, pure_density


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if not p.name.endswith(".manifest.json")}


def _write(path, obj):
    path.write_text(dumps(obj))
    return str(path)


def test_verify_union_bound_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "o"
    code = main(["verify-union-bound", "--dim", "8", "--num-projectors", "4", "--trials", "50", "--seed", "7", "--out-dir", str(out)])
    assert code == 0
    lines = (out / "union_bound.csv").read_text().splitlines()
    assert lines[0].startswith("trial,dim,L,state,layout,c,lhs")
    assert len(lines) > 50
    manifest = json.loads((out / "verify-union-bound.manifest.json").read_text())
    assert manifest["master_seed"] == 7 and manifest["command"] == "verify-union-bound"
    assert set(manifest["outputs"]) == {"union_bound.csv", "union_bound.summary.json"}


def test_same_seed_gives_identical_bytes_across_thread_counts(tmp_path):
    args = ["verify-union-bound", "--trials", "40", "--seed", "3"]
    assert main(args + ["--out-dir", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b"), "--threads", "4"]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")
    assert main(["verify-union-bound", "--trials", "40", "--seed", "4", "--out-dir", str(tmp_path / "c")]) == 0
    assert _files(tmp_path / "a") != _files(tmp_path / "c")


def test_dh_json_bracket(tmp_path):
    r = _write(tmp_path / "r.json", operator_to_json(np.diag([0.5, 0.5])))
    s = _write(tmp_path / "s.json", operator_to_json(np.diag([0.9, 0.1])))
    assert main(["dh", "--rho", r, "--sigma", s, "--eps", "0.25", "--out-dir", str(tmp_path / "o")]) == 0
    out = json.loads((tmp_path / "o" / "dh.json").read_text())
    # greedy: take outcome 2 (ratio 5) fully, then 0.25/0.5 of outcome 1 -> beta = 0.1 + 0.45
    assert abs(out["lower"] + math.log2(0.55)) < 1e-9
    assert (tmp_path / "o" / out["witness_path"]).exists()


def test_dh_orthogonal_reports_inf_string(tmp_path):
    r = _write(tmp_path / "r.json", operator_to_json(np.diag([1.0, 0.0])))
    s = _write(tmp_path / "s.json", operator_to_json(np.diag([0.0, 1.0])))
    assert main(["dh", "--rho", r, "--sigma", s, "--eps", "0.1", "--out-dir", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "dh.json").read_text())["lower"] == "inf"


def test_second_order_curve_has_ten_rows(tmp_path):
    assert main(["second-order", "--triple", "1,1,1", "--eps", "0.5", "--n-range", "100:1000:100", "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "second_order.csv").read_text().splitlines()
    assert lines[0] == "n,lower_bound_bits,per_use_rate" and len(lines) == 11
    n, bits, rate = lines[-1].split(",")
    assert n == "1000" and abs(float(bits) / 1000 - float(rate)) < 1e-15


def test_second_order_below_threshold_rows_empty(tmp_path):
    assert main(["second-order", "--triple", "1,1,1", "--eps", "0.01", "--n-range", "1:2:1", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "second_order.csv").read_text().splitlines()[1] == "1,,"


def test_rate_modes(tmp_path):
    assert main(["rate", "--mode", "ea", "--info-bits", "10", "--eps", "0.1", "--eta", "0.05", "--out-dir", str(tmp_path / "a")]) == 0
    out = json.loads((tmp_path / "a" / "rate.json").read_text())
    assert abs(out["rate_bits_per_use"] - (10 - math.log2(160))) < 1e-12
    st = _write(tmp_path / "cq.json", operator_to_json(np.diag([0.5, 0, 0, 0.5])))
    ch = _write(tmp_path / "ch.json", channel_to_json(identity_channel(2)))
    args = ["rate", "--mode", "unassisted", "--state", st, "--dims", "2,2", "--channel", ch, "--eps", "0.5", "--eta", "0.2"]
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    assert json.loads((tmp_path / "b" / "rate.json").read_text())["method"] == "commuting"


def test_simulate_decoding_scenario(tmp_path):
    sc = {
        "channel": channel_to_json(identity_channel(2)),
        "resource": operator_to_json(pure_density(max_entangled(2))),
        "dims": [2, 2],
        "M": 2,
        "eps": 0.5,
        "eta": 0.2,
    }
    path = _write(tmp_path / "sc.json", sc)
    assert main(["simulate-decoding", "--scenario", path, "--out-dir", str(tmp_path / "o")]) == 0
    out = json.loads((tmp_path / "o" / "decoding.json").read_text())
    assert out["holds"] is True and len(out["per_message_error"]) == 2


def test_simulate_decoding_premise_violation_is_input_error(tmp_path):
    sc = {
        "channel": channel_to_json(identity_channel(2)),
        "resource": operator_to_json(pure_density(max_entangled(2))),
        "dims": [2, 2],
        "M": 2,
        "eps": 0.5,
        "eta": 0.2,
        "lambda": operator_to_json(np.zeros((4, 4))),
    }
    path = _write(tmp_path / "sc.json", sc)
    assert main(["simulate-decoding", "--scenario", path, "--out-dir", str(tmp_path / "o")]) == 1


def test_violation_exits_two_and_saves_counterexample(tmp_path, capsys):
    r = _write(tmp_path / "r.json", operator_to_json(np.full((2, 2), 0.5)))
    s = _write(tmp_path / "s.json", operator_to_json(np.diag([0.6, 0.4])))
    code = main(["tl-check", "--rho", r, "--sigma", s, "--thresh", str(1 / 0.6), "--out-dir", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "tl-check.counterexamples.json" in err
    assert (tmp_path / "o" / "tl-check.counterexamples.json").exists()


def test_usage_errors_exit_one(tmp_path):
    assert main(["no-such-command"]) == 1
    assert main(["dh", "--bogus"]) == 1
    assert main(["dh", "--out-dir", str(tmp_path)]) == 1
    assert main(["second-order", "--triple", "1,1", "--eps", "0.5", "--n-range", "1:2:1", "--out-dir", str(tmp_path)]) == 1


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 5, "seed": 9, "dim": 2}))
    assert main(["verify-lemmas", "--config", str(cfg), "--trials", "3", "--out-dir", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "verify-lemmas.manifest.json").read_text())
    assert manifest["config"]["trials"] == 3  # flag wins
    assert manifest["config"]["seed"] == 9  # config beats default
    assert manifest["master_seed"] == 9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"not_a_flag": 1}))
    assert main(["verify-lemmas", "--config", str(bad), "--out-dir", str(tmp_path / "p")]) == 1


def test_csv_formatting():
    text = csv_text([{"a": 0.1, "b": None, "c": True, "d": math.inf}], ["a", "b", "c", "d"])
    assert text == "a,b,c,d\n0.10000000000000001,,true,inf\n"
