import csv
import json

import numpy as np
import numpy.testing as npt
import pytest

from plspin import cli


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.main(list(args) + ["--output", str(out)])
    return code, out


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_verify_small_run_passes(tmp_path):
    code, out = _run(tmp_path, "verify", "--n", "2", "--samples", "2")
    assert code == 0
    rep = _report(out)
    assert rep["status"] == "PASS"
    assert all(c["status"] == "PASS" for c in rep["checks"])
    assert (out / "timing.json").exists()


def test_report_is_byte_identical_for_fixed_seed(tmp_path):
    code, out = _run(tmp_path, "rs", "--n", "3", "--samples", "20")
    assert code == 0
    first = {p.name: p.read_bytes() for p in out.iterdir() if p.name != "timing.json"}
    code, out = _run(tmp_path, "rs", "--n", "3", "--samples", "20")
    second = {p.name: p.read_bytes() for p in out.iterdir() if p.name != "timing.json"}
    assert first == second


def test_different_seed_changes_samples(tmp_path):
    _, a = _run(tmp_path, "rs", "--n", "2", "--samples", "3", "--seed", "1", name="a")
    _, b = _run(tmp_path, "rs", "--n", "2", "--samples", "3", "--seed", "2", name="b")
    assert (a / "rs.csv").read_bytes() != (b / "rs.csv").read_bytes()


def test_canned_flow_values(tmp_path):
    code, out = _run(tmp_path, "flow", "--example", "canned", "--t-max", "1", "--steps", "4")
    assert code == 0
    with open(out / "flow.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5
    last = rows[-1]
    t = float(last["t"])
    g11 = float(last["g_re_1_1"]) + 1j * float(last["g_im_1_1"])
    npt.assert_allclose(g11, np.exp(1.5j * t), atol=1e-14)
    npt.assert_allclose(float(last["tr_L1"]), 2.5)


def test_canned_reduced_flow_phase_rates(tmp_path):
    code, out = _run(tmp_path, "reduce-flow", "--n", "2", "--example", "canned", "--t-max", "0.5", "--steps", "10")
    assert code == 0
    rates = _report(out)["notes"]["phase_rates"]["data"]
    npt.assert_allclose(rates, [1.5, -1.5], rtol=1e-10)


def test_json_format_embeds_tables(tmp_path):
    code, out = _run(tmp_path, "rank", "--n", "2", "--samples", "3", "--format", "json")
    assert code == 0
    table = _report(out)["tables"]["rank"]
    assert len(table["rows"]) == 3
    assert not list(out.glob("*.csv"))


def test_scaling_single_eps_has_no_ratio_check(tmp_path):
    code, out = _run(tmp_path, "scaling", "--n", "2", "--samples", "1", "--eps", "0.001")
    rep = _report(out)
    names = [c["name"] for c in rep["checks"]]
    assert not any("ratio rule" in s for s in names)
    assert any("limit value" in s for s in names)
    with open(out / "scaling_H_0.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 1
    assert code == 0


def test_tightened_tolerance_fails(tmp_path):
    code, _ = _run(tmp_path, "flow", "--t-max", "1", "--steps", "4", "--tol-scale", "1e-10")
    assert code == 1


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "lab.cfg"
    cfg.write_text("# rank run\nn = 3\nsamples = 4\nseed = 7\n")
    code, out = _run(tmp_path, "rank", "--config", str(cfg), "--samples", "2")
    assert code == 0
    conf = _report(out)["config"]
    assert (conf["n"], conf["samples"], conf["seed"]) == (3, 2, 7)


@pytest.mark.parametrize("args", [["verify", "--n", "1"], ["verify", "--n", "9"], ["nonsense"],
                                  ["flow", "--format", "xml"], ["scaling", "--eps", "0.01,0.1"],
                                  ["reduce-flow", "--n", "3", "--example", "canned"]])
def test_usage_errors_exit_two(tmp_path, args):
    code, _ = _run(tmp_path, *args)
    assert code == 2


def test_bad_config_file_exits_two(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _ = _run(tmp_path, "rs", "--config", str(cfg))
    assert code == 2
