import json
import math

import pytest

from cnaplan.cli import DEFAULTS, load_scenario, main, save_scenario, scenario_to_dict
from cnaplan.planner import count_sequences

from conftest import FOUR_AGENT


def scenario_doc(specs=FOUR_AGENT, **extra):
    doc = {
        "cna": {"start": [0, 0]},
        "agents": [
            {"id": i + 1, "start": list(start), "heading_rad": heading, "nu0": nu0}
            for i, (start, heading, nu0) in enumerate(specs)
        ],
    }
    doc.update(extra)
    return doc


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario_doc()))
    return path


def test_print_defaults(capsys):
    assert main(["print-defaults"]) == 0
    assert json.loads(capsys.readouterr().out) == DEFAULTS
    assert main(["--print-defaults"]) == 0
    assert DEFAULTS == {
        "M": 60, "T_max": 2000, "dt": 1, "v_c": 1, "v_a": 0.5,
        "nu_w": 1, "nu_c": 0.1, "nu_y": 10, "nu_G": 10,
    }


def test_plan_greedy(scenario_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["plan", str(scenario_file), "--weights", "G4", "--out", str(out)]) == 0
    summary = (out / "plan.txt").read_text()
    seq = next(l for l in summary.splitlines() if l.startswith("sequence:")).split(":")[1].split()
    assert 0 < len(seq) <= 5
    lines = [l for l in (out / "trace.csv").read_text().splitlines() if not l.startswith("#")]
    assert lines[0].split(",")[:4] == ["k", "cna_x", "cna_y", "nu_c"]
    assert len(lines[0].split(",")) == 4 + 3 * 4
    assert len(lines) - 1 == 2001
    events = (out / "events.csv").read_text().splitlines()
    assert len(events) == 1 + len(seq)
    cost = float(next(l for l in summary.splitlines() if l.startswith("cost_J_prime")).split(":")[1])
    cost_J = float(next(l for l in summary.splitlines() if l.startswith("cost_J:")).split(":")[1])
    assert cost_J == pytest.approx(2 * cost, rel=1e-14)


def test_plan_exhaustive(scenario_file, tmp_path):
    out = tmp_path / "ex"
    assert main(["plan", str(scenario_file), "--planner", "exhaustive", "--out", str(out)]) == 0
    assert "sequence: 2 0 1 3 4" in (out / "plan.txt").read_text()


def test_trace_precision(scenario_file, tmp_path):
    out = tmp_path / "p"
    main(["plan", str(scenario_file), "--out", str(out)])
    row = (out / "trace.csv").read_text().splitlines()[-1].split(",")
    # variances with fractional parts carry at least 12 significant digits
    digits = [len(f.replace(".", "").replace("-", "").lstrip("0")) for f in row[1:] if "." in f]
    assert digits and max(digits) >= 12


def test_malformed_heading(tmp_path, capsys):
    doc = scenario_doc()
    doc["agents"][2]["heading_rad"] = "north"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["plan", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "agents[2].heading_rad" in capsys.readouterr().err


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d["agents"][0].update(colour="red"), "agents[0]: unknown field(s) colour"),
        (lambda d: d.update(extra=1), "unknown field(s) extra"),
        (lambda d: d["agents"][1].update(heading_deg=3.0), "agents[1]: give exactly one"),
        (lambda d: d["agents"][0].pop("nu0"), "agents[0].nu0: missing"),
        (lambda d: d.update(params={"nu_w": -1}), "params"),
        (lambda d: d.update(params={"M": 2.5}), "params.M"),
    ],
)
def test_input_errors(tmp_path, capsys, mutate, fragment):
    doc = scenario_doc()
    mutate(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["plan", str(path)]) == 1
    assert fragment in capsys.readouterr().err


def test_json_syntax_error_reports_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "agents": [\n    {"id": 1,,}\n  ]\n}\n')
    assert main(["plan", str(path)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_exhaustive_budget_message(tmp_path, capsys):
    specs = [((50.0 * i, 30.0 * i), 0.1 * i, 100.0 + i) for i in range(1, 13)]
    path = tmp_path / "big.json"
    path.write_text(json.dumps(scenario_doc(specs)))
    assert main(["plan", str(path), "--planner", "exhaustive", "--out", str(tmp_path / "o")]) == 1
    assert str(count_sequences(13, 13)) in capsys.readouterr().err


def test_nothing_reachable_exit_2(tmp_path):
    doc = scenario_doc([((900.0, 0.0), 0.0, 500.0)], params={"T_max": 100})
    path = tmp_path / "far.json"
    path.write_text(json.dumps(doc))
    assert main(["plan", str(path), "--out", str(tmp_path / "o")]) == 2


def test_defaults_filled_with_notice(scenario_file, caplog):
    import logging

    with caplog.at_level(logging.INFO, logger="cnaplan"):
        sc = load_scenario(scenario_file)
    assert "params.nu_w not given" in caplog.text
    assert sc.noise.surface_steps == 60 and sc.t_max == 2000 and sc.agents[0].speed == 0.5


def test_heading_degrees(tmp_path):
    doc = scenario_doc([((100.0, 0.0), 0.0, 50.0)])
    doc["agents"][0].pop("heading_rad")
    doc["agents"][0]["heading_deg"] = 90.0
    path = tmp_path / "deg.json"
    path.write_text(json.dumps(doc))
    assert load_scenario(path).agents[0].heading == pytest.approx(math.pi / 2)


def test_round_trip(scenario_file, tmp_path):
    sc = load_scenario(scenario_file)
    path = tmp_path / "again.json"
    save_scenario(sc, path)
    again = load_scenario(path)
    assert again == sc
    assert scenario_to_dict(again) == scenario_to_dict(sc)


def test_zstar(capsys):
    assert main(["zstar", "--nu0", "100", "--nucna", "10"]) == 0
    out = dict(l.split(": ") for l in capsys.readouterr().out.strip().splitlines())
    assert float(out["Z*_continuous"]) == pytest.approx(960.136408724566, rel=1e-12)
    assert int(out["Z*_integer"]) == 960
    assert float(out["J_i_max"]) == 1100.0
    assert main(["zstar", "--nu0", "100", "--nucna", "1000"]) == 0
    out2 = dict(l.split(": ") for l in capsys.readouterr().out.strip().splitlines())
    assert float(out2["Z*_continuous"]) > float(out["Z*_continuous"])


def test_zstar_zero_process_noise(capsys):
    assert main(["zstar", "--nu0", "100", "--nucna", "10", "--nuw", "0"]) == 1
    assert "nuw" in capsys.readouterr().err


def test_usage_error():
    assert main(["plan"]) == 1
    assert main([]) == 1


def _mc_config(tmp_path, **kw):
    doc = {"n_values": [3, 4], "trials": 3, "seed": 7, "exhaustive_n_cap": 4}
    doc.update(kw)
    path = tmp_path / "mc.json"
    path.write_text(json.dumps(doc))
    return path


def test_mc_tables(tmp_path, monkeypatch):
    cfg = _mc_config(tmp_path)
    assert main(["mc", str(cfg), "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("CNAPLAN_WORKERS", "2")
    assert main(["mc", str(cfg), "--out", str(tmp_path / "b")]) == 0
    for name in ("trials.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = (tmp_path / "a" / "summary.csv").read_text()
    assert "# seed: 7" in summary and "# rng: numpy.random.PCG64" in summary
    rows = [l.split(",") for l in summary.splitlines() if not l.startswith(("#", "N,"))]
    assert len(rows) == 2 * 6
    by_n = {}
    for r in rows:
        by_n.setdefault(r[0], {})[r[1]] = float(r[3])
    for costs in by_n.values():
        for g in ("G1", "G2", "G3", "G4"):
            assert costs["exhaustive_best"] <= costs[g] <= costs["exhaustive_worst"]
    assert (tmp_path / "a" / "timing.csv").exists()


def test_mc_config_errors(tmp_path, capsys, monkeypatch):
    assert main(["mc", str(_mc_config(tmp_path, strategies=["spiral"]))]) == 1
    assert "strategies" in capsys.readouterr().err
    assert main(["mc", str(_mc_config(tmp_path, colour=1))]) == 1
    monkeypatch.setenv("CNAPLAN_WORKERS", "many")
    assert main(["mc", str(_mc_config(tmp_path))]) == 1
