import csv
import io
import json

import pytest

from hdrelay.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_capacity_examples(capsys):
    for model, m, expect in [("ternary", 1, 1.1389), ("binary", 1, 0.8295), ("binary", 3, 0.5)]:
        code, out, _ = run(capsys, "capacity", "--model", model, "--relays", str(m))
        assert code == 0
        assert json.loads(out)["capacity_bits"] == pytest.approx(expect, abs=1e-3)


def test_capacity_both_reports_delta(capsys):
    for m in ("1", "2"):
        code, out, _ = run(capsys, "capacity", "--relays", m, "--method", "both")
        d = json.loads(out)
        assert code == 0 and abs(d["cross_check"]["delta"]) < 1e-6


def test_capacity_solver_failure_exit(capsys):
    code, _, err = run(capsys, "capacity", "--relays", "3", "--max-iter", "3")
    assert code == 3 and "best" in err


def test_usage_errors(capsys):
    assert run(capsys, "capacity", "--relays", "0")[0] == 2
    assert run(capsys, "capacity", "--relays", "2", "--method", "closed-form")[0] == 2
    assert run(capsys, "simulate", "--n", "6", "--slots", "9")[0] == 2
    assert run(capsys, "simulate", "--n", "6")[0] == 2
    assert run(capsys, "cutset-check", "--relays", "6")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["region", "--points", "3"])  # neither --n-finite nor --asymptotic
    assert e.value.code == 2
    capsys.readouterr()


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_region_asymptotic(capsys):
    code, out, _ = run(capsys, "region", "--asymptotic", "--points", "100")
    assert code == 0 and out.startswith("r0_bits,r1_bits,label\n")
    outer = [r for r in _rows(out) if r["label"] == "outer_bound"]
    assert any(r["r0_bits"] == "0.528321" and r["r1_bits"] == "1.056642" for r in outer)
    assert {r["label"] for r in _rows(out)} == {"sum_cap_line", "outer_bound", "achievable_asymptotic"}


def test_region_endpoints_only(capsys):
    code, out, _ = run(capsys, "region", "--asymptotic", "--points", "1")
    rows = _rows(out)
    assert code == 0 and all(sum(r["label"] == lab for r in rows) == 2 for lab in {r["label"] for r in rows})


def test_region_finite_inside_outer(capsys, tmp_path, monkeypatch):
    from hdrelay.region import outer_boundary_single_relay
    monkeypatch.setenv("HDRELAY_OUTPUT_DIR", str(tmp_path))
    code, _, _ = run(capsys, "region", "--n-finite", "640", "--output", "region640.csv", "--figure", "region640.png")
    assert code == 0
    assert (tmp_path / "region640.png").stat().st_size > 0
    rows = _rows((tmp_path / "region640.csv").read_text())
    fin = [r for r in rows if r["label"] == "achievable_finite_n"]
    assert fin
    for r in fin:
        # CSV rounding is 5e-7
        assert float(r["r1_bits"]) <= outer_boundary_single_relay(min(float(r["r0_bits"]), 1.138872)) + 2e-6


def test_simulate_examples(capsys):
    code, out, _ = run(capsys, "simulate", "--relays", "1", "--n", "6", "--slots", "2", "--blocks", "10", "--seed", "1")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["messages_sent"] == rep["messages_correct"] == 9
    code, out, _ = run(capsys, "simulate", "--relays", "2", "--n", "64", "--optimize-slots", "--blocks", "40",
                       "--seed", "7")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["messages_correct"] == rep["messages_sent"] == 38
    assert rep["achieved_rate_bits_per_use"] > 0.9
    code, out, _ = run(capsys, "simulate", "--two-source", "--n", "6", "--slots", "2", "--k0", "1", "--blocks", "20")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["relay_rate_bits_per_use"] == pytest.approx(1 / 6)
    assert "achieved_rate_bits_per_use" in rep


def test_simulate_zero_error_violation_exit(capsys, monkeypatch):
    import hdrelay.simulator as sim
    real = sim.decode_at_node
    # corrupt the sink's decoder to prove the harness notices
    monkeypatch.setattr(sim, "decode_at_node",
                        lambda rx, a, spec, node: real(rx, a, spec, node) ^ (node == spec.m + 1))
    code, out, _ = run(capsys, "simulate", "--n", "6", "--slots", "2", "--blocks", "4")
    assert code == 4 and "error" in json.loads(out)


def test_simulate_reproducible(capsys):
    args = ("simulate", "--relays", "2", "--n", "16", "--optimize-slots", "--blocks", "12", "--seed", "4", "--trace")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_cutset_check(capsys):
    code, out, _ = run(capsys, "cutset-check", "--relays", "3", "--trials", "200", "--seed", "42")
    assert code == 0 and json.loads(out)["violations"] == []
    code, out, _ = run(capsys, "cutset-check", "--relays", "1", "--trials", "1")
    assert code == 0
    code, out, _ = run(capsys, "cutset-check", "--relays", "4", "--relay-source", "2", "--trials", "50", "--seed", "9")
    assert code == 0 and json.loads(out)["violations"] == []


def test_cutset_violation_exit(capsys, monkeypatch):
    import hdrelay.cutset as cs
    from hdrelay.cutset import VerificationReport, Violation

    def broken(chain, trials, seed):
        return VerificationReport(trials, [Violation("minimality", [1], 0.0, 1.0, [])], 2)
    monkeypatch.setattr(cs, "verify_ascending_minimality", broken)
    code, out, _ = run(capsys, "cutset-check", "--relays", "1", "--trials", "1")
    assert code == 5 and len(json.loads(out)["violations"]) == 1


def test_sweep(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--relays", "1", "--n-list", "8,16,64,256,640")
    rows = _rows(out)
    assert code == 0 and len(rows) == 5
    assert float(rows[-1]["gap_bits"]) < 0.03
    gaps = [float(r["gap_bits"]) for r in rows]
    assert gaps == sorted(gaps, reverse=True)
    code, out, _ = run(capsys, "sweep", "--relays", "1", "--n-list", "640")
    assert len(_rows(out)) == 1
    fig = tmp_path / "sweep.png"
    code, out, _ = run(capsys, "sweep", "--relays", "2", "--n-list", "16,64,256", "--figure", str(fig))
    gaps = [float(r["gap_bits"]) for r in _rows(out)]
    assert gaps[0] > gaps[1] > gaps[2] and fig.exists()
