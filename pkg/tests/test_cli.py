import json

import pytest

from energysim.cli import build_parser, main


def test_gen_writes_graph_and_sidecar(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert main(["gen", "--family", "planar_cluster", "--n", "100", "--seed", "2", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0].startswith("100 ")
    meta = json.loads((tmp_path / "g.txt.json").read_text())
    assert meta["family"] == "planar_cluster" and meta["certified_genus"] == 0


def test_bfs_on_file_writes_report(tmp_path):
    g = tmp_path / "g.txt"
    main(["gen", "--family", "grid", "--n", "6", "--param", "cols=7", "--out", str(g)])
    rep = tmp_path / "r.json"
    assert main(["bfs", "--graph", str(g), "--trials", "2", "--out", str(rep)]) == 0
    d = json.loads(rep.read_text())
    assert d["aggregates"]["trials"] == 2
    assert d["spec"]["instance"] == {"file": str(g)}


def test_zero_trials_exit_zero(tmp_path, capsys):
    assert main(["diameter", "--family", "path", "--n", "10", "--trials", "0", "--mode", "offline"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["rows"] == []


def test_missing_instance_is_usage_error(capsys):
    assert main(["mincut"]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_graph_file_is_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 5\n0 1\n")
    assert main(["check", "--graph", str(bad)]) == 2
    assert "header says 5" in capsys.readouterr().err


def test_unknown_family_rejected_by_parser():
    with pytest.raises(SystemExit) as e:
        build_parser().parse_args(["bfs", "--family", "hypercube"])
    assert e.value.code == 2


def test_primitives_csv(tmp_path):
    csv = tmp_path / "p.csv"
    assert main(["primitives", "--n", "64", "--trials", "2", "--variant", "sr_comm", "--csv", str(csv),
                 "--out", str(tmp_path / "p.json")]) == 0
    assert csv.read_text().splitlines()[1].startswith("64,")


def test_stmincut_and_mincut_offline(capsys):
    assert main(["mincut", "--family", "k2delta", "--n", "5", "--mode", "offline"]) == 0
    assert json.loads(capsys.readouterr().out)["rows"][0]["answer"] == 2
    assert main(["stmincut", "--family", "k2delta", "--n", "5", "--s", "0", "--t", "1", "--mode", "offline"]) == 0
    assert json.loads(capsys.readouterr().out)["rows"][0]["answer"] == 5


def test_profile_env_var(tmp_path, monkeypatch, capsys):
    p = tmp_path / "prof.txt"
    p.write_text("rep_logn = 5\n")
    monkeypatch.setenv("ENERGYSIM_PROFILE", str(p))
    assert main(["diameter", "--family", "path", "--n", "8", "--mode", "offline"]) == 0
    assert json.loads(capsys.readouterr().out)["spec"]["profile"] == {"rep_logn": 5}


def test_cli_output_is_byte_identical(capsys):
    args = ["bfs", "--family", "random_connected", "--n", "60", "--seed", "4", "--trials", "2"]
    main(args)
    a = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == a
