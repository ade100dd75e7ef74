import json

import numpy as np
import pytest
from click.testing import CliRunner

from spincmv import io as sio
from spincmv.cli import cli, eval_number, parse_matrix, parse_pairs
from spincmv.errors import ConfigError


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


def error_of(result):
    return json.loads(result.stderr.strip().splitlines()[-1])


@pytest.mark.parametrize(
    "text, value",
    [("pi/4", np.pi / 4), ("1.5707963", 1.5707963), ("-3*pi/8", -3 * np.pi / 8), ("2**-1", 0.5)],
)
def test_eval_number(text, value):
    assert eval_number(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["__import__('os')", "pi/0", "x", "1e400", "True"])
def test_eval_number_rejects(text):
    with pytest.raises(ConfigError):
        eval_number(text)


def test_parsers():
    assert parse_pairs("1:2, 1:3") == [(1, 2), (1, 3)]
    with pytest.raises(ConfigError):
        parse_pairs("1-2")
    assert parse_matrix("1,0,0;0,-1,0;0,0,pi").shape == (3, 3)
    with pytest.raises(ConfigError):
        parse_matrix("1,0;0,1")


def test_state_bell_with_mesh(runner, tmp_path):
    result = invoke(runner, "state", "--name", "bell-phi+", "--mesh", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    record = sio.read_record(tmp_path / "record.json")
    entry = record["frames"][0]["pairs"][0]
    np.testing.assert_allclose(entry["c_connected"], np.diag([1, -1, 1]), atol=1e-12)
    assert sorted(p.name for p in tmp_path.glob("*.obj")) == [
        "frame_0000_pair_1-2_neg.obj",
        "frame_0000_pair_1-2_pos.obj",
    ]


def test_state_from_density_file(runner, tmp_path):
    rho = np.diag([0.5, 0, 0, 0.5])
    sio.dump_density(rho, tmp_path / "rho.json")
    result = invoke(runner, "state", "--density", tmp_path / "rho.json", "--out", tmp_path / "o")
    assert result.exit_code == 0, result.output
    entry = sio.read_record(tmp_path / "o" / "record.json")["frames"][0]["pairs"][0]
    assert entry["shape"]["label"] == "Dumbbell"


def test_ising_sweep(runner, tmp_path):
    result = invoke(runner, "ising", "--theta", "1.5707963", "--Jt-max", "2", "--frames", "40",
                    "--pairs", "1:2,1:3", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    record = sio.read_record(tmp_path / "record.json")
    assert len(record["frames"]) == 40
    assert record["frames"][-1]["time"] == pytest.approx(2.0)
    assert [e["pair"] for e in record["frames"][5]["pairs"]] == [[1, 2], [1, 3]]


def test_tfim_zero_off_diagonal(runner, tmp_path):
    result = invoke(runner, "tfim", "--g", "0.5", "--T", "1.0", "--n", "1", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    record = sio.read_record(tmp_path / "record.json")
    c = np.array(record["frames"][0]["pairs"][0]["c_connected"])
    assert np.all(c[~np.eye(3, dtype=bool)] == 0.0)
    assert record["metadata"]["convention_map"]["bloch_axis"] == "x"


def test_lindblad_and_hubbard_commands(runner, tmp_path):
    r1 = invoke(runner, "ising-lindblad", "--gamma", "0.5", "--Jt-max", "1", "--frames", "3", "--out", tmp_path / "a")
    r2 = invoke(runner, "hubbard", "--Jt-max", "0.5", "--frames", "2", "--pairs", "1:2,2:4", "--out", tmp_path / "b")
    assert r1.exit_code == 0 and r2.exit_code == 0
    meta = sio.read_record(tmp_path / "a" / "record.json")["metadata"]
    assert meta["unvalidated_regime"] is False
    entry = sio.read_record(tmp_path / "b" / "record.json")["frames"][1]["pairs"][0]
    assert entry["meta_flags"]["bessel_cutoff"] == 31


def test_lindblad_off_equator_flagged(runner, tmp_path):
    result = invoke(runner, "ising-lindblad", "--theta", "pi/4", "--gamma", "0.5", "--Jt-max", "1", "--out", tmp_path)
    assert result.exit_code == 0
    assert "UnvalidatedRegime" in result.stderr
    assert sio.read_record(tmp_path / "record.json")["metadata"]["unvalidated_regime"] is True


def test_display_scale_only_touches_meshes(runner, tmp_path):
    for scale, sub in (("1", "a"), ("1.5", "b")):
        result = invoke(runner, "state", "--name", "bell-psi+", "--mesh", "--formats", "ply",
                        "--display-scale", scale, "--out", tmp_path / sub)
        assert result.exit_code == 0
    va = sio.read_ply(tmp_path / "a" / "frame_0000_pair_1-2_pos.ply")[0]
    vb = sio.read_ply(tmp_path / "b" / "frame_0000_pair_1-2_pos.ply")[0]
    np.testing.assert_allclose(vb, 1.5 * va)
    ra = sio.read_record(tmp_path / "a" / "record.json")
    rb = sio.read_record(tmp_path / "b" / "record.json")
    assert ra["frames"] == rb["frames"]
    assert rb["metadata"]["display_scale"] == 1.5


def test_outputs_are_deterministic(runner, tmp_path, monkeypatch):
    args = ["animate", "--model", "ising", "--param", "theta=pi/4", "--Jt-max", "1", "--frames", "4",
            "--pairs", "1:2,1:3", "--formats", "json,obj,ply", "--resolution", "24"]
    monkeypatch.setenv("SPINCMV_THREADS", "1")
    assert invoke(runner, *args, "--out", tmp_path / "a").exit_code == 0
    monkeypatch.setenv("SPINCMV_THREADS", "4")
    assert invoke(runner, *args, "--out", tmp_path / "b").exit_code == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(names) == 1 + 4 * 2 * 2 * 2
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unknown_flag_rejected(runner):
    result = invoke(runner, "state", "--bogus")
    assert result.exit_code == 2
    assert error_of(result)["error"] == "UsageError"


@pytest.mark.parametrize(
    "args, code, name",
    [
        (["ising", "--theta", "4"], 2, "ConfigError"),
        (["ising", "--pairs", "1:1"], 2, "ConfigError"),
        (["ising", "--J", "0"], 2, "ConfigError"),
        (["state"], 2, "ConfigError"),
        (["state", "--density", "/nonexistent.json"], 9, "IoError"),
        (["classify", "--matrix", "1,0;0,1"], 2, "ConfigError"),
        (["ising", "--formats", "stl"], 2, "ConfigError"),
        (["hubbard", "--Jt-max", "3", "--frames", "2", "--bessel-cutoff", "2"], 8, "TruncationError"),
    ],
)
def test_errors_are_json(runner, tmp_path, args, code, name):
    result = invoke(runner, *args, *(["--out", tmp_path] if args[0] != "classify" else []))
    assert result.exit_code == code
    err = error_of(result)
    assert err["error"] == name and err["exit_code"] == code


def test_bad_density_codes(runner, tmp_path):
    sio.dump_density(np.diag([0.9, 0, 0, 0]), tmp_path / "d.json")
    (tmp_path / "t.json").write_text('{"basis": "uu,ud,du,dd", "rho": [[')
    assert invoke(runner, "state", "--density", tmp_path / "d.json", "--out", tmp_path).exit_code == 4
    assert invoke(runner, "state", "--density", tmp_path / "t.json", "--out", tmp_path).exit_code == 3


def test_config_file(runner, tmp_path):
    cfg = {"ising": {"theta": "pi/4", "Jt-max": 1, "frames": 3, "pairs": [[1, 2], [1, 3]]}}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    result = invoke(runner, "ising", "--config", tmp_path / "c.json", "--out", tmp_path / "o")
    assert result.exit_code == 0, result.output
    record = sio.read_record(tmp_path / "o" / "record.json")
    assert record["metadata"]["params"]["theta"] == pytest.approx(np.pi / 4)
    assert len(record["frames"]) == 3
    # flags override the file
    flat = {"frames": 5, "Jt_max": 1}
    (tmp_path / "f.json").write_text(json.dumps(flat))
    result = invoke(runner, "ising", "--config", tmp_path / "f.json", "--frames", "2", "--out", tmp_path / "p")
    assert len(sio.read_record(tmp_path / "p" / "record.json")["frames"]) == 2


def test_config_unknown_key(runner, tmp_path):
    (tmp_path / "c.json").write_text('{"thetaa": 1}')
    result = invoke(runner, "ising", "--config", tmp_path / "c.json")
    assert result.exit_code == 2
    assert "thetaa" in error_of(result)["message"]


def test_classify_output(runner):
    result = invoke(runner, "classify", "--matrix", "1,0,0;0,-1,0;0,0,0")
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["label"] == "Clover" and doc["rank"] == 2
    # the antisymmetric part is reported as a pseudovector
    doc = json.loads(invoke(runner, "classify", "--matrix", "0,0.4,0;-0.4,0,0;0,0,0").output)
    assert doc["label"] == "Zero"
    assert doc["pseudovector"] == pytest.approx([0, 0, 0.4])


def test_mesh_command(runner, tmp_path):
    result = invoke(runner, "mesh", "--matrix", "0.5,0,0;0,-0.3,0;0,0,0", "--formats", "ply", "--fit-grid",
                    "--resolution", "32", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "frame_0000_pair_1-2_neg.ply",
        "frame_0000_pair_1-2_pos.ply",
    ]


def test_verify_exit_codes(runner, tmp_path):
    ok = invoke(runner, "verify", "--only", "7", "--out", tmp_path)
    assert ok.exit_code == 0
    assert "[PASS] criterion 7" in ok.output
    assert json.loads((tmp_path / "criterion_7.json").read_text())["passed"] is True
    bad = invoke(runner, "verify", "--only", "1")
    assert bad.exit_code == 1
    assert invoke(runner, "verify", "--only", "42").exit_code == 2
