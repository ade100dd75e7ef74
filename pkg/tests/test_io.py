import json

import numpy as np
import pytest

from spincmv import io as sio
from spincmv.errors import IoError, NonPhysicalDensity, ParseError
from spincmv.geometry import GridSpec, LevelSetMesh, extract_level_sets
from spincmv.runner import RunConfig, run
from spincmv.states import preset_density


@pytest.fixture(scope="module")
def clover():
    return extract_level_sets(np.diag([1.0, -1.0, 0.0]), 0.3, GridSpec(3.0, 32))


def empty_mesh(sign=1):
    return LevelSetMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), sign, 0.01)


def test_obj_round_trip(tmp_path, clover):
    pos, _ = clover
    path = tmp_path / "m.obj"
    sio.write_obj(pos, path)
    v, f = sio.read_obj(path)
    assert np.array_equal(v, pos.vertices)
    assert np.array_equal(f, pos.triangles)
    text = path.read_text()
    assert text.count("\nv ") == len(pos.vertices)
    assert text.count("\no ") == 1


@pytest.mark.parametrize("index", [0, 1])
def test_ply_round_trip_and_colour(tmp_path, clover, index):
    mesh = clover[index]
    path = tmp_path / "m.ply"
    sio.write_ply(mesh, path)
    v, f, rgb = sio.read_ply(path)
    assert np.array_equal(v, mesh.vertices)
    assert np.array_equal(f, mesh.triangles)
    expected = sio.POSITIVE_RGB if mesh.sign > 0 else sio.NEGATIVE_RGB
    assert np.all(rgb == expected)
    assert path.read_bytes().startswith(b"ply\nformat binary_little_endian 1.0\n")


def test_ply_and_obj_vertex_counts_agree(tmp_path, clover):
    pos, _ = clover
    sio.write_mesh(pos, "obj", tmp_path / "a.obj")
    sio.write_mesh(pos, "ply", tmp_path / "a.ply")
    assert len(sio.read_obj(tmp_path / "a.obj")[0]) == len(sio.read_ply(tmp_path / "a.ply")[0])


def test_empty_mesh_is_header_only(tmp_path):
    sio.write_obj(empty_mesh(), tmp_path / "e.obj")
    sio.write_ply(empty_mesh(-1), tmp_path / "e.ply")
    v, f = sio.read_obj(tmp_path / "e.obj")
    assert v.shape == (0, 3) and f.shape == (0, 3)
    data = (tmp_path / "e.ply").read_bytes()
    assert data.endswith(b"end_header\n")
    assert b"element face 0" in data


def test_face_indices_validated_on_write(tmp_path):
    bad = LevelSetMesh(np.eye(3), np.array([[0, 1, 2]]), 1, 0.01)
    object.__setattr__(bad, "triangles", np.array([[0, 1, 5]]))
    with pytest.raises(IoError):
        sio.write_obj(bad, tmp_path / "bad.obj")
    with pytest.raises(IoError):
        sio.write_ply(bad, tmp_path / "bad.ply")


def test_unknown_format(tmp_path, clover):
    with pytest.raises((IoError, ValueError)):
        sio.write_mesh(clover[0], "stl", tmp_path / "x.stl")


def test_truncated_ply(tmp_path, clover):
    path = tmp_path / "t.ply"
    sio.write_ply(clover[0], path)
    path.write_bytes(path.read_bytes()[:-7])
    with pytest.raises(ParseError):
        sio.read_ply(path)


def test_mesh_filename():
    assert sio.mesh_filename(7, (1, 2), 1, "obj") == "frame_0007_pair_1-2_pos.obj"
    assert sio.mesh_filename(12, (1, 3), -1, "ply") == "frame_0012_pair_1-3_neg.ply"


def test_density_round_trip(tmp_path):
    rho = np.zeros((4, 4))
    rho[0, 0] = 1.0
    sio.dump_density(rho, tmp_path / "uu.json")
    np.testing.assert_array_equal(sio.load_density(tmp_path / "uu.json"), rho)
    w = preset_density("w3-pair")
    sio.dump_density(w, tmp_path / "w.json")
    np.testing.assert_allclose(sio.load_density(tmp_path / "w.json"), w, atol=0)


def test_density_trace_violation(tmp_path):
    sio.dump_density(np.diag([0.9, 0, 0, 0]), tmp_path / "d.json")
    with pytest.raises(NonPhysicalDensity) as info:
        sio.load_density(tmp_path / "d.json")
    assert info.value.exit_code == 4


@pytest.mark.parametrize(
    "text",
    ['{"basis": "uu,ud,du,dd", "rho": [[[1, 0]', '{"rho": [[1, 2]]}', '{"basis": "xy", "rho": []}', "[]"],
)
def test_density_parse_errors(tmp_path, text):
    path = tmp_path / "d.json"
    path.write_text(text)
    with pytest.raises(ParseError) as info:
        sio.load_density(path)
    assert info.value.exit_code == 3


def test_missing_file():
    with pytest.raises(IoError):
        sio.load_density("/nonexistent/rho.json")


def test_record_round_trip(tmp_path):
    result = run(RunConfig(command="ising", params={"theta": 0.8}, pairs=[(1, 2), (1, 3)], t_end=1.0, frames=3,
                           out_dir=str(tmp_path)))
    record = sio.read_record(tmp_path / "record.json")
    assert record == json.loads(json.dumps(result.record))
    assert record["schema_version"] == sio.SCHEMA_VERSION
    assert len(record["frames"]) == 3
    assert record["frames"][0]["pairs"][1]["separation"] == 2


def test_record_schema_rejects_bad_records(tmp_path):
    with pytest.raises(ParseError):
        sio.validate_record({"schema_version": "1.0", "metadata": {}})
    path = tmp_path / "r.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        sio.read_record(path)


def test_negative_zero_cleaned():
    cleaned = sio._clean({"a": np.array([-0.0, 1.0]), "b": -0.0})
    assert json.dumps(cleaned) == '{"a": [0.0, 1.0], "b": 0.0}'
