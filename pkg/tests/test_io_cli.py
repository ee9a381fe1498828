import json

import numpy as np
import pytest

from chg import cli
from chg.catalog import catalog, names
from chg.errors import NotInGroup, ParseError
from chg.io import (
    cloud_header,
    group_to_json,
    load_group,
    orbit_to_csv,
    parse_group,
    read_cloud_csv,
    save_group,
)
from chg.orbit import orbit_bfs

CYCLIC_FILE = """{
 "name": "cyclic",
 "n": 2,
 "generators": [
  [[[2, 0], [0, 0], [0, 0]],
   [[0, 0], [1, 0], [0, 0]],
   [[0, 0], [0, 0], [0.5, 0]]]
 ]
}
"""


def test_load_valid_file(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(CYCLIC_FILE)
    G = load_group(p)
    assert G.n == 2 and len(G.generators) == 1
    assert np.array_equal(G.generators[0], np.diag([2, 1, 0.5]))


def test_not_in_group_reports_residual():
    bad = CYCLIC_FILE.replace("[0.5, 0]", "[0.25, 0]")
    with pytest.raises(NotInGroup) as info:
        parse_group(bad)
    assert info.value.index == 0 and info.value.residual > 0.1


def test_malformed_entry_position():
    bad = CYCLIC_FILE.replace("[1, 0], [0, 0]]", '"x", [0, 0]]')
    with pytest.raises(ParseError) as info:
        parse_group(bad)
    lines = bad.splitlines()
    assert info.value.line == 6
    assert lines[5][info.value.column - 1] == '"'


def test_malformed_json_position():
    with pytest.raises(ParseError) as info:
        parse_group('{"n": 2,\n "generators": [}')
    assert info.value.line == 2


def test_missing_field():
    with pytest.raises(ParseError):
        parse_group('{"n": 2}')


@pytest.mark.parametrize("name", names())
def test_catalog_round_trip(name, tmp_path):
    G = catalog(name)
    text = group_to_json(G)
    path = tmp_path / "g.json"
    save_group(G, path)
    H = load_group(path)
    assert group_to_json(H) == text
    for a, b in zip(G.generators, H.generators):
        assert np.array_equal(a, b)


def test_cloud_csv_round_trip():
    cloud = orbit_bfs(catalog("generic-schottky"), 3)
    text = orbit_to_csv(cloud)
    assert text.splitlines()[0].split(",") == cloud_header(3)
    pts, wl, bv = read_cloud_csv(text)
    assert np.array_equal(pts, cloud.points)
    assert np.array_equal(wl, cloud.word_lengths)
    assert np.array_equal(bv, cloud.ball_values)


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_invariant(capsys):
    code, out, _ = run_cli(capsys, "invariant", "--points", "e1 | 1,0,i | e3")
    assert code == 0
    assert json.loads(out)["invariant"] == pytest.approx(np.pi / 2, abs=1e-14)


def test_cli_decompose(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(json.dumps([[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0.5]]))
    code, out, _ = run_cli(capsys, "decompose", "--matrix", str(p))
    assert code == 0
    doc = json.loads(out)
    assert doc["lambda"] == pytest.approx(np.log(2), abs=1e-14)
    assert doc["relative_error"] < 1e-12


def test_cli_decompose_non_square(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(json.dumps([[1, 0, 0], [0, 1, 0]]))
    code, _, err = run_cli(capsys, "decompose", "--matrix", str(p))
    assert code == cli.EXIT_USAGE
    assert json.loads(err)["kind"] == "usage"


def test_cli_usage_errors(capsys):
    assert run_cli(capsys, "nonsense")[0] == cli.EXIT_USAGE
    assert run_cli(capsys, "orbit")[0] == cli.EXIT_USAGE
    assert run_cli(capsys, "orbit", "--catalog", "nope")[0] == cli.EXIT_USAGE
    assert run_cli(capsys, "orbit", "--catalog", "cyclic", "--depth", "0")[0] == cli.EXIT_USAGE


def test_cli_numeric_failure(capsys):
    # A non-boundary triple is a numerical precondition failure.
    code, _, err = run_cli(capsys, "invariant", "--points", "e1 | e2 | e3", "--n", "2")
    assert code == cli.EXIT_NUMERIC
    assert json.loads(err)["error"] == "NotBoundary"


def test_cli_pencil(capsys):
    code, out, _ = run_cli(capsys, "pencil", "--point", "1,1,1,-1")
    assert code == 0
    doc = json.loads(out)
    assert np.allclose(doc["mz"]["re"], [[0, 1], [1, 0]])
    assert doc["invariant_e1_z_en"] == pytest.approx(0, abs=1e-14)


def test_cli_dset(capsys):
    code, out, _ = run_cli(capsys, "dset", "--catalog", "cyclic", "--point", "e2", "--depth", "40")
    assert code == 0
    doc = json.loads(out)
    assert doc["prediction"] == "line" and doc["max_distance"] < 1e-3


def test_cli_orbit_csv_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run_cli(capsys, "orbit", "--catalog", "generic-schottky", "--depth", "8",
                             "--frontier-cap", "50", "--seed", "4", "--format", "csv",
                             "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("re_0,im_0,")


def test_cli_limitset(capsys):
    code, out, _ = run_cli(capsys, "limitset", "--catalog", "cyclic", "--depth", "30")
    assert code == 0
    doc = json.loads(out)
    assert doc["clusters"] == 2 and doc["samples"] > 0


def test_cli_catalog_emit_and_reload(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "catalog")
    assert code == 0 and out.split() == names()
    path = tmp_path / "c.json"
    assert run_cli(capsys, "catalog", "--catalog", "c-fuchsian-schottky", "--out", str(path))[0] == 0
    G = load_group(path)
    assert group_to_json(G) == path.read_text()
    code, out, _ = run_cli(capsys, "orbit", "--group", str(path), "--depth", "2")
    assert code == 0 and json.loads(out)["dedup_count"] == 17


def test_cli_verify_cyclic(capsys):
    code, out, _ = run_cli(capsys, "verify", "--group", "cyclic", "--depth", "40")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"]["i_cluster_to_hyperplane"]["value"] < 1e-3
    assert doc["run_config"]["depth"] == 40


def test_cli_verify_failure_exit_code(capsys):
    # A tolerance no estimate can meet forces a failed verdict.
    code, _, _ = run_cli(capsys, "verify", "--catalog", "cyclic", "--depth", "10", "--tol", "1e-300")
    assert code == cli.EXIT_VERIFY
