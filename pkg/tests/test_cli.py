import csv
import io
import json
import subprocess
import sys

import pytest

from engel_gmt import cli

from conftest import FIXTURES


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def vplane():
    return FIXTURES / "vplane.json"


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


def test_degree_command(capsys, vplane):
    code, out, err = run(capsys, "degree", "--surface", vplane, "--grid", 5)
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == cli.COLUMNS["degree"]
    assert len(table) == 1 + 25
    assert {r[2] for r in table[1:]} == {"3"}
    assert "degree=3" in err


def test_stokes_command(capsys, vplane):
    code, out, _ = run(capsys, "stokes", "--surface", vplane, "--radius", "1/2,1/4")
    assert code == 0
    table = rows(out)
    assert [r[0] for r in table[1:]] == ["0.5", "0.25"]
    assert all(float(v) == 0.0 for r in table[1:] for v in r[1:])


def test_nonconverged_exit_code(capsys, tmp_path):
    cfg = write_json(tmp_path / "c.json", {"levels": 1})
    code, out, err = run(capsys, "stokes", "--surface", FIXTURES / "mixed.json", "--radius", "0.5",
                         "--config", cfg)
    assert code == 3
    assert "tolerance" in err
    assert rows(out)[0][0] == "radius"


def test_blowup_command(capsys):
    code, out, _ = run(capsys, "blowup", "--surface", FIXTURES / "vplane_translate.json")
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == cli.COLUMNS["blowup"]
    for r in table[1:]:
        assert float(r[2]) >= float(r[1]) - 0.1


def test_diverge_command(capsys, tmp_path):
    cfg = write_json(tmp_path / "c.json", {"n": 16, "levels": 2})
    code, out, err = run(capsys, "diverge", "--surface", FIXTURES / "mixed.json", "--beta", 5,
                         "--radii", "1/8,1/16,1/32,1/64", "--config", cfg)
    assert code == 0
    table = rows(out)
    assert len(table) == 5
    assert float(table[1][3]) == pytest.approx(3, abs=0.05)
    assert "ratio_slope" in err


def test_residuals_command(capsys, vplane):
    code, out, _ = run(capsys, "residuals", "--surface", vplane, "--grid", 5)
    assert code == 0
    table = rows(out)
    assert table[-1][0] == "horizontality"


def test_check_distance_command(capsys):
    code, out, _ = run(capsys, "check-distance", "--samples", 2000, "--seed", 3)
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == cli.COLUMNS["check-distance"]
    assert table[1][1] == "3"
    assert table[1][-2:] == ["0", "0"]


def test_out_file(capsys, tmp_path, vplane):
    target = tmp_path / "deg.csv"
    code, out, _ = run(capsys, "degree", "--surface", vplane, "--grid", 3, "--out", target)
    assert code == 0 and out == ""
    assert target.read_text().startswith("u1,u2,degree\n")


def test_seed_precedence(monkeypatch, tmp_path):
    cfg = write_json(tmp_path / "c.json", {"seed": 5})
    parser = cli.build_parser()
    args = parser.parse_args(["check-distance", "--config", str(cfg)])
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    assert cli.resolve_config(args).seed == 5
    monkeypatch.setenv(cli.SEED_ENV, "9")
    assert cli.resolve_config(args).seed == 9
    args = parser.parse_args(["check-distance", "--config", str(cfg), "--seed", "11"])
    assert cli.resolve_config(args).seed == 11
    monkeypatch.setenv(cli.SEED_ENV, "nine")
    args = parser.parse_args(["check-distance"])
    with pytest.raises(cli.InvalidInput):
        cli.resolve_config(args)


@pytest.mark.parametrize("config", [
    {"kappa3": 0},
    {"n": -4},
    {"levels": "three"},
    {"rtol": -1},
    {"seed": -2},
    {"colour": "blue"},
])
def test_invalid_config_exit_code(capsys, tmp_path, vplane, config):
    cfg = write_json(tmp_path / "c.json", config)
    code, out, err = run(capsys, "degree", "--surface", vplane, "--config", cfg)
    assert code == 2
    assert out == "" and err.startswith("error:")


def test_bad_json_config(capsys, tmp_path, vplane):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert run(capsys, "degree", "--surface", vplane, "--config", p)[0] == 2


@pytest.mark.parametrize("surface", [
    {"components": ["u1", "u2", "u1 *", "0"]},
    {"components": ["u1", "u2", "0"]},
    {"components": ["u1", "u2", "u3", "0"]},
    {"components": ["u1", "u2", "0", "0"], "domain": [[1, -1], [-1, 1]]},
    {"components": ["u1", "u2", "0", "0"], "xi": [0, 1, 0]},
])
def test_invalid_surface_exit_code(capsys, tmp_path, surface):
    p = write_json(tmp_path / "s.json", surface)
    code, _, err = run(capsys, "degree", "--surface", p, "--grid", 3)
    assert code == 2
    assert err.startswith("error:")


def test_parse_error_position_reported(capsys, tmp_path):
    p = write_json(tmp_path / "s.json", {"components": ["u1", "u2", "u1 ^ u2", "0"]})
    code, _, err = run(capsys, "degree", "--surface", p)
    assert code == 2
    assert "column" in err


def test_missing_surface_file(capsys, tmp_path):
    assert run(capsys, "degree", "--surface", tmp_path / "nope.json")[0] == 2


def test_too_small_grid(capsys, vplane):
    assert run(capsys, "degree", "--surface", vplane, "--grid", 0)[0] == 2


def test_domain_error_exit_code(capsys, vplane):
    assert run(capsys, "stokes", "--surface", vplane, "--radius", "2")[0] == 2


def test_bad_plane(capsys):
    assert run(capsys, "beta", "--plane", "e1,e1")[0] == 2
    assert run(capsys, "beta", "--plane", "e1,e9")[0] == 2


def test_help_lists_columns(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name, cols in cli.COLUMNS.items():
        assert f"{name}: {','.join(cols)}" in out


def test_module_entry_point(vplane):
    res = subprocess.run([sys.executable, "-m", "engel_gmt.cli", "degree", "--surface", str(vplane),
                          "--grid", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "u1,u2,degree"
