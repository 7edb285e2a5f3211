import json

import pytest

from pyramidgh.cli import build_parser, load, main, parse_recipe, render
from pyramidgh.metric import read_space, sigma, space_from_json
from pyramidgh.pyramid import PyramidHandle
from pyramidgh.zoo import InvalidRecipe

S2 = '{"family": "sigma", "n": 2}'
S3 = '{"family": "sigma", "n": 3}'
POINT = '{"family": "sigma", "n": 1}'


async def invoke(*argv: str) -> int:
    return await main(build_parser().parse_args(list(argv)))


def test_render():
    rows = [{"N": 1, "lo": 0.0, "hi": 0.0}]
    assert render("rho", rows, "csv").splitlines() == ["# schema: pyramidgh/rho/v1", "N,lo,hi", "1,0.0,0.0"]
    assert json.loads(render("rho", rows, "json")) == {"schema": "pyramidgh/rho/v1", "rows": rows}


def test_load():
    assert load("max") == PyramidHandle.maximal()
    assert load(S2).n == 2
    assert load(S2, pointed=True).base == 0
    with pytest.raises(InvalidRecipe):
        parse_recipe("[1, 2]")
    with pytest.raises(InvalidRecipe):
        parse_recipe("{not json")


async def test_space_to_file(tmp_path, capsys):
    out = tmp_path / "s3.json"
    assert await invoke("space", "--recipe", S3, "--out", str(out)) == 0
    assert read_space(out).n == 3
    assert "n=3" in capsys.readouterr().err


async def test_space_to_stdout_is_a_space_file(capsys):
    assert await invoke("space", "--recipe", S3) == 0
    captured = capsys.readouterr()
    assert space_from_json(json.loads(captured.out)) == sigma(3)
    assert "n=3" in captured.err


async def test_inspect(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"matrix": [[0, 1], [1, 0]]}))
    assert await invoke("inspect", str(good)) == 0
    assert "diam=1" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"matrix": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    assert await invoke("inspect", str(bad)) == 2
    assert "TriangleViolation" in capsys.readouterr().out


async def test_missing_file(tmp_path, capsys):
    assert await invoke("inspect", str(tmp_path / "nope.json")) == 2
    assert capsys.readouterr().err.startswith("error:")


async def test_gh_json(capsys):
    assert await invoke("gh", POINT, S2, "--format", "json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "pyramidgh/gh/v1"
    assert doc["rows"][0]["lo"] == doc["rows"][0]["hi"] == 0.5


async def test_gh_refuses_max(capsys):
    assert await invoke("gh", "max", S2) == 2


async def test_rho_csv(capsys):
    assert await invoke("rho", S2, S3, "--nmax", "2") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# schema: pyramidgh/rho/v1"
    assert lines[1] == "N,lo,hi"
    assert lines[-1].startswith("total,")


async def test_rho0_rejects_bad_schemes(capsys):
    assert await invoke("rho0", S2, S3, "--rmin", "2", "--rmax", "1") == 2
    assert "r_min" in capsys.readouterr().err


async def test_bad_options(capsys):
    assert await invoke("rho", S2, S3, "--nmax", "0") == 2
    assert await invoke("rho", S2, S3, "--delta", "-1") == 2
    assert "--delta" in capsys.readouterr().err


async def test_sequence_of_a_constant_family(capsys):
    assert await invoke("sequence", "--target", S2, "--recipe", S2, "--recipe", S2, "--nmax", "2", "--format", "json") == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert len(rows) == 2
    assert all(row["lo"] == 0 for row in rows)


async def test_verify_list(capsys):
    assert await invoke("verify", "--list") == 0
    assert len(capsys.readouterr().out.splitlines()) == 13
    assert await invoke("verify", "--suite", "paper", "--list") == 0
    assert len(capsys.readouterr().out.splitlines()) == 13


async def test_net_export(tmp_path, capsys):
    out = tmp_path / "net.json"
    assert await invoke("net", S2, "--N", "2", "--D", "2", "--delta", "0.5", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["N"] == 2 and doc["certified"]
    assert len(doc["elements"]) == 3
    assert all(space_from_json(e).n <= 2 for e in doc["elements"])
    assert "3 elements" in capsys.readouterr().err
    assert await invoke("net", S2, "--N", "0") == 2


async def test_verify_unknown_criterion(capsys):
    assert await invoke("verify", "--only", "nonsense") == 2
