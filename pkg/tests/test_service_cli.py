import json
import os

import pytest

from crskit import fixtures as fx
from crskit import serialize as sz
from crskit.cli import main as cli_main


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fixtures")
    fx.write_fixture_files(str(d))
    return d


def run_cli(args, capsys):
    code = cli_main([str(a) for a in args])
    out = capsys.readouterr().out
    return code, out


def test_validate_ok_and_exit_codes(fixture_dir, capsys, tmp_path):
    code, out = run_cli(["validate", fixture_dir / "cc4.json"], capsys)
    assert code == 0
    assert json.loads(out)["valid"] is True
    # corrupted chain condition (d3 d4 != 0): nonzero exit, located violation
    payload = sz.loads(open(fixture_dir / "cc5.json").read())
    for entry in payload["higher"]:
        if entry["n"] == 4:
            entry["boundary"]["*"] = [[1]]
    bad = tmp_path / "bad.json"
    bad.write_text(sz.dumps(payload))
    code, out = run_cli(["validate", bad], capsys)
    assert code == 2
    body = json.loads(out)
    assert body["valid"] is False and body["violations"]
    # parse error: exit 3
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, out = run_cli(["validate", broken], capsys)
    assert code == 3


def test_pi_command(fixture_dir, capsys):
    code, out = run_cli(["pi", fixture_dir / "cc4.json", "--stage", 2], capsys)
    assert code == 0
    assert json.loads(out)["presentation"]["*"] == "Z/2"
    code, out = run_cli(["pi", fixture_dir / "cc4.json", "--stage", 9], capsys)
    assert code == 2


def test_tower_dump_reparses(fixture_dir, capsys):
    code, out = run_cli(["tower", fixture_dir / "xm_z2_z2_zero.json"], capsys)
    assert code == 0
    body = json.loads(out)
    assert len(body["stages"]) == 4  # P0..P3 for a rank-2 complex
    assert body["limit_reconstruction_equals_input"] is True
    for stage in body["stages"]:
        crs = sz.load_crs(stage)  # re-parse + re-validate
        assert crs.validate()[0]


def test_fiber_command(fixture_dir, capsys):
    code, out = run_cli(["fiber", fixture_dir / "cc4.json",
                         "--stage", 2, "--object", "*"], capsys)
    assert code == 0
    assert json.loads(out)["homotopy"]["2"] == "Z/2"


def test_extension_and_torsor_commands(fixture_dir, capsys):
    code, out = run_cli(["extension", fixture_dir / "cc4.json",
                         "--stage", 2], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["valid"] is True
    ext = sz.load_extension(body["extension"])  # re-parse
    from crskit.ext import validate_extension
    assert validate_extension(ext)[0]
    code, out = run_cli(["torsor", fixture_dir / "cc4.json",
                         "--stage", 2], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["torsor_valid"] and body["u_split"]


def test_em_check_command(fixture_dir, capsys):
    code, out = run_cli(["em-check", fixture_dir / "coeff_z2_const_Z2.json",
                         "--stage", 2, "--trunc", 1], capsys)
    assert code == 0
    assert json.loads(out)["passed"] is True
    code, out = run_cli(["em-check", fixture_dir / "coeff_z2_const_Z2.json",
                         "--stage", 1, "--trunc", 1, "--against-l"], capsys)
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_wbar_command_roundtrip(fixture_dir, capsys):
    code, out = run_cli(["wbar", fixture_dir / "sgpd_z2.json"], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["identities_verified"] is True
    ss = sz.load_simplicial_set(body["output"])
    assert ss.validate()[0]
    code, out = run_cli(["wbar", fixture_dir / "sxmod_z2.json"], capsys)
    assert code == 0
    sg = sz.load_simplicial_groupoid(json.loads(out)["output"])
    assert sg.validate()[0]


def test_size_cap_exit(fixture_dir, capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CK_SIZE_CAP", "2")
    code, out = run_cli(["torsor", fixture_dir / "xm_z4_z2_two.json",
                         "--stage", 1], capsys)
    assert code == 4
    assert json.loads(out)["error"]["kind"] == "size"


def test_text_format(fixture_dir, capsys):
    code, out = run_cli(["pi", fixture_dir / "cc4.json", "--stage", 2,
                         "--format", "text"], capsys)
    assert code == 0
    assert "presentation" in out and "Z/2" in out


def test_determinism_byte_identical(fixture_dir, tmp_path, capsys):
    pairs = []
    for cmd in (["pi", fixture_dir / "cc4.json", "--stage", 2],
                ["tower", fixture_dir / "cc4.json"],
                ["torsor", fixture_dir / "cc4.json", "--stage", 1],
                ["wbar", fixture_dir / "sgpd_z2.json"]):
        outs = []
        for run in (1, 2):
            path = tmp_path / f"out_{run}.json"
            code = cli_main([str(a) for a in cmd] + ["--out", str(path)])
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1], cmd


def test_healthz():
    from crskit.cli import make_client
    with make_client() as client:
        assert client.get("/healthz").json() == {"status": "ok"}


def test_wbar_ncrs_roundtrip(tmp_path, capsys):
    from crskit import groups
    from crskit.coeffs import constant_gmodule
    from crskit.fgab import cyclic_ab
    from crskit.groupoid import from_group
    from crskit.simplicial import em_object
    pi = from_group(groups.cyclic(2))
    em3 = em_object(3, pi, constant_gmodule(pi, cyclic_ab(2)), 1)
    path = tmp_path / "em3.json"
    path.write_text(sz.dumps(sz.dump_simplicial_ncrs(em3)))
    code, out = run_cli(["wbar", path], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["identities_verified"] is True
    back = sz.load_sxmod_linear(body["output"])
    assert back.validate()[0]
    # one level deeper: n = 4 input emits a re-parseable sncrs
    em4 = em_object(4, pi, constant_gmodule(pi, cyclic_ab(2)), 1)
    path4 = tmp_path / "em4.json"
    path4.write_text(sz.dumps(sz.dump_simplicial_ncrs(em4)))
    code, out = run_cli(["wbar", path4], capsys)
    assert code == 0
    out_obj = sz.load_simplicial_ncrs(json.loads(out)["output"])
    assert out_obj.validate()[0]
