from __future__ import annotations

import json
import math
import re

import numpy as np
import pytest

from qvortex import cli, engine_exact
from qvortex.fieldio import VorticityField, read_field, write_field
from qvortex.lattice import LatticeSpec, build_lattice, ring_contour
from qvortex.render import render_svg
from qvortex.su2_field import synthetic_field
from qvortex.vortex_analysis import lattice_degree


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


SMALL = {
    "lattice": {"width": 4, "height": 4, "layers": 1},
    "beta": [0.0, 1.0],
    "k": 2,
    "u": 0.5,
    "d": 0.5,
    "phi": 0.1,
    "contour_depths": [1],
    "boundary_mode": "clamped",
}


def test_schema_error_names_key(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.json", {"lattice": {"width": 2, "height": 1}, "beta": [1], "beta_": [2]})
    assert cli.main(["simulate", "--config", cfg]) == 2
    assert "beta_" in capsys.readouterr().err


def test_schema_rejects_bad_types(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.json", {"lattice": {"width": 2, "height": 1}, "beta": [1], "k": -1})
    assert cli.main(["simulate", "--config", cfg]) == 2
    assert "k" in capsys.readouterr().err


def test_unreadable_config_is_usage_error(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "x.json"
    bad.write_text("{not json")
    assert cli.main(["simulate", "--config", str(bad)]) == 2


def test_argparse_usage_exit_code():
    with pytest.raises(SystemExit) as info:
        cli.main(["simulate"])
    assert info.value.code == 2


def test_two_site_fields_vanish(tmp_path):
    cfg = _write(tmp_path, "two.json", {"lattice": {"width": 2, "height": 1}, "beta": [0.5, 1, 2], "k": 3, "contour_depths": []})
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    for i in range(3):
        vf = read_field(out / f"field_exact_b{i:03d}.csv")
        assert vf.norms.max() <= 1e-12


def test_beta_zero_all_vortex(tmp_path):
    cfg = _write(tmp_path, "c.json", SMALL)
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["summary"][0]["vortices"] == 4
    assert manifest["summary"][1]["vortices"] == 0
    degrees = json.loads((out / "degrees_exact.json").read_text())
    assert "vortex on contour" in degrees["entries"][0]["error"]
    assert (out / "timings.log").exists()
    assert "timings" not in json.dumps(manifest)


def test_roundtrip_is_bit_exact(tmp_path):
    cfg_path = _write(tmp_path, "c.json", SMALL)
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg_path, "--out", str(out)]) == 0
    cfg = cli.load_config(cfg_path)
    mem = cli.compute_fields(cfg)[1]
    disk = read_field(out / "field_exact_b001.csv")
    assert np.array_equal(mem.omega, disk.omega)
    assert np.array_equal(mem.omega_hat, disk.omega_hat)
    ring = ring_contour(build_lattice(LatticeSpec(4, 4, 1)), 1)
    expected = lattice_degree(mem, ring, "ring1").to_dict()
    assert cli.main(["degree", str(out / "field_exact_b001.csv"), "--depth", "1", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "degree_field_exact_b001_ring1.json").read_text())
    assert doc["report"] == expected


@pytest.mark.parametrize("engine", ["exact", "block"])
def test_outputs_are_deterministic(tmp_path, engine):
    cfg = _write(tmp_path, "c.json", {**SMALL, "basis": {"rotation": 0.3}})
    runs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert cli.main(["simulate", "--config", cfg, "--out", str(out), "--engine", engine]) == 0
        field = out / f"field_{engine}_b001.csv"
        assert cli.main(["render", str(field)]) == 0
        assert cli.main(["degree", str(field)]) == 0
        runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "timings.log"})
    assert runs[0] == runs[1]
    assert any(name.endswith(".svg") for name in runs[0])


def test_sector_solver_matches_dense(tmp_path):
    full = {**SMALL, "lattice": {"width": 3, "height": 3, "layers": 1}, "boundary_mode": "full"}
    dense = cli.load_config(_write(tmp_path, "d.json", full))
    sector = cli.load_config(_write(tmp_path, "s.json", {**full, "exact_solver": "sector"}))
    for a, b in zip(cli.compute_fields(dense), cli.compute_fields(sector)):
        np.testing.assert_allclose(a.omega, b.omega, atol=1e-12)


def test_sector_requires_full_mode(tmp_path):
    cfg = _write(tmp_path, "s.json", {**SMALL, "exact_solver": "sector", "boundary_mode": "clamped"})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_capacity_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {**SMALL, "boundary_mode": "full", "dim_cap": 64})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "cap" in capsys.readouterr().err


def test_config_hash_semantics(tmp_path):
    base = cli.fill_defaults({"lattice": {"width": 3, "height": 3, "layers": 1}, "beta": [1]})
    same = cli.fill_defaults({"lattice": {"width": 3, "height": 3, "layers": 1}, "beta": [1.0], "n": 1, "output_dir": "x"})
    assert cli.config_hash(base) == cli.config_hash(same)
    for change in ({"k": 2}, {"beta": [1, 2]}, {"d": 2}, {"engine": "block"}, {"basis": {"rotation": 0.1}}):
        other = cli.fill_defaults({"lattice": {"width": 3, "height": 3, "layers": 1}, "beta": [1], **change})
        assert cli.config_hash(other) != cli.config_hash(base)


def _ring_field(samples, sites, tmp_path, name):
    oh = np.asarray(samples, dtype=float)
    om = oh + 0.5 * np.eye(2)
    vf = VorticityField(sites, ["interior"] * len(sites), om, oh, {})
    return write_field(vf, tmp_path / name)


def test_degree_of_constant_and_synthetic_fixtures(tmp_path, capsys):
    cf = synthetic_field(2, 0.5, 64)
    sites = [(i, 0) for i in range(64)]
    contour = _write(tmp_path, "contour.json", [list(s) for s in sites])
    syn = _ring_field(cf.samples, sites, tmp_path, "syn.csv")
    assert cli.main(["degree", str(syn), "--contour", contour]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["winding"] == 2
    assert abs(doc["report"]["s"] - 2) < 0.05

    const = _ring_field([cf.samples[0]] * 64, sites, tmp_path, "const.csv")
    assert cli.main(["degree", str(const), "--contour", contour]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["s"] == 0.0 and doc["report"]["winding"] == 0


def test_degree_without_lattice_meta_is_usage_error(tmp_path):
    path = _ring_field(synthetic_field(1, 1.0, 8).samples, [(i, 0) for i in range(8)], tmp_path, "f.csv")
    assert cli.main(["degree", str(path)]) == 2


def test_corrupt_field_file(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert cli.main(["render", str(bad)]) == 2


def test_render_all_vortex_field_draws_only_circles():
    vf = VorticityField([(0, 0), (1, 0)], ["interior"] * 2, np.array([np.eye(2) / 2] * 2), np.zeros((2, 2, 2)))
    svg = render_svg(vf)
    assert svg.count("<circle") == 2
    assert "<line" not in svg


def test_render_single_site_angle():
    theta = 0.4
    p = engine_exact.compression(theta)
    vf = VorticityField([(0, 0)], ["boundary"], np.array([p]), np.array([p - np.eye(2) / 2]))
    svg = render_svg(vf, {(0, 0): theta})
    lines = re.findall(r'<line x1="([-\d.]+)" y1="([-\d.]+)" x2="([-\d.]+)" y2="([-\d.]+)"/>', svg)
    assert len(lines) == 2  # boundary tick plus direction segment
    x1, y1, x2, y2 = map(float, lines[1])
    # SVG y points down
    assert math.atan2(y1 - y2, x2 - x1) % math.pi == pytest.approx(theta, abs=1e-3)
    assert svg == render_svg(vf, {(0, 0): theta})


def test_validate_passes(capsys):
    assert cli.main(["validate"]) == 0
    assert "all checks passed" in capsys.readouterr().out


def test_validate_catches_broken_projector(monkeypatch, capsys):
    def broken(theta):
        c, s = np.cos(theta), np.sin(theta)
        return np.array([[c, s * c], [s * c, s]])

    monkeypatch.setattr(engine_exact, "compression", broken)
    assert cli.main(["validate"]) == 1
    out = capsys.readouterr().out
    assert re.search(r"FAIL\s+projector", out)


def test_validate_catches_sign_flipped_cayley_hamilton(monkeypatch, capsys):
    def flipped(h):
        h = np.asarray(h)
        return float(np.abs(h @ h - np.linalg.det(h) * np.eye(2)).max())

    monkeypatch.setattr(engine_exact, "cayley_hamilton_residual", flipped)
    assert cli.main(["validate"]) == 1
    out = capsys.readouterr().out
    line = next(ln for ln in out.splitlines() if "Cayley" in ln)
    assert line.startswith("FAIL") and "sign note" in line


def test_table1_command_writes_reports(tmp_path):
    cfg = _write(
        tmp_path,
        "t.json",
        {"total_width": 9, "total_height": 11, "boundary_layers": 2, "d_scan": [1, 2, 3], "ks": [10]},
    )
    out = tmp_path / "t1"
    assert cli.main(["table1", "--config", cfg, "--out", str(out)]) == 0
    text = (out / "table1.txt").read_text()
    assert "calibrated convention" in text
    doc = json.loads((out / "table1.json").read_text())
    assert doc["engine"] == "block engine (reconstructed)"
    assert (out / "table1.csv").read_text().startswith("k,given_degree,depth,s_abs,winding,paper_value,abs_error")


def test_table1_schema_error(tmp_path):
    cfg = _write(tmp_path, "t.json", {"total_widht": 9})
    assert cli.main(["table1", "--config", cfg, "--out", str(tmp_path)]) == 2
