import csv
import math

import pytest

from mirrorlab.cli import main


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
    return list(csv.DictReader(lines))


def header(path):
    return [l[2:] for l in path.read_text().splitlines() if l.startswith("# ")]


def test_params_default_pipeline(tmp_path, capsys):
    assert main(["params", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "Omega * g0" in out and "g0 bound" in out
    rows = {r["quantity"]: float(r["value"]) for r in read_csv(tmp_path / "params.csv")}
    assert rows["Delta / g0"] == pytest.approx(3.8e12, rel=0.02)
    assert rows["xi"] == pytest.approx(6.4, rel=0.01)


def test_potential_and_modes(tmp_path, capsys):
    assert main(["potential", "--set", "potential.xi=50", "--set", "potential.n=101", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "potential.csv")
    assert len(rows) == 101 and set(rows[0]) == {"x", "V", "f", "V_sawtooth"}
    assert main(["modes", "--set", "modes.k=1", "--set", "modes.chi0=10", "--set", "modes.n=51",
                 "--out", str(tmp_path)]) == 0
    res = read_csv(tmp_path / "modes_resonances.csv")
    assert float(res[1]["q_max"]) == pytest.approx(math.pi + 1 / (40 * math.pi), abs=1e-4)
    assert "resonance half width" in capsys.readouterr().out


def test_simulate_schema_and_provenance(tmp_path):
    assert main(["simulate", "--config", "fig6.cfg", "--tau-end", "1", "--audit", "--out", str(tmp_path)]) == 0
    path = tmp_path / "simulate.csv"
    first = [l for l in path.read_text().splitlines() if not l.startswith("#")][0]
    assert first == "tau,x,v,energy,qdot_over_c,qddot_over_comega0"
    h = header(path)
    assert "command = simulate" in h and "mirrorlab = 0.1.0" in h
    assert "params.xi = 50" in h
    assert "resolved.tau_end = 1.0" in h
    assert any(l.startswith("resolved.x0 = ") for l in h)
    rows = read_csv(path)
    assert len(rows) == 4001
    # 17 significant digits
    assert len(rows[1]["x"].replace(".", "").lstrip("0")) >= 16


def test_simulate_full_has_no_energy(tmp_path):
    assert main(["simulate", "--config", "fig11a.cfg", "--tau-end", "1", "--set", "samples=11", "--out", str(tmp_path)]) == 0
    assert read_csv(tmp_path / "simulate.csv")[0].keys() == {"tau", "x", "v"}


def test_fixed_points(tmp_path):
    assert main(["fixed-points", "--config", "fig8b.cfg", "--out", str(tmp_path)]) == 0
    kinds = {(r["kind"], int(r["well"])) for r in read_csv(tmp_path / "fixed_points.csv")}
    assert ("saddle", 4) in kinds and ("stable_node", 4) in kinds
    assert main(["fixed-points", "--config", "fig11a.cfg", "--out", str(tmp_path)]) == 2


def test_validity_fig11a_fails(tmp_path, capsys):
    assert main(["validity", "--config", "fig11a.cfg", "--out", str(tmp_path)]) == 0
    assert "overall (observed): FAIL" in capsys.readouterr().out
    assert main(["validity", "--config", "fig11a.cfg", "--strict", "--out", str(tmp_path)]) == 1


def test_sweep_empty_grid(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("[scenario]\nkind = friction\ntreatment = rwa\n[params]\nxi = 10\nGamma = 1\n[run]\ntau_end = 1\n[sweep]\nGamma =\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    lines = [l for l in (tmp_path / "sweep.csv").read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 1 and lines[0].startswith("index,xi,Omega,Gamma")


def test_sweep_gamma_flip(tmp_path):
    g_c = 2 * math.sqrt(10)
    cfg = tmp_path / "s.cfg"
    cfg.write_text(
        "[scenario]\nkind = friction\ntreatment = rwa\nwell = 4\n[params]\nxi = 10\nGamma = 1\n"
        "[initial]\nx = 4*pi + 0.3\nv = 0\n[run]\ntau_end = 20\n"
        f"[sweep]\nGamma = 1, {g_c - 0.05}, {g_c + 0.05}, 7\n"
    )
    assert main(["sweep", "--config", str(cfg), "--jobs", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [r["index"] for r in rows] == ["0", "1", "2", "3"]
    assert [r["attractor"] for r in rows] == ["stable_spiral", "stable_spiral", "stable_node", "stable_node"]
    assert all(r["diagnostic"] == "" and r["well"] == "4" for r in rows)


def test_figure_outputs_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["figure", "6", "--out", str(a)]) == 0
    assert main(["figure", "6", "--out", str(b)]) == 0
    for name in ("fig6_numeric.csv", "fig6_pasted.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert read_csv(a / "fig6_pasted.csv")[0].keys() == {"tau", "x", "v"}
    assert main(["figure", "1", "--out", str(a), "--plot"]) == 0
    assert (a / "fig1.csv").exists() and list(a.glob("fig1*.gp"))
    assert "modes.chi0 = 10" in header(a / "fig1.csv")


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--bogus"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[scenario]\nkind = radiation\ntreatment = rwa\n[params]\nxi = 1\nGamma = 1\n[run]\ntau_end = 1\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    wall = tmp_path / "wall.cfg"
    wall.write_text("[scenario]\nkind = radiation\ntreatment = rwa\n[params]\nxi = 1\n"
                    "[initial]\nx = 0.1\nv = -5\n[run]\ntau_end = 5\n")
    assert main(["simulate", "--config", str(wall), "--out", str(tmp_path)]) == 3
    assert main(["figure", "13", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err
