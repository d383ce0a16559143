import json

import pytest

from formflex.cli import main
from formflex.config import parse_config, parse_objects, parse_observations
from formflex.errors import DomainError, ParseError
from formflex.traces import serialize_trace, synthetic_pull_trace


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_config_defaults_and_keys():
    cfg = parse_config("""
        # FH-R80
        r_m = 0.03
        R_m = 0.04
        alpha_rad = 0.5235987755982988
        b_m = 0.002
        E_pa = 5e6
        n_segments = 36
        p_stall_max_mbar = 410
        leak_kind = orifice
    """.replace("        ", ""))
    assert cfg.p_stall_max_pa == 41000.0
    assert cfg.geometry().R == 0.04 and cfg.geometry().r == 0.03
    assert cfg.leak().kind == "orifice"
    assert cfg.grid().n_segments == 36


def test_config_rejects_unknown_and_invalid():
    with pytest.raises(DomainError, match="unknown config key"):
        parse_config("colour = red\n")
    with pytest.raises(DomainError):
        parse_config("r_m = 0.05\n")
    with pytest.raises(DomainError):
        parse_config("n_segments = many\n")


def test_objects_and_observations_csv():
    objs = parse_objects("name,diameter_m,mass_kg,leak_kind,c0,gap0_m,a_seal_m2,mu\n"
                         "egg,0.0436,0.06,linear,1e-6,0.0015,0.005,0.3\n")
    assert objs[0].leak.gap0 == 0.0015
    obs = parse_observations("object,power,mhf_n,q_m3h\negg,0.4,45,47.9\nlemon,0.4,,27.5\n")
    assert obs[1].mhf_measured is None
    assert obs[0].q_plateau == 47.9 / 3600
    with pytest.raises(ParseError, match="missing column"):
        parse_observations("object,power\negg,0.4\n")


def test_deflect_json(capsys):
    code, out = run(capsys, "deflect", "--q", "0.01")
    rep = json.loads(out.out)
    assert code == 0 and rep["schema_version"] == 1
    assert rep["interpretation"] == "paper_faithful" and rep["flow_mode"] == "total"
    assert rep["y_tip_m"] > 0


def test_deflect_csv_profile(tmp_path, capsys):
    code, _ = run(capsys, "deflect", "--q-m3h", "47.9", "--mode", "consistent",
                  "--flow", "apportioned", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "deflect.csv").read_text().splitlines()
    assert lines[0] == "x_m,y_m" and len(lines) == 102
    summary = json.loads((tmp_path / "deflect.json").read_text())
    assert summary["interpretation"] == "mechanics_consistent"


def test_operate(capsys):
    code, out = run(capsys, "operate", "--power", "0.4", "--c", "0")
    rep = json.loads(out.out)
    assert rep["dp_op_pa"] == pytest.approx(16400.0) and rep["q_op_m3s"] == 0.0


def test_grasp_report(capsys, tmp_path):
    code, out = run(capsys, "grasp", "--calibrated")
    rep = json.loads(out.out)
    assert code == 0
    by_name = {o["object"]: o for o in rep["objects"]}
    assert by_name["brick"]["mhf_n"] == pytest.approx(127.1, rel=1e-8)
    for key in ("stage", "dp_op_pa", "q_op_m3s", "y_tip_m", "mhf_n", "load_ratio", "warnings"):
        assert key in by_name["egg"]
    objects = tmp_path / "objects.csv"
    objects.write_text("name,diameter_m,mass_kg,leak_kind,c0,gap0_m,a_seal_m2,mu\n"
                       "plate,0.1,0.5,linear,0,0,0.005,0.5\n")
    code, out = run(capsys, "grasp", "--objects", str(objects), "--format", "csv")
    assert code == 0 and "plate,Jammed,True" in out.out


def test_fit_command(capsys, tmp_path):
    code, out = run(capsys, "fit", "--threshold-object", "brick")
    rep = json.loads(out.out)
    assert code == 0 and rep["converged"] and rep["residual_norm"] < 1e-6
    assert rep["holding_margin"] == pytest.approx(127.1 / (3.3 * 9.81), rel=1e-8)


def test_sweep_csv(capsys):
    code, out = run(capsys, "sweep", "--parameter", "power", "--values", "0.2,0.4", "--format", "csv")
    lines = out.out.splitlines()
    assert code == 0 and lines[0] == "value,y_tip_m,dp_op_pa,q_op_m3s,mhf_n" and len(lines) == 3


def test_sweep_sensitivity(capsys):
    code, out = run(capsys, "sweep", "--values", "0.4")
    exps = json.loads(out.out)["sensitivity"]["exponents"]
    assert exps["Q"] == pytest.approx(2.0, abs=1e-6) and exps["d_theta"] == pytest.approx(-2.0, abs=1e-6)


def test_trace_multiple_files(capsys, tmp_path):
    paths = []
    for k, peak in enumerate((50.0, 127.1)):
        p = tmp_path / f"pull{k}.csv"
        p.write_text(serialize_trace(synthetic_pull_trace(peak, noise=0.5, seed=k)))
        paths.append(str(p))
    code, out = run(capsys, "trace", *paths)
    rep = json.loads(out.out)
    assert code == 0
    assert [r["mhf_n"] for r in rep["traces"]] == [50.0, 127.1]


def test_trace_flow(capsys, tmp_path):
    p = tmp_path / "flow.csv"
    p.write_text("t_s,flow_m3h\n" + "".join(f"{k / 10},27.5\n" for k in range(40)))
    code, out = run(capsys, "trace", str(p), "--kind", "flow")
    rep = json.loads(out.out)["traces"][0]
    assert rep["stable"] and rep["plateau_m3h"] == pytest.approx(27.5, rel=1e-15)


def test_validation_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t_s,force_n\n0,1\n0,2\n")
    code, out = run(capsys, "trace", str(bad))
    assert code == 2 and "row 3" in out.err
    cfg = tmp_path / "run.cfg"
    cfg.write_text("wing_span = 3\n")
    assert run(capsys, "deflect", "--config", str(cfg))[0] == 2


def test_convergence_exit_code(capsys, monkeypatch):
    from formflex import cli
    from formflex.errors import ConvergenceError

    def stuck(args):
        raise ConvergenceError("stuck")

    monkeypatch.setattr(cli, "cmd_operate", stuck)
    code, out = run(capsys, "operate")
    assert code == 3 and "stuck" in out.err
