"""Config loading, overrides, digests, and CLI subcommand behavior."""

import os

import numpy as np
import pytest

from nldiff import config as cfgmod
from nldiff.cli import main
from nldiff.errors import ConfigError
from nldiff.fields import load
from nldiff.heat import PointSourceDatum, PowerLawDatum


def _write(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


FULL_TOML = """
[kernel]
family = "quartic"
support_radius = 2.0

[grid]
dimension = 1
points_per_axis = 512
half_length = 16.0

[family]
kind = "power_law"
A = 1.5
alpha = 0.5

[evolution]
p = 3.0
dt = 0.1
t_end = 4.0
snapshot_times = [1.0, 4.0]

[rescaling]
k_ladder = [2.0, 4.0]
window_R = 1.0
target_points_per_axis = 256
target_half_length = 4.0

[w]
t_list = [0.5, 1.0]
t = 2.0
exclusion_K = 3.0

[output]
directory = "results"
"""


def test_load_config_full_file(tmp_path):
    cfg = cfgmod.load_config(_write(tmp_path, FULL_TOML))
    assert cfg.kernel_family == "quartic"
    assert cfg.support_radius == 2.0
    assert cfg.points_per_axis == 512
    assert cfg.family_kind == "power_law"
    assert cfg.family_A == 1.5
    assert cfg.p == 3.0
    assert cfg.snapshot_times == (1.0, 4.0)
    assert cfg.k_ladder == (2.0, 4.0)
    assert cfg.w_t_list == (0.5, 1.0)
    assert cfg.w_t == 2.0
    assert cfg.exclusion_K == 3.0
    assert cfg.directory == "results"
    assert len(cfg.config_hash) == 12
    kern = cfg.kernel()
    assert kern.family == "quartic" and kern.support_radius == 2.0
    grid = cfg.grid()
    assert grid.points_per_axis == 512 and grid.half_length == 16.0
    assert cfg.family().A == 1.5
    assert cfg.solve_config().t_end == 4.0


def test_defaults_without_file():
    cfg = cfgmod.load_config(None)
    assert cfg.kernel_family == "epanechnikov"
    assert cfg.dimension == 1
    assert cfg.points_per_axis == 4096
    assert cfg.half_length == 32.0
    assert cfg.p is None
    assert cfg.family_kind is None
    assert cfg.k_ladder == (4.0, 8.0, 16.0, 32.0)
    with pytest.raises(ConfigError):
        cfg.family()


def test_overrides_change_values_and_hash(tmp_path):
    path = _write(tmp_path, FULL_TOML)
    base = cfgmod.load_config(path)
    over = cfgmod.load_config(path, ["grid.half_length=64.0",
                                     "family.alpha=0.75",
                                     "kernel.family=\"bump\""])
    assert over.half_length == 64.0
    assert over.family_alpha == 0.75
    assert over.kernel_family == "bump"
    assert over.config_hash != base.config_hash
    again = cfgmod.load_config(path, ["grid.half_length=64.0",
                                      "family.alpha=0.75",
                                      "kernel.family=\"bump\""])
    assert again.config_hash == over.config_hash


def test_override_syntax_errors():
    with pytest.raises(ConfigError):
        cfgmod.apply_overrides({}, ["no_equals_sign"])
    with pytest.raises(ConfigError):
        cfgmod.apply_overrides({}, ["a..b=1"])


@pytest.mark.parametrize("override", [
    "evolution.dt=-0.1",
    "evolution.dt=0",
    "evolution.p=1.0",
    "evolution.t_end=-3",
    "kernel.family=\"triangle\"",
    "kernel.support_radius=-1",
    "grid.dimension=3",
    "grid.half_length=0",
    "family.kind=\"mystery\"",
    "family.A=-2.0",
    "w.t=0",
    "rescaling.window_R=-1",
])
def test_invalid_values_rejected(override):
    with pytest.raises(ConfigError):
        cfgmod.load_config(None, [override])


def test_cross_validation_through_module_constructors():
    # power_law without alpha passes the schema but fails family validation
    with pytest.raises(ConfigError):
        cfgmod.load_config(None, ["family.kind=\"power_law\""])
    # snapshot time beyond t_end fails SolveConfig validation
    with pytest.raises(ConfigError):
        cfgmod.load_config(None, ["evolution.snapshot_times=[99.0]"])


def test_missing_and_unparsable_files(tmp_path):
    with pytest.raises(ConfigError):
        cfgmod.load_config(str(tmp_path / "absent.toml"))
    bad = _write(tmp_path, "[kernel\nfamily = ", name="bad.toml")
    with pytest.raises(ConfigError):
        cfgmod.load_config(bad)


def test_limit_problem_datum_selection():
    power = cfgmod.load_config(None, ["family.kind=\"power_law\"",
                                      "family.alpha=0.5",
                                      "evolution.p=5.0"])
    prob = power.limit_problem()
    assert isinstance(prob.datum, PowerLawDatum)
    assert prob.c0 == 1.0 and prob.p == 5.0
    assert prob.diffusivity == pytest.approx(0.1, rel=1e-12)
    integ = cfgmod.load_config(None, ["family.kind=\"integrable\""])
    prob2 = integ.limit_problem(mass=1.25)
    assert isinstance(prob2.datum, PointSourceDatum)
    assert prob2.datum.M == 1.25
    assert prob2.c0 == 0.0


def test_config_digest_is_order_insensitive():
    a = cfgmod.config_digest({"x": 1, "y": {"z": 2}})
    b = cfgmod.config_digest({"y": {"z": 2}, "x": 1})
    assert a == b
    assert a != cfgmod.config_digest({"x": 1, "y": {"z": 3}})


TINY_TOML = """
[grid]
points_per_axis = 512
half_length = 16.0

[family]
kind = "power_law"
A = 1.0
alpha = 0.5

[evolution]
p = 5.0
dt = 0.1
t_end = 2.0
snapshot_times = [1.0, 2.0]

[w]
t_list = [0.5, 1.0]
t = 1.0
"""


def _run(tmp_path, argv, name="exp.toml", toml=TINY_TOML):
    cfg = _write(tmp_path, toml, name=name)
    return main(argv + ["--config", cfg])


def test_cli_config_error_exit_code(tmp_path, capsys):
    rc = _run(tmp_path, ["simulate", "--override", "evolution.dt=-0.5",
                         "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "config error" in capsys.readouterr().err


def test_cli_numerical_error_exit_code(tmp_path, capsys):
    # exclusion region is empty at t = 1000 on a half-length 16 grid
    rc = _run(tmp_path, ["w-table", "--override", "w.t_list=[1000.0]",
                         "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_cli_kernel_writes_provenance_header(tmp_path):
    out = tmp_path / "out"
    rc = _run(tmp_path, ["kernel", "--out", str(out)])
    assert rc == 0
    text = (out / "kernel.csv").read_text().splitlines()
    assert text[0].startswith("# config ")
    assert text[1].split(",")[0] == "family"
    assert len(text) == 3


def test_cli_w_snapshot_prints_created_files(tmp_path, capsys):
    out = tmp_path / "snap"
    rc = _run(tmp_path, ["w-snapshot", "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out.strip().splitlines()
    assert len(printed) == 3  # w, one gradient component, w_t
    for line in printed:
        fld = load(line)
        assert fld.values.shape == (512,)
        assert fld.time == 1.0


def test_cli_simulate_and_outputs(tmp_path):
    out = tmp_path / "sim"
    rc = _run(tmp_path, ["simulate", "--out", str(out)])
    assert rc == 0
    names = sorted(os.listdir(out))
    assert names == ["simulate.csv", "u_t1.nldf", "u_t2.nldf"]
    rows = (out / "simulate.csv").read_text().splitlines()
    assert rows[1] == "t,mass,sup,absorbed"
    assert len(rows) == 4


def test_cli_limit_runs(tmp_path):
    out = tmp_path / "lim"
    rc = _run(tmp_path, ["limit", "--out", str(out)])
    assert rc == 0
    assert (out / "limit.csv").exists()
    assert (out / "U_t1.nldf").exists()
    assert (out / "U_t2.nldf").exists()


RESCALE_TOML = TINY_TOML + """
[rescaling]
k_ladder = [2.0, 4.0]
window_R = 1.0
target_points_per_axis = 256
target_half_length = 4.0
"""


def test_cli_rescale_ladder(tmp_path):
    out = tmp_path / "resc"
    rc = _run(tmp_path, ["rescale", "--out", str(out)], toml=RESCALE_TOML)
    assert rc == 0
    assert sorted(os.listdir(out)) == ["rescale.csv", "uk_k2.nldf",
                                       "uk_k4.nldf"]
    uk = load(str(out / "uk_k4.nldf"))
    assert uk.time == pytest.approx(1.0)
    rows = (out / "rescale.csv").read_text().splitlines()
    assert rows[1] == "k,f_k,F_k,sup_uk"
    assert len(rows) == 4


def test_cli_rescale_threads_match_serial(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(tmp_path, ["rescale", "--out", str(a)], toml=RESCALE_TOML) == 0
    assert _run(tmp_path, ["rescale", "--out", str(b), "--threads", "2"],
                toml=RESCALE_TOML) == 0
    for name in ("rescale.csv", "uk_k2.nldf", "uk_k4.nldf"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_cli_compare_writes_metric_table(tmp_path):
    out = tmp_path / "cmp"
    rc = _run(tmp_path, ["compare", "--out", str(out)], toml=RESCALE_TOML)
    assert rc == 0
    rows = (out / "compare.csv").read_text().splitlines()
    assert rows[1] == "k,t,f_k,F_k,metric"
    assert len(rows) == 4
    metrics = [float(r.split(",")[-1]) for r in rows[2:]]
    assert all(m >= 0.0 for m in metrics)


RATES_TOML = TINY_TOML.replace("snapshot_times = [1.0, 2.0]",
                               "snapshot_times = [0.25, 0.5, 1.0, 1.5, 2.0]")


def test_cli_rates_fits_decay(tmp_path):
    out = tmp_path / "rates"
    rc = _run(tmp_path, ["rates", "--out", str(out)], toml=RATES_TOML)
    assert rc == 0
    fit_rows = (out / "rates_fit.csv").read_text().splitlines()
    assert fit_rows[1].startswith("exponent")
    values = fit_rows[2].split(",")
    assert float(values[5]) == 5  # n_points
    assert float(values[0]) < 0.0  # sup decays


def test_cli_mass_audit_prints_limit(tmp_path, capsys):
    out = tmp_path / "audit"
    # the residual is the trapezoid tally error, so it shrinks with dt
    rc = _run(tmp_path, ["mass-audit", "--override", "evolution.dt=0.01",
                         "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert stdout.startswith("M_limit ")
    rows = (out / "mass_audit.csv").read_text().splitlines()
    assert rows[1] == "t,mass,expected,residual"
    residuals = [abs(float(r.split(",")[-1])) for r in rows[2:]]
    assert max(residuals) < 1e-3


def test_cli_barrier_table(tmp_path):
    out = tmp_path / "bar"
    rc = _run(tmp_path, ["barrier", "--out", str(out)])
    assert rc == 0
    rows = (out / "barrier.csv").read_text().splitlines()
    assert rows[1] == "t,sup_f_sqrt_t_u,sup_f_x_u,mu_envelope"
    assert len(rows) == 4


def test_cli_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "r1", tmp_path / "r2"
    for out in (a, b):
        assert _run(tmp_path, ["w-table", "--out", str(out)]) == 0
        assert _run(tmp_path, ["simulate", "--out", str(out)]) == 0
    for name in ("w_table.csv", "simulate.csv", "u_t1.nldf", "u_t2.nldf"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_cli_w_table_columns(tmp_path):
    out = tmp_path / "wt"
    rc = _run(tmp_path, ["w-table", "--out", str(out)])
    assert rc == 0
    rows = (out / "w_table.csv").read_text().splitlines()
    assert rows[1] == "t,mass,sup,C_W,C_grad,C_T,l1_grad,l1_wt"
    assert len(rows) == 4
    for row in rows[2:]:
        vals = [float(v) for v in row.split(",")]
        assert all(np.isfinite(v) for v in vals)
        assert vals[1] == pytest.approx(1.0 - np.exp(-vals[0]), abs=1e-9)


def test_cli_out_env_takes_priority(tmp_path, monkeypatch):
    env_dir = tmp_path / "from-env"
    monkeypatch.setenv("NLDF_OUT", str(env_dir))
    ignored = tmp_path / "ignored"
    rc = _run(tmp_path, ["kernel", "--out", str(ignored)])
    assert rc == 0
    assert (env_dir / "kernel.csv").exists()
    assert not ignored.exists()


def test_cli_verify_all_list(tmp_path, capsys):
    rc = _run(tmp_path, ["verify-all", "--list", "--out", str(tmp_path / "v")])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 11
    assert lines[0].strip().startswith("1")


def test_cli_verify_all_single_criterion(tmp_path, capsys):
    out = tmp_path / "v1"
    rc = _run(tmp_path, ["verify-all", "--only", "1", "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "criterion  1: PASS" in stdout
    rows = (out / "verify_all.csv").read_text().splitlines()
    assert rows[1] == "criterion,status,detail"
    assert len(rows) == 3


def test_cli_verify_all_rejects_unknown_criterion(tmp_path, capsys):
    rc = _run(tmp_path, ["verify-all", "--only", "12",
                         "--out", str(tmp_path / "v")])
    assert rc == 1
    assert "config error" in capsys.readouterr().err
