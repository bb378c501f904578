import dataclasses
import json

import numpy as np
import pytest

from graphon_opinion import cli
from graphon_opinion.config import PRESETS, SimConfig, build_model, config_hash, emit, load_config, preset
from graphon_opinion.errors import ConfigError, DomainError, SchemeError
from graphon_opinion.graphon import ConstantGraphon, PowerLawGraphon


def test_homogeneous_preset():
    cfg = load_config("homogeneous")
    model = build_model(cfg)
    assert isinstance(model.graphon.base, ConstantGraphon) and model.graphon.base.c == 1.0
    assert cfg.epsilon == 5e-4 and cfg.n_agents == 100_000 and cfg.theta == 0.1
    assert model.scaled.kappa == pytest.approx(4 / 27)
    assert cfg.sigma2_value == 0.25


def test_power_law_preset():
    cfg = load_config("power-law")
    g = build_model(cfg).graphon
    assert isinstance(g.base, PowerLawGraphon) and g.base.c == 9 / 16 and g.base.a == 0.25
    assert cfg.t_final == 32.0 and g.sigma == 4.0
    assert cfg.snapshot_times == (0.0, 16.0, 32.0)


def test_non_separable_presets_use_general_penalty():
    for name in ("small-world", "knn"):
        cfg = load_config(name)
        assert cfg.kappa_mode == "general" and cfg.graphon_r == 0.125
    assert load_config("knn").graphon_p == 0.75


def test_stability_violation_rejected():
    # power-law truncates at Sigma = 4; dt = 1.5 eps / 4 gives Sigma dt / eps = 1.5
    with pytest.raises(SchemeError):
        preset("power-law", dt=1.5 * 5e-4 / 4.0)


def test_stability_load_exactly_checked():
    # Sigma dt / eps = 1.5
    with pytest.raises(SchemeError):
        preset("homogeneous", sigma_trunc=1.0, dt=7.5e-4)


def test_diffusion_too_strong_rejected():
    with pytest.raises(DomainError):
        preset("homogeneous", sigma2=1.0)


@pytest.mark.parametrize(
    "key,value",
    [("n_agents", 1.5), ("n_agents", 1), ("theta", "x"), ("graphon_kind", "erdos"),
     ("snapshot_times", [1.0, -2.0]), ("nonsense", 1), ("parallel", 1)],
)
def test_schema_errors_name_the_key(key, value):
    with pytest.raises(ConfigError) as exc:
        preset("homogeneous", **{key: value})
    assert exc.value.key is not None and exc.value.key.startswith(key)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_round_trip(name, tmp_path):
    cfg = preset(name)
    p = tmp_path / "c.json"
    p.write_text(emit(cfg))
    assert load_config(p) == cfg


def test_precedence_flags_over_file_over_preset(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"preset": "power-law", "seed": 4, "n_agents": 500}))
    cfg = load_config(p, {"seed": 9})
    assert cfg.graphon_kind == "power-law" and cfg.n_agents == 500 and cfg.seed == 9


def test_hash_changes_iff_fields_change():
    base = preset("homogeneous")
    assert config_hash(base) == config_hash(preset("homogeneous"))
    changes = {"n_agents": 10, "seed": 3, "output_dir": "elsewhere", "w_bins": 16,
               "snapshot_times": [0.0], "parallel": True, "epsilon": 1e-3}
    for k, v in changes.items():
        assert config_hash(base.replace(**{k: v})) != config_hash(base), k


def _read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0], lines[1:]


def test_cli_run_outputs_and_byte_identical_repeat(tmp_path):
    args = ["run", "--preset", "homogeneous", "--seed", "5", "--epsilon", "0.01",
            "--set", "n_agents=1000", "--set", "snapshot_times=[0.0, 8.0]", "--sequential"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    ta = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert ta == (tmp_path / "b" / "trajectory.csv").read_bytes()
    header, rows = _read_csv(tmp_path / "a" / "trajectory.csv")
    assert header == "step,tau,mean,energy,variance,entropy_w,entropy_xw,ks_vs_oracle,accepted,clamped"
    assert len(rows) == 800
    sheader, srows = _read_csv(tmp_path / "a" / "snapshot_t8.csv")
    assert sheader == "x_bin_lo,x_bin_hi,w_bin_lo,w_bin_hi,density"
    assert len(srows) == 64 * 64
    dens = np.array([float(r.split(",")[-1]) for r in srows])
    assert dens.sum() * (1 / 64) * (2 / 64) == pytest.approx(1.0)
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["seed"] == 5 and len(man["config_hash"]) == 64
    assert {"numpy", "scipy", "numba", "python"} <= set(man["versions"])
    assert man["wall_time_s"] > 0
    cfg = load_config(tmp_path / "a" / "config.json")
    assert config_hash(cfg) == man["config_hash"]


def test_cli_threads_match_sequential(tmp_path):
    base = ["run", "--preset", "knn", "--epsilon", "0.01", "--set", "n_agents=1000",
            "--set", "t_final=0.5", "--set", "snapshot_times=[0.0]"]
    assert cli.main(base + ["--out", str(tmp_path / "s"), "--sequential"]) == 0
    assert cli.main(base + ["--out", str(tmp_path / "p"), "--threads", "1"]) == 0
    assert (tmp_path / "s" / "trajectory.csv").read_bytes() == (tmp_path / "p" / "trajectory.csv").read_bytes()


def test_cli_sweep_writes_three_trajectories(tmp_path):
    out = tmp_path / "new" / "dir"
    rc = cli.main(["sweep-epsilon", "--preset", "homogeneous", "--out", str(out),
                   "--set", "n_agents=300", "--set", "t_final=0.2", "--set", "snapshot_times=[0.0]"])
    assert rc == 0
    files = sorted(p.name for p in out.glob("trajectory_eps*.csv") if "snapshot" not in p.name)
    assert files == ["trajectory_eps0.0005.csv", "trajectory_eps0.01.csv", "trajectory_eps0.1.csv"]


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "--preset", "homogeneous", "--set", "n_agents=-3"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert cli.main(["run", "--preset", "power-law", "--set", "dt=0.01"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc = cli.main(["run", "--preset", "homogeneous", "--out", str(blocker / "sub"),
                   "--set", "n_agents=100", "--set", "t_final=0.0", "--set", "snapshot_times=[0.0]"])
    assert rc == 3


def test_cli_oracle_and_graphon(tmp_path, capsys):
    out = tmp_path / "beta.csv"
    assert cli.main(["oracle", "beta", "--lam", "0.25", "--points", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "w,density,cdf"
    w, dens, cdf = map(float, lines[3].split(","))
    assert w == 0.0 and dens == pytest.approx(1.09375) and cdf == pytest.approx(0.5)
    assert cli.main(["graphon", "--preset", "power-law"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["p_norm"]["1.0"] == pytest.approx(1.0)
    assert report["p_norm"]["inf"] == "divergent" or report["p_norm"]["inf"] == float("inf")
    assert 0.74 < report["in_degree"]["1.0"] < 0.75  # truncation at Sigma trims the mass slightly


def test_step_graphon_config(tmp_path):
    m = tmp_path / "adj.csv"
    m.write_text("0,1,1\n1,0,1\n1,1,0\n")
    cfg = preset("homogeneous", graphon_kind="step", graphon_matrix=str(m), n_agents=300,
                 t_final=0.1, epsilon=1e-2, snapshot_times=[0.0])
    g = build_model(cfg).graphon
    assert g.sup() == 1.0 and g.in_degree(0.1) == pytest.approx(2 / 3)
