import csv

import numpy as np
import pytest

import cfmimo.cli as cli
from cfmimo.beamforming import NumericalError
from cfmimo.experiments import (
    ExperimentConfig,
    run_cdf,
    run_check,
    run_compare_centralized,
    run_compare_distributed,
    run_convergence,
)
from cfmimo.network import NetworkConfig

TINY = NetworkConfig.desk(K=8, L=4, N=2, Q=2, n_sim=16)


def tiny_cfg(kind, out_dir, **kw):
    defaults = dict(network=TINY, kind=kind, n_drops=2, master_seed=0, out_dir=str(out_dir))
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def read_rows(path):
    with open(path) as f:
        lines = [l for l in f if not l.startswith("#")]
    return list(csv.DictReader(lines))


class TestConvergence:
    def test_maxmin_traces_have_geometric_tails(self, tmp_path):
        cfg = tiny_cfg("converge-maxmin", tmp_path, n_drops=1)
        rows = read_rows(run_convergence(cfg))
        by_scenario = {}
        for r in rows:
            by_scenario.setdefault(r["scenario"], []).append(float(r["distance"]))
        assert set(by_scenario) == {"small-cells", "distributed", "centralized"}
        for scenario, dist in by_scenario.items():
            dist = np.array(dist)
            assert len(dist) > 11
            ratio = (dist[-1] / dist[-11]) ** 0.1
            assert ratio < 1.0, scenario

    def test_qos_emits_divergence_marker_for_small_cells(self, tmp_path):
        # desk profile, default seed: small-cell targets for 2.5 bit/s/Hz
        # are infeasible while both cell-free scenarios converge
        cfg = ExperimentConfig(
            network=NetworkConfig.desk(),
            kind="converge-qos",
            n_drops=1,
            master_seed=0,
            out_dir=str(tmp_path),
        )
        rows = read_rows(run_convergence(cfg))
        small = [r for r in rows if r["scenario"] == "small-cells"]
        assert len(small) == 1
        assert small[0]["iteration"] == "-1" and float(small[0]["distance"]) == np.inf
        for scenario in ("distributed", "centralized"):
            assert sum(r["scenario"] == scenario for r in rows) > 5

    def test_requires_single_drop(self, tmp_path):
        with pytest.raises(ValueError):
            run_convergence(tiny_cfg("converge-maxmin", tmp_path, n_drops=2))

    def test_deterministic_output(self, tmp_path):
        a = run_convergence(tiny_cfg("converge-maxmin", tmp_path / "a", n_drops=1))
        b = run_convergence(tiny_cfg("converge-maxmin", tmp_path / "b", n_drops=1))
        assert open(a, "rb").read() == open(b, "rb").read()


class TestCdf:
    def test_schema_counts_and_bound_ordering(self, tmp_path):
        cfg = tiny_cfg("cdf", tmp_path)
        rows = read_rows(run_cdf(cfg))
        # one row per (drop, user, scenario, bound)
        assert len(rows) == 2 * TINY.K * 3 * 2
        by_key = {
            (r["drop"], r["user"], r["scenario"], r["bound"]): float(r["rate"])
            for r in rows
        }
        for (drop, user, scenario, bound), rate in by_key.items():
            assert rate >= 0 and np.isfinite(rate)
            if bound == "uatf":
                assert rate <= by_key[(drop, user, scenario, "coherent")] + 1e-12

    def test_scenario_dominance_at_every_quantile(self, tmp_path):
        cfg = tiny_cfg("cdf", tmp_path, n_drops=3)
        rows = read_rows(run_cdf(cfg))
        series = {}
        for r in rows:
            if r["bound"] == "uatf":
                series.setdefault(r["scenario"], []).append(float(r["rate"]))
        small = np.sort(series["small-cells"])
        dist = np.sort(series["distributed"])
        cent = np.sort(series["centralized"])
        assert np.all(small <= dist + 1e-9)
        assert np.all(dist <= cent + 1e-9)

    def test_single_user_single_drop_atom(self, tmp_path):
        cfg = ExperimentConfig(
            network=NetworkConfig.desk(K=1, L=4, N=2, Q=2, n_sim=8),
            kind="cdf",
            n_drops=1,
            out_dir=str(tmp_path),
        )
        rows = read_rows(run_cdf(cfg))
        assert len(rows) == 6  # 3 scenarios x 2 bounds, one user
        for r in rows:
            assert float(r["rate"]) > 0

    def test_parallel_matches_serial_byte_for_byte(self, tmp_path):
        a = run_cdf(tiny_cfg("cdf", tmp_path / "serial", jobs=1))
        b = run_cdf(tiny_cfg("cdf", tmp_path / "parallel", jobs=2))
        assert open(a, "rb").read() == open(b, "rb").read()


def min_rates_by_drop_method(rows, bound="uatf"):
    acc = {}
    for r in rows:
        if r["bound"] != bound:
            continue
        key = (int(r["drop"]), r["method"])
        acc[key] = min(acc.get(key, np.inf), float(r["rate"]))
    return acc


class TestCompare:
    def test_centralized_methods_and_ordering(self, tmp_path):
        cfg = tiny_cfg("compare-centralized", tmp_path)
        rows = read_rows(run_compare_centralized(cfg))
        methods = {r["method"] for r in rows}
        assert methods == {"joint", "power-only", "short-term"}
        # short-term reports only the coherent bound
        assert not [r for r in rows if r["method"] == "short-term" and r["bound"] == "uatf"]
        mins = min_rates_by_drop_method(rows)
        for d in range(cfg.n_drops):
            assert mins[(d, "power-only")] <= mins[(d, "joint")] + 1e-9

    def test_distributed_methods_and_ordering(self, tmp_path):
        cfg = tiny_cfg("compare-distributed", tmp_path)
        rows = read_rows(run_compare_distributed(cfg))
        mins = min_rates_by_drop_method(rows)
        for d in range(cfg.n_drops):
            assert mins[(d, "mrc-lsfd")] <= mins[(d, "power-only")] + 1e-9
            assert mins[(d, "power-only")] <= mins[(d, "joint")] + 1e-9

    def test_zero_drops_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            tiny_cfg("compare-centralized", tmp_path, n_drops=0)


class TestCheck:
    def test_invariant_suite_passes_on_tiny_profile(self, tmp_path, capsys):
        checks = run_check(tiny_cfg("cdf", tmp_path))
        assert checks and all(ok for _, ok in checks)
        assert "[PASS]" in capsys.readouterr().out


class TestCli:
    def test_converge_single_problem(self, tmp_path, capsys):
        code = cli.main(
            ["converge", "--problem", "maxmin", "--out", str(tmp_path), "--seed", "1"]
        )
        assert code == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out == [str(tmp_path / "convergence_maxmin.csv")]

    def test_cdf_with_config_file(self, tmp_path, capsys):
        cfgfile = tmp_path / "tiny.cfg"
        cfgfile.write_text(
            "K=8\nL=4\nN=2\nQ=2\nn_sim=16  # training set\nn_drops=1\n"
        )
        code = cli.main(["cdf", "--out", str(tmp_path), "--config", str(cfgfile)])
        assert code == 0
        rows = read_rows(tmp_path / "cdf_rates.csv")
        assert len(rows) == 8 * 3 * 2

    def test_invalid_arguments_exit_2(self, tmp_path):
        assert cli.main(["cdf", "--drops", "0", "--out", str(tmp_path)]) == 2
        with pytest.raises(SystemExit) as exc:
            cli.main(["cdf", "--profile", "nope"])
        assert exc.value.code == 2

    def test_unknown_config_key_exit_2(self, tmp_path):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text("frobnicate=3\n")
        assert cli.main(["cdf", "--out", str(tmp_path), "--config", str(cfgfile)]) == 2

    def test_numerical_failure_exit_3(self, tmp_path, monkeypatch):
        def boom(cfg):
            raise NumericalError("synthetic failure", user_index=0)

        monkeypatch.setattr(cli, "run_cdf", boom)
        assert cli.main(["cdf", "--out", str(tmp_path)]) == 3

    def test_check_command_exit_0(self, tmp_path):
        cfgfile = tmp_path / "tiny.cfg"
        cfgfile.write_text("K=8\nL=4\nN=2\nQ=2\nn_sim=16\n")
        assert cli.main(["check", "--config", str(cfgfile)]) == 0
