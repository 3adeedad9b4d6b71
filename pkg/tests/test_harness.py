import os

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError
from scipy import stats

from app.exceptions import ConfigurationError
from app.harness import ablation_planner, point_config, run_ablation
from app.harness.ablation_executor import TABLE_COLUMNS
from app.main import main
from app.models.schemas import ScenarioConfig
from app.orchestrator import run_scenario, scenario_orchestrator
from app.predictors.kpin_predictor import KpinPredictor, create_predictor

from tests.helpers import tiny_config

TINY_FLAGS = [
    "--n-rx", "2", "--n-tx", "1", "--tau", "1", "--p", "1",
    "--train-length", "60", "--horizon", "10", "--t-s", "5",
    "--n-b", "2", "--n-e", "2", "--hidden-dim", "6", "--seed", "0",
]


class TestScenarioConfig:
    def test_defaults_are_valid(self):
        cfg = ScenarioConfig()
        assert cfg.warmup == cfg.t_s
        assert cfg.total_length == cfg.train_length + cfg.horizon

    @pytest.mark.parametrize(
        "overrides",
        [
            {"n_tx": 2, "tau": 1},
            {"n_b": 20, "train_length": 100, "t_s": 10},
            {"p": 60, "train_length": 60},
            {"test_warmup": 70, "train_length": 60},
            {"seeds": []},
        ],
    )
    def test_cross_field_constraints(self, overrides):
        with pytest.raises(ValidationError):
            ScenarioConfig(**overrides)

    def test_config_hash(self):
        assert tiny_config().config_hash() == tiny_config().config_hash()
        assert tiny_config().config_hash() != tiny_config(snr_db=10.0).config_hash()
        assert len(tiny_config().config_hash()) == 12

    def test_from_yaml_flattens_sections(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("antennas:\n  n_rx: 8\n  n_tx: 1\n  tau: 1\ntraining:\n  n_e: 3\nsnr_db: 10\n")
        cfg = ScenarioConfig.from_yaml(str(path), n_e=5, p=None)
        assert (cfg.n_rx, cfg.n_tx, cfg.snr_db, cfg.n_e, cfg.p) == (8, 1, 10.0, 5, 2)

    def test_train_config(self):
        train_cfg = tiny_config(label_noise=0.1).train_config(seed=3, strategy="S1")
        assert (train_cfg.t_s, train_cfg.n_b, train_cfg.strategy, train_cfg.seed, train_cfg.label_noise) == (5, 2, "S1", 3, 0.1)


class TestPredictorFactory:
    def test_method_names(self):
        for method in ("AR", "ARKF", "KPIN", "KPIN_MLP", "S1", "S2"):
            assert create_predictor(method).name == method
        mlp = create_predictor("KPIN_MLP")
        assert isinstance(mlp, KpinPredictor) and mlp.update_hidden is False
        assert create_predictor("S2").strategy == "S2"

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError):
            create_predictor("GRU")


class TestScenario:
    def test_reports_every_method(self):
        result = run_scenario(tiny_config(), ["AR", "ARKF", "KPIN", "S1"])
        assert [r.method for r in result.reports] == ["AR", "ARKF", "KPIN", "S1"]
        assert result.failed_seeds == []
        for r in result.reports:
            assert len(r.nse_per_step_db) == 10
            assert np.isfinite(r.nmse_db)
            np.testing.assert_allclose(r.nmse_db, 10 * np.log10(r.nmse_linear))
        assert result.reports[2].epoch_ms is not None
        assert result.reports[0].epoch_ms is None
        assert set(result.summary()["method"]) == {"AR", "ARKF", "KPIN", "S1"}

    def test_repeated_seed_is_reproducible(self):
        table = run_scenario(tiny_config(seeds=[7, 7]), ["ARKF", "KPIN"]).table()
        pd.testing.assert_frame_equal(
            table.iloc[:2].reset_index(drop=True).drop(columns="epoch_ms"),
            table.iloc[2:].reset_index(drop=True).drop(columns="epoch_ms"),
        )

    def test_untrained_network_trails_the_kalman_filter(self):
        cfg = tiny_config(channel_kind="ar_oracle", train_length=200, horizon=50, n_e=0)
        by_method = {r.method: r for r in run_scenario(cfg, ["ARKF", "KPIN"]).reports}
        kpin, arkf = by_method["KPIN"].nmse_db, by_method["ARKF"].nmse_db
        assert np.isfinite(kpin) and np.all(np.isfinite(by_method["KPIN"].nse_per_step_db))
        assert arkf <= kpin <= arkf + 20.0

    def test_unknown_methods_rejected(self):
        with pytest.raises(ConfigurationError):
            run_scenario(tiny_config(), ["AR", "LSTM"])
        with pytest.raises(ConfigurationError):
            run_scenario(tiny_config(), [])

    def test_short_replay_aborts_the_seed(self):
        cfg = tiny_config()
        state = scenario_orchestrator.run_seed(cfg, 0, [])
        short = state["channels"].slice(0, cfg.total_length - 1)
        aborted = scenario_orchestrator.run_seed(cfg, 0, ["AR"], channels=short)
        assert aborted["error"]
        assert aborted["reports"] == []

    def test_replayed_signals_are_reused(self):
        cfg = tiny_config()
        first = scenario_orchestrator.run_seed(cfg, 0, [])
        second = scenario_orchestrator.run_seed(cfg, 0, [], channels=first["channels"], signals=first["signals"])
        np.testing.assert_array_equal(second["window"].ssm.phi, first["window"].ssm.phi)
        assert second["pilot"].rho == first["signals"].rho


class TestAblation:
    def test_plan_skips_inadmissible_points(self):
        plan = ablation_planner.plan("batch_size", tiny_config())
        assert [p.value for p in plan.points] == [1, 5, 10]
        assert plan.metadata["base_config_hash"] == tiny_config().config_hash()

    def test_unknown_ablation(self):
        with pytest.raises(ConfigurationError):
            ablation_planner.plan("dropout", tiny_config())

    def test_point_config(self):
        cfg = point_config(tiny_config(), {"snr_db": 0.0})
        assert cfg.snr_db == 0.0 and cfg.n_rx == 2

    def test_table_layout(self):
        table = run_ablation("snr_sweep", tiny_config())
        assert list(table.columns) == TABLE_COLUMNS
        assert len(table) == 4 * 3
        assert set(table["value"]) == {0.0, 10.0, 20.0, 30.0}

    def test_gru_update_reports_extra_horizons(self):
        table = run_ablation("gru_update", tiny_config(horizon=25))
        assert set(table["method"]) == {"KPIN", "KPIN_MLP"}
        assert sorted(table.loc[table["method"] == "KPIN", "horizon"]) == [10, 25]


class TestCli:
    def test_pipeline_from_replay(self, tmp_path):
        out = ["--out-dir", str(tmp_path)]
        assert main(["generate", *out, *TINY_FLAGS]) == 0
        assert os.path.exists(tmp_path / "replay_seed0.npz")

        assert main(["fit", *out, *TINY_FLAGS, "--replay", "replay_seed0.npz"]) == 0
        assert os.path.exists(tmp_path / "model_seed0.json")

        replay_and_model = ["--replay", "replay_seed0.npz", "--model", "model_seed0.json"]
        assert main(["train", *out, *TINY_FLAGS, *replay_and_model]) == 0
        log = pd.read_csv(tmp_path / "training_log.csv")
        assert list(log["epoch"]) == [1, 2]

        assert main(["test", *out, *TINY_FLAGS, *replay_and_model, "--entries"]) == 0
        trace = pd.read_csv(tmp_path / "trace_seed0.csv")
        assert len(trace) == 10
        assert "h0_re" in trace.columns

    def test_run_writes_reports(self, tmp_path):
        assert main(["run", "--out-dir", str(tmp_path), *TINY_FLAGS, "--methods", "AR", "ARKF", "--format", "json"]) == 0
        files = os.listdir(tmp_path)
        assert any(f.startswith("reports_") and f.endswith(".csv") for f in files)
        assert any(f.startswith("summary_") and f.endswith(".json") for f in files)
        assert "profile_ARKF.json" in files

    def test_missing_replay_fails(self, tmp_path):
        assert main(["fit", "--out-dir", str(tmp_path), *TINY_FLAGS, "--replay", "missing.npz"]) == 1

    def test_invalid_config_fails(self, tmp_path):
        assert main(["generate", "--out-dir", str(tmp_path), *TINY_FLAGS, "--n-b", "50"]) == 1


def median_nmse(table: pd.DataFrame, **where) -> pd.Series:
    """Median NMSE (dB) over seeds per method, restricted to matching rows."""
    for column, value in where.items():
        table = table[table[column] == value]
    return table.groupby("method")["nmse_db"].median()


@pytest.mark.slow
class TestDeskScale:
    """Ordinal trends on the desk-scale surrogate scenario, as medians over five seeds."""

    base = ScenarioConfig(seeds=[0, 1, 2, 3, 4])

    def test_learned_gain_beats_the_kalman_filter(self):
        medians = median_nmse(run_scenario(self.base, ["ARKF", "KPIN"]).table())
        assert medians["KPIN"] <= medians["ARKF"] - 0.5

    def test_strategy_ladder(self):
        medians = median_nmse(run_ablation("strategies", self.base))
        assert medians["S1"] >= medians["S2"]
        assert abs(medians["S2"] - medians["KPIN"]) <= 1.0

    def test_label_noise_hurts_only_supervised_training(self):
        table = run_ablation("label_noise", self.base)
        clean = median_nmse(table, value=0.0)
        noisy = median_nmse(table, value=0.1)
        assert noisy["S1"] >= clean["S1"]
        assert noisy["S2"] >= clean["S2"]
        np.testing.assert_allclose(noisy["KPIN"], clean["KPIN"], rtol=1e-12)

    def test_frozen_hidden_state_never_helps(self):
        table = run_ablation("gru_update", self.base)
        for horizon in (10, 25, 50):
            medians = median_nmse(table, horizon=horizon)
            assert medians["KPIN_MLP"] - medians["KPIN"] >= 0.0, horizon

    def test_epoch_time_grows_linearly_with_batch_size(self):
        table = run_ablation("batch_size", self.base.model_copy(update={"n_e": 20}))
        per_point = table.groupby("value")["epoch_ms"].median()
        assert list(per_point.index) == [1, 5, 10, 20]
        fit = stats.linregress(per_point.index.to_numpy(dtype=float), per_point.to_numpy())
        assert fit.rvalue ** 2 > 0.95

    def test_aging_never_improves_prediction(self):
        table = run_ablation("aging_sweep", self.base)
        by_k = {k: median_nmse(table, value=k) for k in (0.5, 1.0, 2.0)}
        for method in ("AR", "ARKF", "KPIN"):
            assert by_k[0.5][method] <= by_k[1.0][method] <= by_k[2.0][method], method
