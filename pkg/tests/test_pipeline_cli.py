import json

import numpy as np
import pytest

from counselor import pipeline
from counselor.cli import main
from counselor.config import load_config


@pytest.fixture(scope="module")
def prepared(synth_dataset):
    cfg = load_config(path=synth_dataset["config"], env={})
    return pipeline.prepare(cfg)


class TestPrepare:
    def test_symbols_and_exclusions(self, prepared):
        assert set(prepared.symbols) == {"AAA", "BBB", "CCC", "NOF"}
        assert prepared.fundamentals_symbols == ("AAA", "BBB", "CCC")
        assert prepared.excluded == {}

    def test_gap_symbol_excluded(self, synth_dataset):
        cfg = load_config(
            path=synth_dataset["config"],
            env={},
            overrides={"universe": ("AAA", "GAP")},
        )
        prep = pipeline.prepare(cfg)
        assert "GAP" in prep.excluded
        assert prep.symbols == ("AAA",)

    def test_predictions_cover_test_range(self, prepared):
        lo, hi = pipeline.decision_day_range(
            prepared.data, prepared.config.covariance_window
        )
        assert lo < hi
        expected = pipeline.expected_returns_at(prepared.data, lo)
        assert expected.shape == (4,)
        assert np.all(np.isfinite(expected))

    def test_fic_data_restricts_universe(self, prepared):
        fdata = prepared.fic_data()
        assert fdata.symbols == ("AAA", "BBB", "CCC")
        assert fdata.smoothed.shape[0] == 3

    def test_custom_rulebase_dir_loaded_and_checked(self, synth_dataset, tmp_path):
        from importlib import resources

        from counselor.config import load_config, with_overrides
        from counselor.errors import ParseError

        for name in ("self_stock", "pairwise_stocks", "fundamental"):
            text = resources.files("counselor.rulebases").joinpath(f"{name}.rules").read_text()
            (tmp_path / f"{name}.rules").write_text(text)
        cfg = load_config(path=synth_dataset["config"], env={})
        rbs = pipeline.load_rulebases(with_overrides(cfg, rulebase_dir=str(tmp_path)))
        assert len(rbs.self_stock.rules) == 27

        # an incomplete custom table is rejected at load time
        broken = (tmp_path / "self_stock.rules").read_text().splitlines()
        (tmp_path / "self_stock.rules").write_text("\n".join(broken[:-1]) + "\n")
        with pytest.raises(ValueError):
            pipeline.load_rulebases(with_overrides(cfg, rulebase_dir=str(tmp_path)))


class TestCli:
    def run(self, synth_dataset, *argv):
        return main(["--config", str(synth_dataset["config"]), *argv])

    def test_ingest(self, synth_dataset, capsys):
        assert self.run(synth_dataset, "ingest") == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["rows"]["AAA"] == 220
        assert summary["lacking_fundamentals"] == ["NOF"]

    def test_indicators_csv(self, synth_dataset, capsys):
        assert self.run(synth_dataset, "indicators", "--symbol", "AAA") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "date,adx,spdi,smdi,sar"
        assert len(lines) == 221

    def test_recommend_portfolio(self, synth_dataset, capsys):
        assert self.run(synth_dataset, "recommend", "--method", "portfolio") == 0
        out = capsys.readouterr().out
        lines = [l for l in out.strip().splitlines() if not l.startswith("#")]
        assert lines[0] == "symbol,weight"
        weights = {l.split(",")[0]: float(l.split(",")[1]) for l in lines[1:]}
        assert abs(sum(weights.values()) - 1.0) < 1e-6
        assert "# method=portfolio eta=0.3" in out

    def test_recommend_fic(self, synth_dataset, capsys):
        assert self.run(synth_dataset, "recommend", "--method", "fic") == 0
        lines = [
            l
            for l in capsys.readouterr().out.strip().splitlines()
            if not l.startswith("#")
        ]
        assert len(lines) == 4  # header + 3 stocks with fundamentals

    def test_backtest_all_methods(self, synth_dataset, capsys, tmp_path):
        out_prefix = tmp_path / "ledger"
        assert (
            self.run(
                synth_dataset,
                "backtest",
                "--days", "5",
                "--budget", "1000",
                "--out", str(out_prefix),
            )
            == 0
        )
        summary = json.loads(capsys.readouterr().out)
        assert set(summary["final_budget"]) == {"portfolio", "fic", "random"}
        for method in ("portfolio", "fic", "random"):
            assert (tmp_path / f"ledger.{method}.csv").exists()

    def test_report_sp_mode(self, synth_dataset, capsys):
        assert self.run(synth_dataset, "report", "--modes", "SP") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("symbol,mode,hr,")
        assert len(lines) == 5  # header + 4 stocks

    def test_tune_reduced_grid(self, synth_dataset, capsys):
        assert (
            self.run(
                synth_dataset,
                "tune",
                "--windows", "3",
                "--cs", "10",
                "--gammas", "0.01,0.1",
            )
            == 0
        )
        out = capsys.readouterr().out
        assert out.startswith("window,c,gamma,mean_hit_rate")
        assert "# best window=3 c=10" in out

    def test_frontier_csv(self, synth_dataset, capsys):
        assert self.run(synth_dataset, "frontier") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "mu,risk,expected_return,w_AAA,w_BBB,w_CCC,w_NOF"
        risks = [float(l.split(",")[1]) for l in lines[1:]]
        assert all(b >= a - 1e-9 for a, b in zip(risks, risks[1:]))

    def test_forecast_dump(self, synth_dataset, capsys):
        assert self.run(synth_dataset, "forecast", "--symbol", "AAA") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "date,actual,predicted,normalized_predicted"
        assert len(lines) > 10

    def test_unknown_symbol_exits_1(self, synth_dataset, capsys):
        code = self.run(synth_dataset, "indicators", "--symbol", "NOPE")
        assert code == 1
        err = capsys.readouterr().err
        assert "NOPE" in err

    def test_unknown_subcommand_exits_2(self, synth_dataset):
        with pytest.raises(SystemExit) as exc:
            main(["definitely-not-a-command"])
        assert exc.value.code == 2

    def test_out_file(self, synth_dataset, tmp_path):
        out = tmp_path / "ind.csv"
        assert (
            self.run(synth_dataset, "indicators", "--symbol", "BBB", "--out", str(out))
            == 0
        )
        assert out.read_text().startswith("date,adx")
