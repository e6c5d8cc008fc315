import pandas as pd
import pytest
import typer

from src.main import CLI_USAGE_ERROR, _split_learners, run_cli
from src.utils.file_handler import BENCH_COLUMNS, read_trace_file

HARD = "hard-single:c=1,eps=0.2,sigma=+"


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    """Logs and default outputs land in a scratch directory"""
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestSolve:
    def test_regions_method(self, capsys):
        """Hard instance optimum"""
        assert run_cli(["solve", "--gen", HARD]) == 0
        out = capsys.readouterr().out
        assert "value: 0.600000" in out
        assert "mapping: 0,1" in out

    @pytest.mark.parametrize("method", ["lp-reform", "brute-force"])
    def test_other_methods(self, capsys, method):
        """Joint LP and grid agree on the hard instance"""
        assert run_cli(["solve", "--gen", HARD, "--method", method]) == 0
        assert "value: 0.600000" in capsys.readouterr().out

    def test_unknown_method(self):
        """Bad method is a usage error"""
        assert run_cli(["solve", "--gen", HARD, "--method", "simplex"]) == 1

    def test_needs_one_source(self):
        """Neither --instance nor --gen"""
        assert run_cli(["solve"]) == 1


class TestRegions:
    def test_hard_instance(self, capsys):
        """Four regions, two of them boundary-only"""
        assert run_cli(["regions", "--gen", HARD]) == 0
        assert "4 regions (2 full-dimensional, 2 with slack 0)" in capsys.readouterr().out


class TestSimulate:
    def test_fixed_trace(self, workdir):
        """Fixed (0, 1) accumulates 0.2 per round"""
        out = str(workdir / "trace.csv")
        assert run_cli(["simulate", "--gen", HARD, "--learner", "fixed:0,1", "-T", "10", "--out", out]) == 0
        frame = read_trace_file(out)
        assert len(frame) == 10
        assert frame['cumulative_regret'].iloc[-1] == pytest.approx(2.0)

    def test_config_file(self, workdir):
        """Experiment documents drive the run"""
        config = workdir / "exp.yaml"
        config.write_text(f"generator: '{HARD}'\nlearner: tf-general\nT: 15\nreplications: 2\n")
        out = str(workdir / "trace.csv")
        assert run_cli(["simulate", "--config", str(config), "--out", out]) == 0
        assert sorted(read_trace_file(out)['run_id'].unique()) == [0, 1]

    def test_default_output_location(self, workdir):
        """Without --out the trace goes under the results directory"""
        assert run_cli(["simulate", "--gen", HARD, "--learner", "tf-general", "-T", "5"]) == 0
        assert list((workdir / "data" / "results").glob("trace_*.csv"))

    def test_horizon_below_region_count(self):
        """UCB with T below the number of playable regions exits with 2"""
        assert run_cli(["simulate", "--gen", HARD, "--learner", "ucb", "-T", "1"]) == 2

    def test_feedback_mismatch(self):
        """UCB on type feedback exits with 1"""
        assert run_cli(["simulate", "--gen", HARD, "--learner", "ucb", "--feedback", "type", "-T", "10"]) == 1


class TestBench:
    def test_small_bench(self, workdir):
        """Bench table and markdown report"""
        out, report = str(workdir / "bench.csv"), str(workdir / "bench.md")
        code = run_cli(["bench", "--gen", HARD, "--learners", "tf-general,fixed:0,1", "-T", "20", "--reps", "2",
                        "--out", out, "--report", report])
        assert code == 0
        frame = pd.read_csv(out)
        assert list(frame.columns) == BENCH_COLUMNS
        assert set(frame['learner']) == {"tf-general", "fixed:0,1"}
        assert "fixed:0,1" in (workdir / "bench.md").read_text()


class TestOracleCheck:
    def test_single_instance(self, capsys, workdir):
        """The hard instance passes every oracle"""
        report = str(workdir / "oracle.md")
        assert run_cli(["oracle-check", "--gen", HARD, "--grid", "0.01", "--samples", "200", "--report", report]) == 0
        assert "1/1 instances passed" in capsys.readouterr().out
        assert "PASS" in (workdir / "oracle.md").read_text()


class TestGenerate:
    def test_generate_then_solve(self, capsys, workdir):
        """Generated instance files load back"""
        path = str(workdir / "game.json")
        assert run_cli(["generate", "--gen", HARD, "--out", path]) == 0
        assert run_cli(["solve", "--instance", path]) == 0
        assert "value: 0.600000" in capsys.readouterr().out


class TestExitCodes:
    def test_unknown_flag(self):
        """Usage errors exit with 1"""
        assert run_cli(["solve", "--bogus"]) == 1

    def test_usage_errors_are_caught_by_their_base(self):
        """The usage error base covers what typer raises for bad options"""
        assert issubclass(typer.BadParameter, CLI_USAGE_ERROR)

    def test_flag_missing_value(self):
        """A flag without its value is a usage error, not a traceback"""
        assert run_cli(["solve", "--gen", "hard-single:c=1,eps=0.2,sigma=+", "--method"]) == 1

    def test_missing_file(self, workdir):
        """Missing instance files exit with 1"""
        assert run_cli(["solve", "--instance", str(workdir / "missing.json")]) == 1

    def test_bad_generator(self):
        """Unknown generator exits with 1"""
        assert run_cli(["solve", "--gen", "nope"]) == 1

    def test_learner_list_keeps_fixed_strategies(self):
        """Commas inside fixed:X stay with the strategy"""
        assert _split_learners("tf-general, fixed:0,1,ucb") == ["tf-general", "fixed:0,1", "ucb"]
