from pathlib import Path

from click.testing import CliRunner

from rntk_lab.cli import main


def run(runner, *args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestCliWorkflow:
    def test_gen_data_then_regress(self, tmp_path):
        runner = CliRunner()
        run(runner, "gen-data", "--n", "30", "--seed", "5", "--out", str(tmp_path))
        data_file = tmp_path / "data.csv"
        assert data_file.exists()
        run(
            runner,
            "regress",
            str(data_file),
            "--L",
            "10",
            "--epochs",
            "6",
            "--record-stride",
            "3",
            "--compare",
            "--out",
            str(tmp_path),
        )
        assert (tmp_path / "regress.csv").exists()
        assert (tmp_path / "regress.svg").exists()

    def test_kernel_sweep_deterministic_bytes(self, tmp_path):
        runner = CliRunner()
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            run(
                runner,
                "kernel-sweep",
                "--alphas",
                "1,2",
                "--L-grid",
                "10,20",
                "--reps",
                "2",
                "--seed",
                "42",
                "--out",
                str(out),
                "--no-plot",
            )
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
        assert not (out1 / "sweep.svg").exists()

    def test_eigen_table(self, tmp_path):
        runner = CliRunner()
        run(runner, "eigen", "--K", "3", "--out", str(tmp_path))
        text = (tmp_path / "eigen.csv").read_text()
        assert "closed_form" in text and "quadrature" in text

    def test_finite_width_tiny(self, tmp_path):
        runner = CliRunner()
        run(
            runner,
            "finite-width",
            "--m-grid",
            "32,64",
            "--n",
            "6",
            "--epochs",
            "2",
            "--seeds",
            "1",
            "--lr",
            "0.3",
            "--out",
            str(tmp_path),
        )
        lines = (tmp_path / "finite_width.csv").read_text().splitlines()
        assert lines[1] == "m,seed,init_kernel_gap,prediction_gap,risk_gap"

    def test_bad_input_reports_detail(self, tmp_path):
        runner = CliRunner()
        data = tmp_path / "bogus.csv"
        data.write_text("a,b\n1,2\n")
        result = runner.invoke(
            main, ["regress", str(data), "--L", "3", "--out", str(tmp_path)]
        )
        assert result.exit_code != 0
        assert "failed" in result.output
