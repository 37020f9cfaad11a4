"""File formats and the command-line workflow."""

import json
import subprocess
import sys

import numpy as np
import pytest

from sparse_parafac import (
    CategoricalDataset,
    GibbsConfig,
    PriorConfig,
    run_chain,
)
from sparse_parafac import io as spio
from sparse_parafac.cli import main
from sparse_parafac.errors import DataError


class TestParseDatasetCsv:
    def test_integer_codes(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n2,1\n")
        ds, label_maps, columns = spio.parse_dataset_csv(path)
        assert (ds.n, ds.p) == (2, 2)
        assert ds.levels.tolist() == [2, 2]
        assert columns == ["a", "b"]
        assert label_maps == {}

    def test_labels_first_appearance(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("s1,s2\nA,T\nC,G\nG,A\nT,C\nA,A\n")
        ds, label_maps, _ = spio.parse_dataset_csv(path)
        assert ds.levels.tolist() == [4, 4]
        assert label_maps["s1"] == {"A": 1, "C": 2, "G": 3, "T": 4}
        assert label_maps["s2"] == {"T": 1, "G": 2, "A": 3, "C": 4}
        assert ds.values[0].tolist() == [1, 1]

    def test_empty_cell_is_missing(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,\n2,1\n1,2\n")
        ds, _, _ = spio.parse_dataset_csv(path)
        assert ds.values[0, 1] == 0

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n2\n")
        with pytest.raises(DataError, match="row 3"):
            spio.parse_dataset_csv(path)

    def test_nonpositive_code_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n0,1\n")
        with pytest.raises(DataError, match="non-positive"):
            spio.parse_dataset_csv(path)

    def test_declared_levels(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n1,1\n")
        ds, _, _ = spio.parse_dataset_csv(path, declared_levels=[3, 2])
        assert ds.levels.tolist() == [3, 2]
        with pytest.raises(DataError, match="fewer than 2 levels"):
            spio.parse_dataset_csv(path)  # column a is constant

    def test_roundtrip(self, tmp_path):
        values = np.array([[1, 2, 0], [2, 1, 3], [1, 1, 1]])
        ds = CategoricalDataset(values=values, levels=[2, 2, 3])
        path = tmp_path / "d.csv"
        spio.write_dataset_csv(path, ds)
        back, _, columns = spio.parse_dataset_csv(path, declared_levels=[2, 2, 3])
        assert np.array_equal(back.values, values)
        assert columns == ["v1", "v2", "v3"]


class TestDrawSerialization:
    @staticmethod
    def tiny_run(tmp_path, seed=5):
        rng = np.random.default_rng(1)
        dataset = CategoricalDataset(values=rng.integers(1, 3, (10, 3)), levels=[2, 2, 2])
        config = GibbsConfig(
            prior=PriorConfig(levels=[2, 2, 2], K=2, gamma=1.0),
            iterations=12, burn_in=2, thin=2, seed=seed,
        )
        samples = run_chain(dataset, config)
        meta = {
            "levels": [2, 2, 2],
            "baseline": [draw.tolist() for draw in samples.draws[0].baseline[:, :2]],
            "seed": seed,
        }
        spio.write_run(tmp_path, samples, meta)
        return samples

    def test_roundtrip(self, tmp_path):
        samples = self.tiny_run(tmp_path)
        back, meta = spio.read_run(tmp_path)
        assert len(back) == len(samples) == 5
        for a, b in zip(samples.draws, back.draws):
            assert np.allclose(a.lam, b.lam, atol=1e-15)
            assert np.allclose(a.nu, b.nu, atol=1e-15)
            assert np.array_equal(a.active, b.active)
            assert a.alpha == b.alpha
            b.validate()

    def test_trace_columns(self, tmp_path):
        self.tiny_run(tmp_path)
        header = (tmp_path / spio.TRACE_FILE).read_text().splitlines()[0]
        assert header == "draw,alpha,occupied_components,active_flags"


class TestMatrixAndHistogramFiles:
    def test_matrix_roundtrip(self, tmp_path):
        mat = np.array([[1.0, 0.25], [0.25, 1.0]])
        spio.write_matrix_csv(tmp_path / "m.csv", mat, ["v1", "v2"])
        back, labels = spio.read_matrix_csv(tmp_path / "m.csv")
        assert labels == ["v1", "v2"]
        assert np.array_equal(back, mat)

    def test_histogram_roundtrip(self, tmp_path):
        edges = np.array([0.0, 0.5, 1.0])
        counts = np.array([3, 7])
        spio.write_histogram_csv(tmp_path / "h.csv", edges, counts)
        e, c = spio.read_histogram_csv(tmp_path / "h.csv")
        assert np.array_equal(e, edges) and np.array_equal(c, counts)


SCENARIO = {
    "kind": "loglinear",
    "n": 60,
    "p": 6,
    "d": 2,
    "active_set": [2, 4],
    "coefficients": {"2": 1.0, "2,4": -0.5},
    "seed": 3,
}


class TestCliSimulate:
    def test_writes_dataset_and_truth(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": SCENARIO}))
        out = tmp_path / "sim"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        ds, _, _ = spio.parse_dataset_csv(out / "dataset.csv")
        assert (ds.n, ds.p) == (60, 6)
        truth = json.loads((out / "truth.json").read_text())
        assert truth["coefficients"]["2"] == 1.0
        assert truth["coefficients"]["4"] == 0.0
        assert "2,4" in truth["cramers_v"]
        assert truth["seed"] == 3

    def test_roundtrip_code_table(self, tmp_path):
        from sparse_parafac.simgen import gen_loglinear
        from sparse_parafac import ScenarioSpec

        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": SCENARIO}))
        out = tmp_path / "sim"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        ds, _, _ = spio.parse_dataset_csv(out / "dataset.csv")
        spec = ScenarioSpec(
            kind="loglinear", n=60, p=6, d=2, active_set=(2, 4),
            coefficients={(2,): 1.0, (2, 4): -0.5}, seed=3,
        )
        assert np.array_equal(ds.values, gen_loglinear(spec).values)


class TestCliFitAndSummarize:
    @pytest.fixture
    def sim_dir(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": SCENARIO}))
        out = tmp_path / "sim"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        return out

    def test_fit_retention_and_determinism(self, tmp_path, sim_dir):
        args = [
            "fit", "--data", str(sim_dir / "dataset.csv"),
            "--iterations", "100", "--burn-in", "50", "--thin", "5",
            "--k", "3", "--seed", "11",
        ]
        out1, out2 = tmp_path / "fit1", tmp_path / "fit2"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        lines = (out1 / spio.DRAWS_FILE).read_text().splitlines()
        assert len(lines) == 10
        assert (out1 / spio.DRAWS_FILE).read_bytes() == (out2 / spio.DRAWS_FILE).read_bytes()
        meta = json.loads((out1 / spio.META_FILE).read_text())
        assert meta["seed"] == 11 and meta["n_retained"] == 10

    def test_summarize_outputs(self, tmp_path, sim_dir):
        fit_dir = tmp_path / "fit"
        main([
            "fit", "--data", str(sim_dir / "dataset.csv"), "--out", str(fit_dir),
            "--iterations", "60", "--burn-in", "20", "--thin", "2",
            "--k", "3", "--seed", "2",
        ])
        out = tmp_path / "sum"
        code = main([
            "summarize", "--draws", str(fit_dir), "--out", str(out),
            "--cramers-v", "--beta", "2,4,5,6",
            "--data", str(sim_dir / "dataset.csv"),
        ])
        assert code == 0
        mat, labels = spio.read_matrix_csv(out / "cramers_v_mean.csv")
        assert labels == [f"v{j}" for j in range(1, 7)]
        assert np.allclose(mat, mat.T)
        assert np.allclose(np.diag(mat), 1.0)
        lo, _ = spio.read_matrix_csv(out / "cramers_v_q025.csv")
        hi, _ = spio.read_matrix_csv(out / "cramers_v_q975.csv")
        assert np.all(lo <= hi + 1e-12)
        emp, _ = spio.read_matrix_csv(out / "cramers_v_empirical.csv")
        assert np.allclose(emp, emp.T)
        summary = json.loads((out / "summary.json").read_text())
        assert len(summary["beta"]) == 15  # all nonempty subsets of a 4-variable set
        for entry in summary["beta"]:
            assert entry["q025"] <= entry["q500"] <= entry["q975"]
        assert (out / "hist_beta_2_4.csv").exists()

    def test_summarize_rejects_unknown_variables(self, tmp_path, sim_dir):
        fit_dir = tmp_path / "fit"
        main([
            "fit", "--data", str(sim_dir / "dataset.csv"), "--out", str(fit_dir),
            "--iterations", "30", "--burn-in", "10", "--thin", "2", "--k", "2",
        ])
        code = main([
            "summarize", "--draws", str(fit_dir), "--out", str(tmp_path / "s"),
            "--beta", "2,99",
        ])
        assert code == 2


class TestCliPriorSim:
    def test_coefficient_report(self, tmp_path):
        out = tmp_path / "ps"
        code = main([
            "prior-sim", "--out", str(out), "--p", "3", "--d", "2",
            "--gamma", "1.0", "--draws", "300", "--seed", "1",
        ])
        assert code == 0
        rows = (out / "prior_summary.csv").read_text().splitlines()
        assert rows[0] == "coefficient,mean,std,min,max,skewness,kurtosis"
        assert len(rows) == 8  # header + 7 subsets of {1,2,3}
        assert (out / "hist_beta_1.csv").exists()
        assert (out / "hist_beta_1_2_3.csv").exists()

    def test_huge_gamma_degenerates(self, tmp_path):
        out = tmp_path / "ps"
        main([
            "prior-sim", "--out", str(out), "--p", "3", "--d", "2",
            "--gamma", "1e9", "--draws", "300", "--seed", "1",
        ])
        import csv

        with (out / "prior_summary.csv").open() as fh:
            for row in csv.DictReader(fh):
                assert abs(float(row["mean"])) < 1e-6
                assert float(row["std"]) < 1e-6

    def test_main_l1_report(self, tmp_path):
        out = tmp_path / "ps"
        code = main([
            "prior-sim", "--out", str(out), "--p", "30", "--d", "2",
            "--draws", "100", "--seed", "1", "--report", "main-l1",
        ])
        assert code == 0
        assert (out / "hist_main_effect_l1.csv").exists()
        summary = json.loads((out / "prior_summary.json").read_text())
        assert summary["main_effect_l1"]["mean"] > 0


class TestCliReplicate:
    def test_tiny_replication(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "replicates": 2,
            "scenario": {**SCENARIO, "n": 80},
            "fit": {"iterations": 80, "burn_in": 30, "thin": 5, "K": 3},
            "beta_subsets": [[2, 4]],
        }))
        out = tmp_path / "rep"
        assert main(["replicate", "--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
        import csv

        with (out / "power_typeI_coverage.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert [r["coefficient"] for r in rows] == ["2", "4", "2,4"]
        for r in rows:
            assert r["n_replicates"] == "2"
            assert float(r["coverage"]) in (0.0, 0.5, 1.0)


class TestCliErrors:
    def test_unknown_config_key_exits_2(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": SCENARIO, "bogus": 1}))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_missing_data_file_exits_3(self, tmp_path):
        code = main(["fit", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")])
        assert code == 3

    def test_bad_codes_exit_3(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n-3,1\n")
        code = main(["fit", "--data", str(path), "--out", str(tmp_path / "o"),
                     "--iterations", "10", "--burn-in", "0", "--thin", "1"])
        assert code == 3

    def test_console_script_available(self):
        result = subprocess.run(
            [sys.executable, "-m", "sparse_parafac.cli", "--help"],
            capture_output=True, text=True,
        )
        assert result.returncode == 0
        assert "prior-sim" in result.stdout
