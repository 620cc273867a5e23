import numpy as np
import pytest

from hdtest.datagen import ScenarioConfig
from hdtest.harness import (
    PowerTable,
    RealDataset,
    StudyConfig,
    load_delimited,
    multi_kernel_rejections,
    run_power_study,
    run_realdata_study,
)
from hdtest.kernels import FAMILIES, KernelSpec
from hdtest.permutation import PermutationPlan, permutation_test
from hdtest.statistic import LabeledSample


class TestStudyConfig:
    def test_validation(self):
        scen = (ScenarioConfig(example="1", p=10, n=5, m=5),)
        with pytest.raises(ValueError):
            StudyConfig(scenarios=scen, permutations=5)
        with pytest.raises(ValueError):
            StudyConfig(scenarios=(), permutations=50)
        with pytest.raises(ValueError):
            StudyConfig(scenarios=scen, replications=0)


class TestRealDataset:
    def test_validation(self):
        with pytest.raises(ValueError, match="two classes"):
            RealDataset(classes={"a": np.zeros((5, 3))})
        with pytest.raises(ValueError, match="length"):
            RealDataset(classes={"a": np.zeros((5, 3)), "b": np.zeros((5, 4))})
        with pytest.raises(ValueError, match="fewer than 2"):
            RealDataset(classes={"a": np.zeros((5, 3)), "b": np.zeros((1, 3))})

    def test_p(self):
        ds = RealDataset(classes={"a": np.zeros((5, 3)), "b": np.ones((4, 3))})
        assert ds.p == 3


class TestPowerTable:
    def test_csv_roundtrip(self, tmp_path):
        t = PowerTable()
        t.add("scen", "l2", 0.25, 100, 1.234)
        t.add("scen", "l1", 0.5, 100, 1.234)
        path = tmp_path / "t.csv"
        t.write_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "scenario,kernel,rejection_rate,mc_standard_error,replications"
        assert lines[1].startswith("scen,l2,0.25,")
        assert t.rate("scen", "l1") == 0.5
        with pytest.raises(KeyError):
            t.rate("scen", "gaussian")

    def test_standard_error(self):
        t = PowerTable()
        t.add("s", "l2", 0.5, 100, 0.0)
        assert t.rows[0]["mc_standard_error"] == pytest.approx(0.05)


class TestMultiKernelRejections:
    def test_matches_single_kernel_tests(self):
        rng = np.random.default_rng(50)
        data = np.vstack(
            [rng.standard_normal((8, 6)), 0.8 + rng.standard_normal((7, 6))]
        )
        s = LabeledSample(data, 8, 7)
        kernels = tuple(KernelSpec(f) for f in FAMILIES)
        rej = multi_kernel_rejections(s, kernels, alpha=0.05, permutations=120, seed=77)
        for spec in kernels:
            single = permutation_test(
                s, spec, alpha=0.05, plan=PermutationPlan(count=120, seed=77)
            )
            assert rej[spec.family] == single.reject, spec.family


def _tiny_study(**kw):
    scen = (ScenarioConfig(example="1", p=12, n=6, m=6),)
    defaults = dict(
        scenarios=scen,
        kernels=(KernelSpec("l2"), KernelSpec("l1")),
        replications=30,
        permutations=40,
        seed=5,
    )
    defaults.update(kw)
    return StudyConfig(**defaults)


class TestRunPowerStudy:
    def test_single_replication_reproducible(self):
        cfg = _tiny_study(replications=1)
        a = run_power_study(cfg)
        b = run_power_study(cfg)
        assert [r["rejection_rate"] for r in a.rows] == [
            r["rejection_rate"] for r in b.rows
        ]
        assert len(a.rows) == 2

    def test_jobs_do_not_change_results(self):
        cfg = _tiny_study()
        serial = run_power_study(cfg, jobs=1)
        parallel = run_power_study(cfg, jobs=3)
        for a, b in zip(serial.rows, parallel.rows):
            assert a["rejection_rate"] == b["rejection_rate"]

    def test_null_scenario_rate_near_level(self):
        cfg = _tiny_study(replications=200, permutations=60)
        table = run_power_study(cfg)
        for row in table.rows:
            assert row["rejection_rate"] <= 0.05 + 3 * 0.05  # loose small-sample bound


class TestRunRealdataStudy:
    def _dataset(self):
        rng = np.random.default_rng(51)
        return RealDataset(
            classes={
                "a": rng.standard_normal((60, 8)),
                "b": 5.0 + rng.standard_normal((60, 8)),
            }
        )

    def test_separated_classes_full_power(self):
        table = run_realdata_study(
            self._dataset(), [10], replications=20, permutations=40, seed=1
        )
        for row in table.rows:
            assert row["rejection_rate"] == 1.0

    def test_same_class_control_near_level(self):
        table = run_realdata_study(
            self._dataset(),
            [10],
            replications=100,
            permutations=60,
            seed=2,
            labels=("a", "a"),
        )
        for row in table.rows:
            assert row["rejection_rate"] <= 0.2

    def test_oversized_request_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            run_realdata_study(self._dataset(), [100], replications=2, permutations=40)

    def test_deterministic_across_jobs(self):
        ds = self._dataset()
        a = run_realdata_study(ds, [8], replications=12, permutations=40, seed=3, jobs=1)
        b = run_realdata_study(ds, [8], replications=12, permutations=40, seed=3, jobs=4)
        assert [r["rejection_rate"] for r in a.rows] == [
            r["rejection_rate"] for r in b.rows
        ]


class TestLoadDelimited:
    def test_two_line_tsv(self, tmp_path):
        f = tmp_path / "d.tsv"
        f.write_text("1\t0.0\t1.0\n2\t3.0\t4.0\n2\t5.0\t6.0\n1\t9.0\t8.0\n")
        ds = load_delimited(f, "ucr-tsv")
        assert sorted(ds.classes) == ["1", "2"]
        assert ds.p == 2
        np.testing.assert_array_equal(ds.classes["1"][0], [0.0, 1.0])

    def test_csv_format(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("a,1,2\nb,3,4\na,5,6\nb,7,8\n")
        ds = load_delimited(f, "csv")
        assert ds.classes["b"].shape == (2, 2)

    def test_ragged_row_names_line(self, tmp_path):
        f = tmp_path / "d.tsv"
        f.write_text("1\t0.0\t1.0\n2\t3.0\n")
        with pytest.raises(ValueError, match="line 2"):
            load_delimited(f, "ucr-tsv")

    def test_non_numeric_names_line(self, tmp_path):
        f = tmp_path / "d.tsv"
        f.write_text("1\t0.0\t1.0\n2\tx\ty\n")
        with pytest.raises(ValueError, match="line 2"):
            load_delimited(f, "ucr-tsv")

    def test_empty_file(self, tmp_path):
        f = tmp_path / "d.tsv"
        f.write_text("")
        with pytest.raises(ValueError, match="no data rows"):
            load_delimited(f, "ucr-tsv")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError, match="unknown format"):
            load_delimited(tmp_path / "d.tsv", "parquet")
