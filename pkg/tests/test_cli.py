import json

import numpy as np
import pytest

from hdtest.cli import main


def _run(capsys, argv):
    assert main(argv) == 0
    return capsys.readouterr().out


class TestGenAndTest:
    def test_roundtrip(self, tmp_path, capsys):
        csv_path = tmp_path / "sample.csv"
        out = _run(
            capsys,
            ["gen", "--example", "1", "--p", "20", "--n", "10", "--m", "10",
             "--seed", "4", "--out", str(csv_path)],
        )
        assert "wrote 20 rows x 20 cols" in out
        data = np.loadtxt(csv_path, delimiter=",")
        assert data.shape == (20, 20)

        out = _run(
            capsys,
            ["test", str(csv_path), "--n", "10", "--kernel", "l2",
             "--perms", "60", "--seed", "1"],
        )
        fields = out.strip().split(",")
        assert len(fields) == 4
        float(fields[0]), float(fields[1]), float(fields[2])
        assert fields[3] in ("true", "false")

    def test_exact_mode(self, tmp_path, capsys):
        csv_path = tmp_path / "s.csv"
        rng = np.random.default_rng(0)
        np.savetxt(csv_path, rng.standard_normal((5, 3)), delimiter=",")
        out = _run(capsys, ["test", str(csv_path), "--n", "2", "--exact"])
        assert out.count(",") == 3

    def test_bad_group_size(self, tmp_path):
        csv_path = tmp_path / "s.csv"
        np.savetxt(csv_path, np.zeros((4, 2)), delimiter=",")
        with pytest.raises(SystemExit):
            main(["test", str(csv_path), "--n", "3"])

    def test_gen_from_json_config(self, tmp_path, capsys):
        cfg = {"example": "3i", "p": 8, "n": 5, "m": 6, "beta": 1.0, "seed": 2}
        cfg_path = tmp_path / "scen.json"
        cfg_path.write_text(json.dumps(cfg))
        out_path = tmp_path / "o.csv"
        _run(capsys, ["gen", "--config", str(cfg_path), "--out", str(out_path)])
        assert np.loadtxt(out_path, delimiter=",").shape == (11, 8)


class TestDiagnose:
    def test_report_fields(self, tmp_path, capsys):
        csv_path = tmp_path / "s.csv"
        rng = np.random.default_rng(1)
        np.savetxt(csv_path, rng.standard_normal((12, 6)), delimiter=",")
        out = _run(capsys, ["diagnose", str(csv_path), "--n", "6"])
        assert "mean_gap," in out
        assert "regime_hint," in out
        assert "v_xy," in out  # groups are big enough for moment estimates


class TestAsymptotics:
    def test_table_shape(self, capsys):
        out = _run(
            capsys,
            ["asymptotics", "--n", "4", "--m", "6", "--kernel", "l1",
             "--e-xy", "2.0", "--v-xy", "1.5"],
        )
        lines = out.strip().split("\n")
        assert lines[0] == "w,f_w,mu_nw,sigma2_nw,pmf"
        assert len(lines) == 1 + 5  # w = 0..min(n, m)
        first = lines[1].split(",")
        assert float(first[1]) == 1.0  # f(0)


class TestPowerlimit:
    def test_runs_exact(self, capsys):
        out = _run(
            capsys,
            ["powerlimit", "--n", "3", "--m", "3", "--v-xy", "2", "--exact",
             "--draws", "1000", "--seed", "5"],
        )
        assert out.startswith("power_limit,")


class TestStudyCommands:
    def _config(self, tmp_path):
        cfg = {
            "scenarios": [
                {"example": "1", "p": 10, "n": 5, "m": 5},
            ],
            "kernels": ["l2"],
            "replications": 5,
            "permutations": 30,
            "seed": 9,
        }
        path = tmp_path / "study.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_power_study(self, tmp_path, capsys):
        out_path = tmp_path / "table.csv"
        out = _run(
            capsys,
            ["power", "--config", str(self._config(tmp_path)), "--out", str(out_path)],
        )
        assert "wrote 1 rows" in out
        text = out_path.read_text()
        assert text.startswith("scenario,kernel,rejection_rate")

    def test_size_alias_and_seed_override(self, tmp_path, capsys):
        out_path = tmp_path / "size.csv"
        _run(
            capsys,
            ["size", "--config", str(self._config(tmp_path)), "--seed", "123",
             "--out", str(out_path)],
        )
        assert out_path.exists()


class TestRealdataCommand:
    def test_end_to_end(self, tmp_path, capsys):
        rng = np.random.default_rng(2)
        lines = []
        for _ in range(20):
            lines.append("1\t" + "\t".join(f"{v:.4f}" for v in rng.standard_normal(5)))
        for _ in range(20):
            lines.append("2\t" + "\t".join(f"{v:.4f}" for v in 3 + rng.standard_normal(5)))
        data_path = tmp_path / "d.tsv"
        data_path.write_text("\n".join(lines) + "\n")
        out_path = tmp_path / "rd.csv"
        out = _run(
            capsys,
            ["realdata", "--file", str(data_path), "--sizes", "5,10",
             "--replications", "4", "--perms", "30", "--out", str(out_path)],
        )
        assert "wrote 8 rows" in out  # 2 sizes x 4 kernels
