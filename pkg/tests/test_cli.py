import json

import numpy as np
import pytest

from umclust.cli import main


def _synth(tmp_path, **kw):
    args = ["synth", "--out", str(tmp_path / "data"), "--classes", "3",
            "--per-class", "10", "--text-dim", "6", "--video-dim", "5",
            "--audio-dim", "5", "--video-len", "3", "--audio-len", "3",
            "--seed", "0"]
    for k, v in kw.items():
        args += [f"--{k}", str(v)]
    assert main(args) == 0
    return tmp_path / "data"


def _config(tmp_path, data_dir, **overrides):
    lines = {
        "data.manifest": str(data_dir / "manifest.txt"),
        "out_dir": str(tmp_path / "out"),
        "seeds": "0",
        "train.pretrain_epochs": "1",
        "train.t0": "0.1",
        "train.delta": "0.5",
        "train.batch_size": "16",
        "enc.hidden_dim": "8",
    }
    lines.update(overrides)
    path = tmp_path / "run.cfg"
    path.write_text("".join(f"{k}={v}\n" for k, v in lines.items()))
    return path


class TestSynth:
    def test_writes_all_files(self, tmp_path):
        out = _synth(tmp_path)
        for name in ("manifest.txt", "text.umcf", "audio.umcf", "video.umcf",
                     "labels.txt"):
            assert (out / name).exists()

    def test_identical_bytes_twice(self, tmp_path):
        a = _synth(tmp_path / "a")
        b = _synth(tmp_path / "b")
        assert (a / "text.umcf").read_bytes() == (b / "text.umcf").read_bytes()

    def test_ambiguous_pairs_parsed(self, tmp_path):
        out = _synth(tmp_path, ambiguous="0:1")
        from umclust.data import load_dataset
        ds = load_dataset(out / "manifest.txt")
        text = np.stack([r.text for r in ds.records])
        c0 = text[ds.labels == 0].mean(axis=0)
        c1 = text[ds.labels == 1].mean(axis=0)
        c2 = text[ds.labels == 2].mean(axis=0)
        assert np.linalg.norm(c0 - c1) < np.linalg.norm(c0 - c2)


class TestRun:
    def test_report_written(self, tmp_path):
        data_dir = _synth(tmp_path)
        cfg = _config(tmp_path, data_dir, seeds="0,1")
        assert main(["run", "--config", str(cfg)]) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert len(report["per_seed"]) == 2
        assert "mean" in report["aggregate"]
        assert (tmp_path / "out" / "summary.csv").exists()
        assert (tmp_path / "out" / "assignments_seed0.txt").exists()
        assert (tmp_path / "out" / "embeddings_seed0.umcf").exists()

    def test_rerun_bitwise_identical_metrics(self, tmp_path):
        data_dir = _synth(tmp_path)
        cfg = _config(tmp_path, data_dir)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o1")]) == 0
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o2")]) == 0
        a = (tmp_path / "o1" / "assignments_seed0.txt").read_bytes()
        b = (tmp_path / "o2" / "assignments_seed0.txt").read_bytes()
        assert a == b
        ra = json.loads((tmp_path / "o1" / "report.json").read_text())
        rb = json.loads((tmp_path / "o2" / "report.json").read_text())
        assert ra["per_seed"][0]["metrics"] == rb["per_seed"][0]["metrics"]

    def test_set_overrides(self, tmp_path):
        data_dir = _synth(tmp_path)
        cfg = _config(tmp_path, data_dir)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                     "--set", "train.variant=text_only"]) == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["config"]["train.variant"] == "text_only"

    def test_missing_config_is_usage_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 1


class TestSweep:
    def test_grid_cardinality(self, tmp_path):
        data_dir = _synth(tmp_path)
        cfg = _config(tmp_path, data_dir)
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg), "--out", str(out),
                     "--grid", "train.tau1=0.1,0.2,0.3"]) == 0
        reports = list(out.glob("*/report.json"))
        assert len(reports) == 3
        assert (out / "sweep_summary.csv").exists()

    def test_empty_grid_is_usage_error(self, tmp_path):
        data_dir = _synth(tmp_path)
        cfg = _config(tmp_path, data_dir)
        assert main(["sweep", "--config", str(cfg),
                     "--out", str(tmp_path / "s")]) == 1


class TestEval:
    def test_hand_quadruple(self, tmp_path, capsys):
        (tmp_path / "gt.txt").write_text("0\n0\n1\n1\n")
        (tmp_path / "pred.txt").write_text("0\n1\n0\n1\n")
        assert main(["eval", "--assignments", str(tmp_path / "pred.txt"),
                     "--labels", str(tmp_path / "gt.txt")]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["nmi"] == pytest.approx(0.0, abs=1e-12)
        assert out["ari"] == pytest.approx(-0.5)
        assert out["acc"] == pytest.approx(0.5)
        assert out["fmi"] == 0.0

    def test_perfect_assignment(self, tmp_path, capsys):
        (tmp_path / "gt.txt").write_text("0\n1\n2\n0\n1\n2\n")
        (tmp_path / "pred.txt").write_text("1\n2\n0\n1\n2\n0\n")
        assert main(["eval", "--assignments", str(tmp_path / "pred.txt"),
                     "--labels", str(tmp_path / "gt.txt")]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["nmi"] == out["acc"] == out["fmi"] == out["ari"] == 1.0

    def test_length_mismatch_is_data_error(self, tmp_path):
        (tmp_path / "gt.txt").write_text("0\n1\n")
        (tmp_path / "pred.txt").write_text("0\n1\n0\n")
        assert main(["eval", "--assignments", str(tmp_path / "pred.txt"),
                     "--labels", str(tmp_path / "gt.txt")]) == 2


class TestGradCheckCommand:
    def test_passes(self, capsys):
        assert main(["grad-check", "--seed", "0"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
