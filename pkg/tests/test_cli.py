import json

import numpy as np
import pytest

from bss_uwpd import Signal, evaluate_pair, read_wav, synth_source, write_wav
from bss_uwpd.cli import main

from helpers import speechlike_pair


@pytest.fixture()
def speech_wavs(tmp_path):
    s1, s2 = speechlike_pair(8192, seed=3)
    p1, p2 = tmp_path / "s1.wav", tmp_path / "s2.wav"
    write_wav(Signal(0.2 * s1.samples, 8000), p1)
    write_wav(Signal(0.2 * s2.samples, 8000), p2)
    return p1, p2


@pytest.fixture()
def mixture_dir(tmp_path, speech_wavs):
    out = tmp_path / "mixdir"
    assert main(["mix", str(speech_wavs[0]), str(speech_wavs[1]), "--out", str(out)]) == 0
    return out


class TestMix:
    def test_one_second_files_give_8k_mixtures(self, tmp_path):
        for name, seed in (("a.wav", 1), ("b.wav", 2)):
            write_wav(
                Signal(0.3 * synth_source("gaussian", 16000, seed=seed).samples, 16000),
                tmp_path / name,
            )
        out = tmp_path / "out"
        code = main(["mix", str(tmp_path / "a.wav"), str(tmp_path / "b.wav"),
                     "--out", str(out)])
        assert code == 0
        mix1 = read_wav(out / "mix1.wav")
        assert mix1.sample_rate_hz == 8000
        assert len(mix1) == 8000
        manifest = json.loads((out / "mix_manifest.json").read_text())
        assert manifest["n_samples"] == 8000

    def test_manifest_matrix_is_verbatim(self, tmp_path, speech_wavs):
        out = tmp_path / "out"
        main(["mix", str(speech_wavs[0]), str(speech_wavs[1]),
              "--matrix", "2,1,1,1", "--out", str(out)])
        manifest = json.loads((out / "mix_manifest.json").read_text())
        assert manifest["matrix"] == [[2.0, 1.0], [1.0, 1.0]]

    def test_inverse_recovers_decimated_sources(self, tmp_path, speech_wavs):
        out = tmp_path / "out"
        main(["mix", str(speech_wavs[0]), str(speech_wavs[1]), "--out", str(out)])
        manifest = json.loads((out / "mix_manifest.json").read_text())
        mixed = np.vstack(
            [read_wav(out / name).samples for name in manifest["mixtures"]]
        )
        unscaled = mixed / manifest["scale"]
        recovered = np.linalg.inv(np.array(manifest["matrix"])) @ unscaled
        refs = np.vstack([read_wav(p).samples for p in speech_wavs])
        assert np.max(np.abs(recovered - refs[:, : recovered.shape[1]])) < 1e-3

    def test_unreadable_input(self, tmp_path):
        code = main(["mix", str(tmp_path / "missing.wav"), str(tmp_path / "x.wav"),
                     "--out", str(tmp_path / "out")])
        assert code != 0
        assert not (tmp_path / "out").exists()


class TestSeparate:
    def test_proposed_writes_estimates_and_record(self, tmp_path, mixture_dir):
        out = tmp_path / "sep"
        code = main(["separate", str(mixture_dir / "mix1.wav"),
                     str(mixture_dir / "mix2.wav"), "--method", "proposed",
                     "--out", str(out), "--seed", "3"])
        assert code == 0
        assert (out / "est_proposed_1.wav").exists()
        assert (out / "est_proposed_2.wav").exists()
        record = json.loads((out / "runs.jsonl").read_text().splitlines()[0])
        assert record["method"] == "proposed"
        assert record["selected_node"] is not None
        assert record["seed"] == 3
        assert isinstance(record["iterations"], int)
        assert isinstance(record["converged"], bool)

    def test_sobi_record_has_no_node(self, tmp_path, mixture_dir):
        out = tmp_path / "sep"
        main(["separate", str(mixture_dir / "mix1.wav"),
              str(mixture_dir / "mix2.wav"), "--method", "sobi", "--out", str(out)])
        record = json.loads((out / "runs.jsonl").read_text().splitlines()[0])
        assert record["selected_node"] is None

    def test_same_seed_gives_identical_wavs(self, tmp_path, mixture_dir):
        outs = []
        for name in ("sep_a", "sep_b"):
            out = tmp_path / name
            main(["separate", str(mixture_dir / "mix1.wav"),
                  str(mixture_dir / "mix2.wav"), "--method", "proposed",
                  "--out", str(out), "--seed", "11"])
            outs.append(out)
        for est in ("est_proposed_1.wav", "est_proposed_2.wav"):
            assert (outs[0] / est).read_bytes() == (outs[1] / est).read_bytes()


class TestEvaluate:
    def test_perfect_estimates_hit_caps(self, tmp_path, speech_wavs, capsys):
        json_path = tmp_path / "rows.jsonl"
        code = main(["evaluate", str(speech_wavs[0]), str(speech_wavs[1]),
                     str(speech_wavs[0]), str(speech_wavs[1]),
                     "--json", str(json_path)])
        assert code == 0
        rows = [json.loads(line) for line in json_path.read_text().splitlines()]
        by_source = {row["source"]: row for row in rows}
        for key in ("source 1", "source 2"):
            assert by_source[key]["SIR"] == 300.0
            assert by_source[key]["SDR"] == 300.0
            assert by_source[key]["segSNR"] == 35.0
        table = capsys.readouterr().out
        assert "Average" in table

    def test_average_row_is_arithmetic_mean(self, tmp_path, mixture_dir, speech_wavs):
        sep = tmp_path / "sep"
        main(["separate", str(mixture_dir / "mix1.wav"),
              str(mixture_dir / "mix2.wav"), "--method", "fastica",
              "--out", str(sep), "--seed", "0"])
        json_path = tmp_path / "rows.jsonl"
        main(["evaluate", str(sep / "est_fastica_1.wav"),
              str(sep / "est_fastica_2.wav"),
              str(speech_wavs[0]), str(speech_wavs[1]), "--json", str(json_path)])
        rows = [json.loads(line) for line in json_path.read_text().splitlines()]
        average = next(row for row in rows if row["source"] == "Average")
        sources = [row for row in rows if row["source"] != "Average"]
        for column in ("SIR", "SDR", "segSNR", "overallSNR"):
            mean = np.mean([row[column] for row in sources])
            assert abs(average[column] - mean) < 1e-9


class TestExperiment:
    def test_full_run_report(self, tmp_path, speech_wavs):
        out = tmp_path / "exp"
        code = main(["experiment", str(speech_wavs[0]), str(speech_wavs[1]),
                     "--out", str(out), "--seed", "4"])
        assert code == 0
        report = (out / "report.txt").read_text()
        assert "proposed" in report and "fastica" in report and "sobi" in report
        rows = [json.loads(line) for line in (out / "report.jsonl").read_text().splitlines()]
        methods = {row["method"] for row in rows}
        assert methods == {"proposed", "fastica", "sobi"}
        records = [json.loads(line) for line in (out / "runs.jsonl").read_text().splitlines()]
        assert len(records) == 3

    def test_report_matches_metrics_recomputation(self, tmp_path, speech_wavs):
        out = tmp_path / "exp"
        main(["experiment", str(speech_wavs[0]), str(speech_wavs[1]),
              "--methods", "fastica", "--out", str(out), "--seed", "4"])
        refs = [read_wav(out / name) for name in ("ref1.wav", "ref2.wav")]
        ests = [read_wav(out / name) for name in ("est_fastica_1.wav", "est_fastica_2.wav")]
        report = evaluate_pair(ests, refs)
        rows = [json.loads(line) for line in (out / "report.jsonl").read_text().splitlines()]
        for index, source in enumerate(report.per_source):
            row = next(r for r in rows if r["source"] == f"source {index + 1}")
            assert abs(row["SIR"] - source.sir_db) < 1e-12
            assert abs(row["SDR"] - source.sdr_db) < 1e-12
            assert abs(row["segSNR"] - source.seg_snr_db) < 1e-12
            assert abs(row["overallSNR"] - source.overall_snr_db) < 1e-12

    def test_seed_env_fallback(self, tmp_path, speech_wavs, monkeypatch):
        monkeypatch.setenv("BSS_UWPD_SEED", "123")
        out = tmp_path / "exp"
        code = main(["experiment", str(speech_wavs[0]), str(speech_wavs[1]),
                     "--methods", "sobi", "--out", str(out)])
        assert code == 0
        record = json.loads((out / "runs.jsonl").read_text().splitlines()[0])
        assert record["seed"] == 123

    def test_single_method_section(self, tmp_path, speech_wavs):
        out = tmp_path / "exp"
        code = main(["experiment", str(speech_wavs[0]), str(speech_wavs[1]),
                     "--methods", "sobi", "--out", str(out), "--seed", "4"])
        assert code == 0
        rows = [json.loads(line) for line in (out / "report.jsonl").read_text().splitlines()]
        assert {row["method"] for row in rows} == {"sobi"}
        assert not (out / "est_proposed_1.wav").exists()

    def test_missing_input_leaves_no_artifacts(self, tmp_path, speech_wavs):
        out = tmp_path / "exp"
        code = main(["experiment", str(tmp_path / "nope.wav"), str(speech_wavs[1]),
                     "--out", str(out)])
        assert code != 0
        assert not out.exists()

    def test_identical_source_paths_rejected(self, tmp_path, speech_wavs):
        out = tmp_path / "exp"
        code = main(["experiment", str(speech_wavs[0]), str(speech_wavs[0]),
                     "--out", str(out)])
        assert code != 0
        assert not out.exists()

    def test_proposed_and_fastica_exceed_30db(self, tmp_path):
        s1, s2 = speechlike_pair(32768, seed=1)
        p1, p2 = tmp_path / "s1.wav", tmp_path / "s2.wav"
        write_wav(Signal(0.2 * s1.samples, 8000), p1)
        write_wav(Signal(0.2 * s2.samples, 8000), p2)
        out = tmp_path / "exp"
        code = main(["experiment", str(p1), str(p2),
                     "--methods", "proposed,fastica", "--out", str(out),
                     "--seed", "0"])
        assert code == 0
        rows = [json.loads(line) for line in (out / "report.jsonl").read_text().splitlines()]
        for row in rows:
            if row["source"] != "Average":
                assert row["SIR"] > 30.0
