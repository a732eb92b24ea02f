import json
from pathlib import Path

import pytest

from pmctg.cli import main

CORPUS_LINES = [
    "the cat chased the dog .",
    "a dog saw the cat .",
    "the bird sang a song .",
    "a cat ate the fish .",
    "the dog chased a bird .",
    "the fish saw a song .",
] * 10


@pytest.fixture(scope="module")
def model_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus.txt"
    corpus.write_text("\n".join(CORPUS_LINES) + "\n")
    out = root / "model"
    code = main(
        ["train-lm", "--corpus", str(corpus), "--out", str(out), "--dim", "16"]
    )
    assert code == 0
    return out


class TestTrainLm:
    def test_artifacts_exist(self, model_dir):
        for name in ("vocab.tsv", "lm_forward.kn", "lm_backward.kn", "encoder.bin"):
            assert (model_dir / name).exists()

    def test_retrain_byte_identical(self, model_dir, tmp_path):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("\n".join(CORPUS_LINES) + "\n")
        out = tmp_path / "model2"
        assert main(
            ["train-lm", "--corpus", str(corpus), "--out", str(out), "--dim", "16"]
        ) == 0
        for name in ("vocab.tsv", "lm_forward.kn", "lm_backward.kn", "encoder.bin"):
            assert (out / name).read_bytes() == (model_dir / name).read_bytes()

    def test_order_one(self, tmp_path, capsys):
        corpus = tmp_path / "c.txt"
        corpus.write_text("a b\nb a\n")
        out = tmp_path / "m"
        assert main(
            ["train-lm", "--corpus", str(corpus), "--out", str(out), "--order", "1"]
        ) == 0
        assert "1-grams" in capsys.readouterr().out
        assert "\\2-grams" not in (out / "lm_forward.kn").read_text()

    def test_missing_corpus_fails(self, tmp_path):
        assert main(
            ["train-lm", "--corpus", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "m")]
        ) == 1


class TestK2s:
    def test_contains_keywords_in_order(self, model_dir, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        code = main(
            ["k2s", "--keywords", "cat,song", "--model", str(model_dir),
             "--steps", "15", "--seed", "3", "--trace", str(trace)]
        )
        assert code == 0
        out = capsys.readouterr().out.strip().splitlines()[-1].split()
        assert "cat" in out and "song" in out
        assert out.index("cat") < out.index("song")
        assert trace.exists()

    def test_single_keyword(self, model_dir, tmp_path, capsys):
        code = main(
            ["k2s", "--keywords", "dog", "--model", str(model_dir),
             "--steps", "5", "--seed", "1", "--no-trace"]
        )
        assert code == 0
        assert "dog" in capsys.readouterr().out.split()

    def test_oov_keyword_exit_2(self, model_dir, capsys):
        code = main(
            ["k2s", "--keywords", "zzzunknown", "--model", str(model_dir), "--no-trace"]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_missing_backend_exit_2(self, capsys, monkeypatch):
        monkeypatch.delenv("PMCTG_SERVER_URL", raising=False)
        assert main(["k2s", "--keywords", "cat", "--no-trace"]) == 2

    def test_deterministic_output_and_trace(self, model_dir, tmp_path, capsys):
        traces = []
        outputs = []
        for name in ("a.jsonl", "b.jsonl"):
            trace = tmp_path / name
            assert main(
                ["k2s", "--keywords", "cat,bird", "--model", str(model_dir),
                 "--steps", "10", "--seed", "42", "--trace", str(trace)]
            ) == 0
            outputs.append(capsys.readouterr().out)
            traces.append(trace.read_bytes())
        assert outputs[0] == outputs[1]
        assert traces[0] == traces[1]


class TestParaphrase:
    def test_line_aligned_deterministic(self, model_dir, tmp_path):
        inp = tmp_path / "in.txt"
        inp.write_text("the cat chased the dog .\na dog saw the cat .\n")
        out1, out2 = tmp_path / "o1.txt", tmp_path / "o2.txt"
        for out in (out1, out2):
            code = main(
                ["paraphrase", "--input", str(inp), "--out", str(out),
                 "--model", str(model_dir), "--steps", "8", "--seed", "5",
                 "--trace-dir", str(tmp_path / "traces")]
            )
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert len(out1.read_text().splitlines()) == 2
        assert (tmp_path / "traces" / "line_0000.jsonl").exists()

    def test_zero_steps_identity(self, model_dir, tmp_path):
        inp = tmp_path / "in.txt"
        inp.write_text("the cat chased the dog .\nthe bird sang a song .\n")
        out = tmp_path / "out.txt"
        code = main(
            ["paraphrase", "--input", str(inp), "--out", str(out),
             "--model", str(model_dir), "--steps", "0", "--no-trace"]
        )
        assert code == 0
        assert out.read_text() == inp.read_text()

    def test_jobs_preserve_order(self, model_dir, tmp_path):
        inp = tmp_path / "in.txt"
        lines = ["the cat chased the dog .", "a dog saw the cat .",
                 "the bird sang a song .", "a cat ate the fish ."]
        inp.write_text("\n".join(lines) + "\n")
        serial, threaded = tmp_path / "s.txt", tmp_path / "t.txt"
        for out, jobs in ((serial, "1"), (threaded, "3")):
            assert main(
                ["paraphrase", "--input", str(inp), "--out", str(out),
                 "--model", str(model_dir), "--steps", "5", "--seed", "9",
                 "--jobs", jobs, "--no-trace"]
            ) == 0
        assert serial.read_text() == threaded.read_text()


class TestEval:
    def test_identical_files(self, model_dir, tmp_path, capsys):
        hyp = tmp_path / "h.txt"
        hyp.write_text("the cat chased the dog .\na dog saw the cat .\n")
        code = main(
            ["eval", "--hyp", str(hyp), "--ref", str(hyp), "--judge", str(model_dir)]
        )
        assert code == 0
        records = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
        summary = [r for r in records if r["record"] == "summary"][0]
        assert summary["bleu"] == pytest.approx(1.0)
        assert summary["rouge1"] == pytest.approx(1.0)
        assert summary["count"] == 2
        assert summary["ibleu"] is None  # no src given

    def test_with_src_and_csv(self, model_dir, tmp_path, capsys):
        hyp = tmp_path / "h.txt"
        ref = tmp_path / "r.txt"
        src = tmp_path / "s.txt"
        hyp.write_text("the cat chased the dog .\n")
        ref.write_text("the cat chased the dog .\n")
        src.write_text("a bird sang a song .\n")
        code = main(
            ["eval", "--hyp", str(hyp), "--ref", str(ref), "--src", str(src),
             "--judge", str(model_dir), "--csv"]
        )
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0].startswith("index,bleu,ibleu")
        assert len(out) == 3  # header + 1 row + mean row

    def test_line_count_mismatch_exit_2(self, model_dir, tmp_path):
        hyp = tmp_path / "h.txt"
        ref = tmp_path / "r.txt"
        hyp.write_text("the cat .\n")
        ref.write_text("the cat .\nthe dog .\n")
        assert main(
            ["eval", "--hyp", str(hyp), "--ref", str(ref), "--judge", str(model_dir)]
        ) == 2

    def test_micro_files_match_library(self, model_dir, tmp_path, capsys):
        from pmctg import bleu, load_model_dir, tokenize

        bundle = load_model_dir(model_dir)
        hyp = tmp_path / "h.txt"
        ref = tmp_path / "r.txt"
        hyp.write_text("the cat chased a dog .\nthe bird sang .\na cat ate .\n")
        ref.write_text("the cat chased the dog .\nthe bird sang a song .\ndog ate .\n")
        assert main(
            ["eval", "--hyp", str(hyp), "--ref", str(ref), "--judge", str(model_dir)]
        ) == 0
        records = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
        rows = [r for r in records if r["record"] == "sentence"]
        for row, (h, r) in zip(
            rows, zip(hyp.read_text().splitlines(), ref.read_text().splitlines())
        ):
            expected = bleu(
                tokenize(h, bundle.vocabulary), tokenize(r, bundle.vocabulary)
            )
            assert row["bleu"] == pytest.approx(expected, abs=1e-9)


class TestCompare:
    def test_two_rows_and_budget(self, model_dir, tmp_path, capsys):
        inputs = tmp_path / "inputs.txt"
        inputs.write_text("cat,dog\n")
        code = main(
            ["compare", "--inputs", str(inputs), "--model", str(model_dir),
             "--trials", "1", "--target", "2.0", "--steps", "6", "--seed", "4"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "pmctg" in out and "uniform" in out
        for line in out.splitlines():
            if line.startswith(("pmctg", "uniform")):
                median = float(line.split()[1])
                assert median <= 6


class TestTraceCommand:
    def test_pretty_print(self, model_dir, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        assert main(
            ["k2s", "--keywords", "cat", "--model", str(model_dir),
             "--steps", "4", "--seed", "2", "--trace", str(trace)]
        ) == 0
        capsys.readouterr()
        assert main(["trace", str(trace)]) == 0
        out = capsys.readouterr().out
        assert "initial: cat" in out
        assert "best (index" in out
        assert "[   0]" in out
