"""End-to-end command-line tests driven through main(argv)."""

import json

import numpy as np
import pytest

from lctag.checkpoint import load_checkpoint
from lctag.cli import EXIT_COMPAT, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, main
from lctag.corpus import SynthSpec, read_corpus, synth_corpus, write_corpus
from lctag.decode import lc_decode
from lctag.emission import encode, project
from lctag.labelspace import (
    build_constraint_matrix,
    build_label_set,
    is_valid_sequence,
    read_vocab,
    write_vocab,
)


def make_corpus(tmp_path, name, types=1, sentences=60, noise=0.0, seed=0):
    spec = SynthSpec(entity_types=[f"T{i + 1}" for i in range(types)],
                     n_sentences=sentences, noise_rate=noise)
    sents, labels = synth_corpus(spec, seed=seed)
    corpus_path = tmp_path / f"{name}.tsv"
    vocab_path = tmp_path / f"{name}.vocab"
    write_corpus(sents, corpus_path)
    write_vocab(labels, vocab_path)
    return corpus_path, vocab_path, sents, labels


class TestSegment:
    def test_profile_c(self, tmp_path):
        src = tmp_path / "in.txt"
        out = tmp_path / "out.txt"
        src.write_text("甲。乙！丙", encoding="utf-8")
        assert main(["segment", "--input", str(src), "--output", str(out),
                     "--profile", "c"]) == EXIT_OK
        assert out.read_text(encoding="utf-8").splitlines() == ["甲。", "乙！", "丙"]

    def test_profile_ab_attaches_closer(self, tmp_path):
        src = tmp_path / "in.txt"
        out = tmp_path / "out.txt"
        src.write_text("曰「學。」來。", encoding="utf-8")
        assert main(["segment", "--input", str(src), "--output", str(out),
                     "--profile", "ab"]) == EXIT_OK
        assert out.read_text(encoding="utf-8").splitlines() == ["曰「學。」", "來。"]

    def test_missing_input_exits_2(self, tmp_path):
        out = tmp_path / "out.txt"
        assert main(["segment", "--input", str(tmp_path / "nope.txt"),
                     "--output", str(out)]) == EXIT_IO


class TestTrain:
    def test_separable_corpus_reports_high_accuracy(self, tmp_path, capsys):
        corpus, vocab, _, _ = make_corpus(tmp_path, "train")
        ckpt = tmp_path / "model.json"
        code = main(["train", "--corpus", str(corpus), "--labels", str(vocab),
                     "--checkpoint", str(ckpt), "--epochs", "15",
                     "--learning-rate", "10", "--dim", "8192", "--window", "1"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[-1].startswith("final token accuracy: ")
        assert float(lines[-1].split()[-1]) >= 0.99

    def test_zero_epochs_checkpoint_is_initialization(self, tmp_path):
        corpus, vocab, _, _ = make_corpus(tmp_path, "train", sentences=10)
        ckpt = tmp_path / "model.json"
        assert main(["train", "--corpus", str(corpus), "--labels", str(vocab),
                     "--checkpoint", str(ckpt), "--epochs", "0",
                     "--dim", "4096"]) == EXIT_OK
        loaded = load_checkpoint(ckpt)
        assert not loaded.projection.weights.any()
        assert not loaded.projection.bias.any()

    def test_unreadable_corpus_exits_2(self, tmp_path):
        _, vocab, _, _ = make_corpus(tmp_path, "train", sentences=10)
        assert main(["train", "--corpus", str(tmp_path / "missing.tsv"),
                     "--labels", str(vocab),
                     "--checkpoint", str(tmp_path / "m.json")]) == EXIT_IO

    def test_diverging_learning_rate_exits_3(self, tmp_path):
        corpus, vocab, _, _ = make_corpus(tmp_path, "train", sentences=40)
        with np.errstate(all="ignore"):
            code = main(["train", "--corpus", str(corpus), "--labels", str(vocab),
                         "--checkpoint", str(tmp_path / "m.json"),
                         "--epochs", "3", "--learning-rate", "1e200",
                         "--dim", "4096"])
        assert code == EXIT_NUMERICAL


class TestDecode:
    def train(self, tmp_path, arm="lc", types=1, noise=0.2):
        corpus, vocab, sents, labels = make_corpus(
            tmp_path, "data", types=types, noise=noise)
        ckpt = tmp_path / "model.json"
        assert main(["train", "--corpus", str(corpus), "--labels", str(vocab),
                     "--arm", arm, "--checkpoint", str(ckpt), "--epochs", "3",
                     "--learning-rate", "5", "--dim", "8192"]) == EXIT_OK
        return corpus, vocab, ckpt, sents, labels

    def test_lc_arm_output_always_valid(self, tmp_path):
        corpus, vocab, ckpt, _, labels = self.train(tmp_path)
        out = tmp_path / "pred.tsv"
        assert main(["decode", "--labels", str(vocab), "--corpus", str(corpus),
                     "--checkpoint", str(ckpt), "--arm", "lc",
                     "--output", str(out)]) == EXIT_OK
        cm = build_constraint_matrix(labels)
        for sent in read_corpus(out, labels):
            assert is_valid_sequence(labels, cm, sent.gold.indices)

    def test_matches_library_call_bit_exactly(self, tmp_path):
        corpus, vocab, ckpt, sents, labels = self.train(tmp_path)
        out = tmp_path / "pred.tsv"
        assert main(["decode", "--labels", str(vocab), "--corpus", str(corpus),
                     "--checkpoint", str(ckpt), "--arm", "lc",
                     "--output", str(out)]) == EXIT_OK
        loaded = load_checkpoint(ckpt)
        cm = build_constraint_matrix(labels)
        predicted = read_corpus(out, labels)
        for sent, got in zip(sents, predicted):
            logits = project(encode(sent.tokens, loaded.encoder), loaded.projection)
            assert got.gold.indices == lc_decode(logits, cm).indices

    def test_thread_count_does_not_change_output(self, tmp_path):
        corpus, vocab, ckpt, _, _ = self.train(tmp_path)
        out1 = tmp_path / "pred1.tsv"
        out4 = tmp_path / "pred4.tsv"
        for out, threads in [(out1, "1"), (out4, "4")]:
            assert main(["decode", "--labels", str(vocab), "--corpus", str(corpus),
                         "--checkpoint", str(ckpt), "--arm", "lc",
                         "--output", str(out), "--threads", threads]) == EXIT_OK
        assert out1.read_text(encoding="utf-8") == out4.read_text(encoding="utf-8")

    def test_vocab_hash_mismatch_exits_4(self, tmp_path):
        corpus, vocab, ckpt, _, _ = self.train(tmp_path)
        other = build_label_set(["X"])
        other_vocab = tmp_path / "other.vocab"
        write_vocab(other, other_vocab)
        # All-O corpus parses under either vocabulary; same k, different type
        # names, so only the checkpoint hash check can catch the mismatch.
        from lctag.corpus import Sentence
        from lctag.decode import LabelSequence
        o_corpus = tmp_path / "o.tsv"
        write_corpus(
            [Sentence(["甲", "乙"], LabelSequence([other.index_of("O")] * 2, other))],
            o_corpus,
        )
        code = main(["decode", "--labels", str(other_vocab), "--corpus", str(o_corpus),
                     "--checkpoint", str(ckpt), "--arm", "lc",
                     "--output", str(tmp_path / "pred.tsv")])
        assert code == EXIT_COMPAT

    def test_crf_arm_without_crf_checkpoint_exits_2(self, tmp_path):
        corpus, vocab, ckpt, _, _ = self.train(tmp_path, arm="lc")
        code = main(["decode", "--labels", str(vocab), "--corpus", str(corpus),
                     "--checkpoint", str(ckpt), "--arm", "crf",
                     "--output", str(tmp_path / "pred.tsv")])
        assert code == EXIT_IO

    def test_neither_checkpoint_nor_logits_exits_2(self, tmp_path):
        corpus, vocab, _, _ = make_corpus(tmp_path, "data", sentences=10)
        assert main(["decode", "--labels", str(vocab), "--corpus", str(corpus),
                     "--output", str(tmp_path / "pred.tsv")]) == EXIT_IO


class TestScore:
    def test_identical_files_scores_one(self, tmp_path, capsys):
        corpus, vocab, _, _ = make_corpus(tmp_path, "gold", sentences=20)
        assert main(["score", "--gold", str(corpus), "--pred", str(corpus),
                     "--labels", str(vocab)]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["f1"] == 1.0

    def test_all_outside_predictions_score_zero(self, tmp_path, capsys):
        corpus, vocab, sents, labels = make_corpus(tmp_path, "gold", sentences=20)
        o_idx = labels.index_of("O")
        from lctag.corpus import Sentence
        from lctag.decode import LabelSequence
        blank = [Sentence(s.tokens, LabelSequence([o_idx] * len(s.tokens), labels))
                 for s in sents]
        pred = tmp_path / "pred.tsv"
        write_corpus(blank, pred)
        assert main(["score", "--gold", str(corpus), "--pred", str(pred),
                     "--labels", str(vocab)]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["f1"] == 0.0


class TestGrid:
    def args(self, tmp_path, out_name, seed="0"):
        return ["grid", "--synth", "types=2,sentences=60,noise=0.2",
                "--seed", seed, "--epochs", "1", "--dim", "4096",
                "--output", str(tmp_path / out_name)]

    def test_reports_all_four_arms_and_seed(self, tmp_path):
        assert main(self.args(tmp_path, "grid.json")) == EXIT_OK
        table = json.loads((tmp_path / "grid.json").read_text(encoding="utf-8"))
        assert set(table["arms"]) == {"baseline", "lc", "crf", "crf+lc"}
        assert table["seed"] == 0

    def test_same_seed_reruns_identically(self, tmp_path):
        assert main(self.args(tmp_path, "g1.json")) == EXIT_OK
        assert main(self.args(tmp_path, "g2.json")) == EXIT_OK
        assert (tmp_path / "g1.json").read_text() == (tmp_path / "g2.json").read_text()

    def test_corpus_and_synth_together_exits_2(self, tmp_path):
        corpus, vocab, _, _ = make_corpus(tmp_path, "g", sentences=10)
        assert main(["grid", "--corpus", str(corpus), "--labels", str(vocab),
                     "--synth", "types=2,sentences=10"]) == EXIT_IO

    def test_unknown_synth_key_exits_2(self, tmp_path):
        assert main(["grid", "--synth", "types=2,bogus=1"]) == EXIT_IO


class TestAdvise:
    def test_matches_library_recommendation(self, capsys):
        assert main(["advise", "-L", "13", "-N", "3434"]) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["recommendation"] == "crf_plus_lc"

    def test_large_dataset_small_label_set_stays_crf(self, capsys):
        assert main(["advise", "-L", "25", "-N", "11307"]) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert out["recommendation"] == "lc_only"


class TestSynth:
    def test_writes_corpus_and_vocab(self, tmp_path):
        out = tmp_path / "c.tsv"
        vocab = tmp_path / "c.vocab"
        assert main(["synth", "--types", "3", "--sentences", "25",
                     "--noise", "0.1", "--output", str(out),
                     "--labels-out", str(vocab)]) == EXIT_OK
        labels = read_vocab(vocab)
        assert labels.k == 13
        assert len(read_corpus(out, labels)) == 25

    def test_deterministic_given_seed(self, tmp_path):
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        for path in (a, b):
            assert main(["synth", "--types", "2", "--sentences", "15",
                         "--noise", "0.3", "--seed", "7",
                         "--output", str(path)]) == EXIT_OK
        assert a.read_text(encoding="utf-8") == b.read_text(encoding="utf-8")
