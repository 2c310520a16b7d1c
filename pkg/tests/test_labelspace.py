import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lctag.corpus import encode_entities, extract_entities
from lctag.decode import LabelSequence
from lctag.errors import InvalidInputError
from lctag.labelspace import (
    Label,
    PositionTag,
    build_constraint_matrix,
    build_label_set,
    format_vocab,
    is_valid_sequence,
    read_vocab,
    write_vocab,
)


def enumerate_rule_count(T: int) -> int:
    """Count allowed transitions by checking the five rules pairwise."""
    labels = build_label_set([f"X{i}" for i in range(T)])
    count = 0
    for src in labels.labels:
        for dst in labels.labels:
            if src.tag in (PositionTag.B, PositionTag.M):
                ok = (
                    dst.entity_type == src.entity_type
                    and dst.tag in (PositionTag.M, PositionTag.E)
                )
            else:
                ok = dst.tag in (PositionTag.B, PositionTag.S, PositionTag.O)
            count += ok
    return count


class TestBuildLabelSet:
    def test_nine_types_gives_37(self):
        labels = build_label_set([f"X{i}" for i in range(9)])
        assert labels.k == 37

    def test_single_type_ordering(self):
        labels = build_label_set(["PER"])
        assert [lab.name for lab in labels.labels] == [
            "B-PER",
            "M-PER",
            "E-PER",
            "S-PER",
            "O",
        ]
        assert labels.k == 5

    def test_three_types_gives_13(self):
        assert build_label_set(["PER", "LOC", "ORG"]).k == 13

    def test_index_bijection(self):
        labels = build_label_set(["PER", "LOC"])
        for i, lab in enumerate(labels.labels):
            assert labels.index_of(lab.name) == i
            assert labels.name_of(i) == lab.name

    @pytest.mark.parametrize("bad", [[], ["PER", "PER"], ["PER", ""]])
    def test_invalid_types_rejected(self, bad):
        with pytest.raises(InvalidInputError):
            build_label_set(bad)

    def test_unsupported_scheme_rejected(self):
        with pytest.raises(InvalidInputError):
            build_label_set(["PER"], scheme="BIO")


class TestConstraintMatrix:
    def test_six_types_193_allowed(self):
        labels = build_label_set([f"X{i}" for i in range(6)])
        assert build_constraint_matrix(labels).allowed_transition_count() == 193

    def test_one_type_13_allowed(self):
        # Frozen from enumerate_rule_count(1).
        labels = build_label_set(["PER"])
        assert build_constraint_matrix(labels).allowed_transition_count() == 13
        assert enumerate_rule_count(1) == 13

    @pytest.mark.parametrize("T", range(1, 11))
    def test_closed_form_matches_enumeration(self, T):
        labels = build_label_set([f"X{i}" for i in range(T)])
        cm = build_constraint_matrix(labels)
        assert cm.allowed_transition_count() == 4 * T * T + 8 * T + 1
        assert cm.allowed_transition_count() == enumerate_rule_count(T)

    def test_start_and_end_masks(self):
        labels = build_label_set(["PER"])
        cm = build_constraint_matrix(labels)
        names = [lab.name for lab in labels.labels]
        start = {n for n, ok in zip(names, cm.start_allow) if ok}
        end = {n for n, ok in zip(names, cm.end_allow) if ok}
        assert start == {"B-PER", "S-PER", "O"}
        assert end == {"E-PER", "S-PER", "O"}

    def test_no_dead_states(self):
        for T in (1, 3, 6):
            cm = build_constraint_matrix(build_label_set([f"X{i}" for i in range(T)]))
            assert cm.allow.any(axis=1).all(), "label without successor"
            assert cm.allow.any(axis=0).all(), "label without predecessor"

    def test_type_names_do_not_matter(self):
        cm_a = build_constraint_matrix(build_label_set(["PER", "LOC"]))
        cm_b = build_constraint_matrix(build_label_set(["AAA", "BBB"]))
        assert np.array_equal(cm_a.allow, cm_b.allow)
        assert np.array_equal(cm_a.start_allow, cm_b.start_allow)
        assert np.array_equal(cm_a.end_allow, cm_b.end_allow)

    def test_specific_rules(self, labels2, cm2):
        idx = labels2.index_of
        assert cm2.allow[idx("B-PER"), idx("M-PER")]
        assert cm2.allow[idx("B-PER"), idx("E-PER")]
        assert not cm2.allow[idx("B-PER"), idx("M-LOC")]
        assert not cm2.allow[idx("B-PER"), idx("S-PER")]
        assert not cm2.allow[idx("B-PER"), idx("O")]
        assert cm2.allow[idx("E-PER"), idx("B-LOC")]
        assert cm2.allow[idx("O"), idx("O")]
        assert not cm2.allow[idx("O"), idx("M-PER")]


class TestIsValidSequence:
    def names(self, labels, *label_names):
        return [labels.index_of(n) for n in label_names]

    def test_bme_valid(self, labels1, cm1):
        assert is_valid_sequence(labels1, cm1, self.names(labels1, "B-PER", "M-PER", "E-PER"))

    def test_b_then_s_invalid(self, labels1, cm1):
        assert not is_valid_sequence(labels1, cm1, self.names(labels1, "B-PER", "S-PER"))

    def test_mixed_sequence_valid(self, labels2, cm2):
        seq = self.names(labels2, "O", "B-LOC", "E-LOC", "S-PER")
        assert is_valid_sequence(labels2, cm2, seq)

    def test_empty_sequence_valid(self, labels1, cm1):
        assert is_valid_sequence(labels1, cm1, [])

    def test_dangling_b_invalid(self, labels1, cm1):
        assert not is_valid_sequence(labels1, cm1, self.names(labels1, "O", "B-PER"))

    def test_out_of_range_rejected(self, labels1, cm1):
        with pytest.raises(InvalidInputError):
            is_valid_sequence(labels1, cm1, [99])


@given(
    T=st.integers(1, 4),
    data=st.data(),
)
def test_valid_sequences_round_trip_through_entities(T, data):
    labels = build_label_set([f"X{i}" for i in range(T)])
    cm = build_constraint_matrix(labels)
    n = data.draw(st.integers(1, 12))
    # Walk the constraint graph to produce an arbitrary valid sequence.
    starts = [i for i in range(labels.k) if cm.start_allow[i]]
    seq = [data.draw(st.sampled_from(starts))]
    for _ in range(n - 1):
        succ = [q for q in range(labels.k) if cm.allow[seq[-1], q]]
        seq.append(data.draw(st.sampled_from(succ)))
    # Force a valid ending so the full sequence passes the end mask.
    while not cm.end_allow[seq[-1]]:
        succ = [q for q in range(labels.k) if cm.allow[seq[-1], q]]
        seq.append(min(succ, key=lambda q: not cm.end_allow[q]))
    assert is_valid_sequence(labels, cm, seq)
    spans = extract_entities(LabelSequence(seq, labels))
    assert encode_entities(spans, len(seq), labels).indices == seq


class TestVocabFile:
    def test_round_trip(self):
        labels = build_label_set(["PER", "LOC", "ORG"])
        buf = io.StringIO()
        write_vocab(labels, buf)
        assert buf.getvalue().splitlines()[0] == "scheme=BMES k=13"
        restored = read_vocab(io.StringIO(buf.getvalue()))
        assert restored == labels
        assert restored.vocab_hash() == labels.vocab_hash()

    def test_rejects_wrong_order(self):
        labels = build_label_set(["PER"])
        lines = format_vocab(labels).splitlines()
        lines[1], lines[2] = lines[2], lines[1]
        with pytest.raises(InvalidInputError):
            read_vocab(io.StringIO("\n".join(lines)))

    def test_label_parse_round_trip(self):
        for name in ("B-PER", "M-X", "E-Y", "S-Z", "O"):
            assert Label.parse(name).name == name
        with pytest.raises(InvalidInputError):
            Label.parse("I-PER")
