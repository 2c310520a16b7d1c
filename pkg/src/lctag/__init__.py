"""Constrained BMES sequence-labeling toolkit: masked greedy decoding,
constrained Viterbi, a linear-chain CRF baseline, entity-level scoring,
CJK sentence segmentation, and a model-selection advisor.
"""

from .advisor import (
    AdvisorParams,
    DatasetProfile,
    Observation,
    Recommendation,
    bilstm_degradation_ratio,
    fit,
    objective_and_gradient,
    recommend,
)
from .corpus import (
    EntitySpan,
    SegmentationProfile,
    Sentence,
    SynthSpec,
    extract_entities,
    read_corpus,
    relabel_subset,
    score,
    segment,
    synth_corpus,
    write_corpus,
)
from .crf import CrfParams, crf_decode, log_partition, nll_and_gradient, train_crf
from .decode import (
    LabelSequence,
    LogitsSequence,
    argmax_decode,
    lc_decode,
    read_logits_jsonl,
    viterbi_decode,
    write_logits_jsonl,
)
from .emission import FeatureEncoder, LinearProjection, encode, project, train_emission
from .errors import CompatibilityError, InvalidInputError, NumericalFailureError
from .labelspace import (
    ConstraintMatrix,
    Label,
    LabelSet,
    PositionTag,
    build_constraint_matrix,
    build_label_set,
    is_valid_sequence,
    read_vocab,
    write_vocab,
)

__version__ = "0.1.0"
