"""Single-edit grammatical error correction via masked language model infilling."""

from .alignment import AlignmentOp, AlignOpKind, align, alignment_cost, extract_edits, ops_to_edits
from .core import (
    AnnotatedSentence,
    Edit,
    EditKind,
    EditSet,
    TokenSeq,
    apply_edits,
    as_tokens,
    parse_m2,
    serialize_m2,
)
from .evaluation import (
    EvalReport,
    MatchMode,
    default_mode,
    evaluate_corpus,
    f_beta_score,
    identity_reranker,
    mask_accuracy,
    oracle_reranker,
    prf,
    rerank,
    score_sentence,
)
from .expansion import (
    FlatLabels,
    LabelSeq,
    SingleEditInstance,
    TokenLabel,
    decode_labels,
    expand_corpus,
    expand_each_edit,
    expand_last_edit,
    flatten_labels,
    project_labels,
)
from .fillmask import (
    Candidate,
    FillModel,
    GoldMock,
    LexiconMock,
    PredictionSet,
    RemoteClient,
    assemble_hypothesis,
    fill,
    merge_pieces,
)
from .masking import MASK_TOKEN, MaskedInstance, MaskStrategy, apply_deletion, mask_instance

__version__ = "0.1.0"
