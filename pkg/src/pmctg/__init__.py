"""Unsupervised constrained text generation by perturbed-masking
local-edit search: keywords-to-sentence (hard constraints) and
paraphrasing (soft constraints) over pluggable LM/encoder backends."""

from .encoder import EncoderHandle, PPMIEncoder, build_ppmi_encoder
from .errors import (
    BackendUnavailableError,
    ConstraintViolationError,
    DimensionMismatchError,
    EmptyCorpusError,
    EmptyInputError,
    InputContractError,
    OovKeywordError,
    PmctgError,
)
from .keywords import KeywordExtractor, TfidfKeywordExtractor, extract_keywords
from .lm import (
    CausalLMHandle,
    KneserNeyLM,
    next_token_distribution,
    sequence_nll,
    train_kn,
)
from .masking import EditScoreVector, edit_scores, impact, sample_position
from .metrics import (
    BleuConfig,
    EvalReport,
    bleu,
    compare_searchers,
    corpus_nll,
    ibleu,
    rouge_n,
)
from .model_io import ModelBundle, load_model_dir, save_model_dir
from .scoring import (
    ComponentScores,
    ScoreWeights,
    combine,
    diversity,
    edit_rationality,
    fluency,
    semantic_similarity,
    sentence_objective,
    sentence_objectives,
)
from .search import (
    EditProposal,
    SearchConfig,
    SearchTrace,
    TaskInput,
    initialize,
    propose,
    search,
    search_baseline_uniform,
    step,
)
from .text import (
    Corpus,
    Sentence,
    Token,
    Vocabulary,
    apply_edit,
    build_corpus,
    detokenize,
    ingest_corpus,
    tokenize,
)

__version__ = "0.1.0"
