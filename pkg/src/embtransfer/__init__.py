"""Parent-child embedding transfer for low-resource NMT.

The pipeline: train a sub-word tokenizer (unigram LM or BPE), align the
parallel corpus at the word level (IBM Model 1 EM + HMM with Viterbi
decoding), project word links onto sub-words, and initialize the child
embedding matrix from the parent's (identical copy, Top-1, Mean, or
single-rank duplication, Gaussian random for the rest).
"""

from .aligner import (
    NULL_TOKEN,
    HmmModel,
    TranslationTable,
    hmm_loglik,
    model1_loglik,
    symmetrize,
    train_hmm,
    train_model1,
    viterbi_align,
)
from .bpe import BpeModel, load_bpe, save_bpe, train_bpe
from .corpus_io import (
    AlignmentLinks,
    SentencePair,
    Vocab,
    load_parallel_corpus,
    read_alignment_table,
    read_embeddings,
    read_pharaoh,
    write_alignment_table,
    write_embeddings,
    write_pharaoh,
)
from .errors import FormatError, PipelineError, SpanCrossingError, ValidationError
from .projection import SubwordAlignmentTable, aggregate_table, project_sentence
from .segmentation import MARKER, Segmentation, decode_tokens, normalize_text
from .transfer import (
    TransferReport,
    build_child_embeddings,
    compute_overlap,
    fit_gaussian,
    init_random,
    recovery_experiment,
    recovery_sweep,
    transfer_identical,
    transfer_mean,
    transfer_single_rank,
    transfer_top1,
)
from .unigram import UnigramModel, corpus_loglik, load_unigram, save_unigram, train_unigram

__version__ = "0.1.0"
