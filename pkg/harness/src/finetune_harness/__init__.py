"""Toy-scale fine-tuning harness for comparing child embedding
initialization strategies produced by the embtransfer pipeline."""

from .artifacts import (
    read_embeddings_binary,
    read_transfer_report,
    read_vocab,
    write_embeddings_binary,
)
from .bleu import score_bleu
from .data import build_task, exact_alignment_table
from .harness import HarnessConfig, prepare_artifacts, run_comparison, train_parent
from .model import TinySeq2Seq, build_model

__version__ = "0.1.0"
