"""Command-line pipeline: train-tokenizer, encode, align, project,
transfer, report.

Every command validates its inputs before touching outputs, writes
through temp files with atomic renames, and prints one JSON stats line
on success. Errors go to stderr as JSON; exit codes: 0 ok, 2
usage/validation, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import aligner as aligner_mod
from . import bpe as bpe_mod
from . import unigram as unigram_mod
from .config import apply_overrides, load_config, require_file, validate_common
from .corpus_io import (
    AlignmentLinks,
    SentencePair,
    Vocab,
    atomic_write,
    load_parallel_corpus,
    read_embeddings,
    read_pharaoh,
    write_embeddings,
    write_pharaoh,
)
from .errors import FormatError, PipelineError, ValidationError
from .projection import SubwordAlignmentTable, aggregate_table, project_sentence
from .transfer import TransferReport, build_child_embeddings

logger = logging.getLogger(__name__)


def _model_paths(kind: str, prefix: str) -> dict[str, str]:
    if kind == "unigram":
        return {"model": prefix + ".pieces.tsv", "vocab": prefix + ".vocab"}
    return {"model": prefix + ".merges", "vocab": prefix + ".vocab"}


def load_tokenizer(kind: str, prefix: str):
    paths = _model_paths(kind, prefix)
    require_file(paths["model"], f"{kind} model")
    if kind == "unigram":
        return unigram_mod.load_unigram(paths["model"])
    require_file(paths["vocab"], "bpe vocab")
    return bpe_mod.load_bpe(paths["model"], paths["vocab"])


def _emit(stats: dict) -> None:
    print(json.dumps(stats, sort_keys=True))


def cmd_train_tokenizer(config: dict, args) -> None:
    tok = config["tokenizer"]
    corpus_path = require_file(
        args.input or tok["source_training_text"], "tokenizer training text"
    )
    with open(corpus_path, encoding="utf-8") as fh:
        corpus = fh.read().splitlines()
    prefix = args.output
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)
    paths = _model_paths(tok["kind"], prefix)
    if tok["kind"] == "unigram":
        model = unigram_mod.train_unigram(
            corpus,
            vocab_size=tok["vocab_size"],
            em_rounds=tok["em_rounds"],
            shrink_factor=tok["shrink_factor"],
        )
        unigram_mod.save_unigram(model, paths["model"])
        model.vocab.to_file(paths["vocab"])
        _emit(
            {
                "kind": "unigram",
                "pieces": len(model.pieces),
                "model": paths["model"],
                "vocab": paths["vocab"],
            }
        )
    else:
        model = bpe_mod.train_bpe(
            corpus, vocab_size=tok["vocab_size"], min_pair_freq=tok["min_pair_freq"]
        )
        bpe_mod.save_bpe(model, paths["model"], paths["vocab"])
        _emit(
            {
                "kind": "bpe",
                "merges": len(model.merges),
                "vocab_size": len(model.vocab),
                "model": paths["model"],
                "vocab": paths["vocab"],
            }
        )


def cmd_encode(config: dict, args) -> None:
    kind = args.kind or config["tokenizer"]["kind"]
    model = load_tokenizer(kind, args.model)
    in_path = require_file(args.input, "input text")
    with open(in_path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    count = 0
    with atomic_write(args.output) as out:
        for line in lines:
            seg = model.encode(line)
            out.write(" ".join(seg.tokens) + "\n")
            count += len(seg.tokens)
    _emit({"sentences": len(lines), "tokens": count, "output": args.output})


def _load_corpus(config: dict):
    paths = config["paths"]
    src = require_file(paths["source_corpus"], "paths.source_corpus")
    tgt = require_file(paths["target_corpus"], "paths.target_corpus")
    return load_parallel_corpus(src, tgt)


def cmd_align(config: dict, args) -> None:
    corpus = _load_corpus(config)
    out_path = args.output or os.path.join(
        config["paths"]["output_dir"], "alignments.pharaoh"
    )
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    if args.import_path:
        imported = read_pharaoh(require_file(args.import_path, "imported alignments"))
        if len(imported) != len(corpus):
            raise ValidationError(
                f"imported alignment has {len(imported)} lines, corpus has {len(corpus)}"
            )
        for links, pair in zip(imported, corpus):
            links.validate(len(pair.source), len(pair.target))
        write_pharaoh(imported, out_path)
        _emit(
            {
                "pairs": len(corpus),
                "links": sum(len(a.links) for a in imported),
                "imported": True,
                "output": out_path,
            }
        )
        return

    al = config["aligner"]
    decoded = _train_and_decode(corpus, al)
    if al["symmetrization"]:
        reverse_corpus = [SentencePair(p.target, p.source, p.index) for p in corpus]
        rev = _train_and_decode(reverse_corpus, al)
        decoded = [
            aligner_mod.symmetrize(
                fwd,
                _flip(links),
                mode=al["symmetrization"],
                source_len=len(pair.source),
                target_len=len(pair.target),
            )
            for fwd, links, pair in zip(decoded, rev, corpus)
        ]
    write_pharaoh(decoded, out_path)
    _emit(
        {
            "pairs": len(corpus),
            "links": sum(len(a.links) for a in decoded),
            "imported": False,
            "output": out_path,
        }
    )


def _flip(links: AlignmentLinks) -> AlignmentLinks:
    return AlignmentLinks(frozenset((j, i) for (i, j) in links.links))


def _train_and_decode(corpus, al: dict):
    table = aligner_mod.train_model1(
        corpus, iterations=al["model1_iterations"], null_weight=al["null_weight"]
    )
    hmm = aligner_mod.train_hmm(
        corpus,
        table,
        iterations=al["hmm_iterations"],
        max_jump=al["max_jump"],
        null_mass=al["null_weight"],
    )
    return [aligner_mod.viterbi_align(hmm, pair) for pair in corpus]


def cmd_project(config: dict, args) -> None:
    corpus = _load_corpus(config)
    tok = config["tokenizer"]
    kind = args.kind or tok["kind"]
    src_model = load_tokenizer(kind, args.source_model or tok["source_model"])
    tgt_model = load_tokenizer(kind, args.target_model or tok["target_model"])
    alignments_path = args.alignments or os.path.join(
        config["paths"]["output_dir"], "alignments.pharaoh"
    )
    alignments = read_pharaoh(require_file(alignments_path, "alignments"))
    if len(alignments) != len(corpus):
        raise ValidationError(
            f"alignment file has {len(alignments)} lines, corpus has {len(corpus)}"
        )
    parent_vocab = None
    if config["paths"]["parent_vocab"]:
        parent_vocab = Vocab.from_file(
            require_file(config["paths"]["parent_vocab"], "paths.parent_vocab")
        )

    encode_words = (
        unigram_mod.encode_words if kind == "unigram" else bpe_mod.encode_words
    )
    links: list[tuple[str, str]] = []
    for pair, word_links in zip(corpus, alignments):
        src_seg = encode_words(src_model, pair.source)
        tgt_seg = encode_words(tgt_model, pair.target)
        links.extend(project_sentence(word_links, src_seg, tgt_seg, pair.index))
    table = aggregate_table(
        links, parent_vocab, min_count=config["transfer"]["min_count"]
    )
    out_path = args.output or os.path.join(
        config["paths"]["output_dir"], "alignment_table.tsv"
    )
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    table.save(out_path)
    if not links:
        logger.warning("no projected links; alignment file may be empty")
    _emit(
        {
            "pairs": len(corpus),
            "projected_links": len(links),
            "kept_links": table.total_links,
            "aligned_child_subwords": len(table),
            "discarded_out_of_vocab": table.discarded,
            "below_min_count": table.below_min_count,
            "output": out_path,
        }
    )


def cmd_transfer(config: dict, args) -> None:
    paths = config["paths"]
    tr = config["transfer"]
    emb_in = require_file(paths["parent_embeddings"], "paths.parent_embeddings")
    if args.parent_binary:
        parent_vocab = Vocab.from_file(
            require_file(paths["parent_vocab"], "paths.parent_vocab")
        )
        parent_matrix, _ = read_embeddings(emb_in, binary=True, vocab=parent_vocab)
    else:
        parent_matrix, parent_vocab = read_embeddings(emb_in, binary=False)
        if paths["parent_vocab"]:
            declared = Vocab.from_file(require_file(paths["parent_vocab"], "paths.parent_vocab"))
            if declared != parent_vocab:
                raise ValidationError(
                    "parent vocab file disagrees with the tokens in the embedding file"
                )
    child_vocab = Vocab.from_file(require_file(paths["child_vocab"], "paths.child_vocab"))
    table = None
    if tr["strategy"] in ("top1", "mean", "single"):
        table_path = args.table or os.path.join(paths["output_dir"], "alignment_table.tsv")
        table = SubwordAlignmentTable.load(require_file(table_path, "alignment table"))
    k = None if tr["k"] == "all" else tr["k"]
    matrix, report = build_child_embeddings(
        tr["strategy"],
        child_vocab=child_vocab,
        parent_vocab=parent_vocab,
        parent_matrix=parent_matrix,
        table=table,
        seed=tr["seed"],
        mean=tr["gaussian_mean"],
        std=tr["gaussian_std"],
        k=k,
        rank=tr["rank"],
    )
    out_dir = paths["output_dir"]
    os.makedirs(out_dir, exist_ok=True)
    binary = tr["format"] == "binary"
    emb_path = os.path.join(
        out_dir, "child_embeddings.bin" if binary else "child_embeddings.txt"
    )
    report_path = os.path.join(out_dir, "transfer_report.tsv")
    write_embeddings(matrix, child_vocab, emb_path, binary=binary)
    report.save(report_path)
    counts = report.counts()
    _emit(
        {
            "strategy": tr["strategy"],
            "identical": counts.get("identical", 0),
            "aligned": report.aligned_count(),
            "random": counts.get("random", 0),
            "total": len(child_vocab),
            "ignored_table_keys": report.ignored_table_keys,
            "embeddings": emb_path,
            "report": report_path,
        }
    )


def cmd_report(config: dict, args) -> None:
    report = TransferReport.load(require_file(args.report, "transfer report"))
    counts = report.counts()
    _emit(
        {
            "identical": counts.get("identical", 0),
            "aligned": report.aligned_count(),
            "random": counts.get("random", 0),
            "total": len(report.entries),
            "by_provenance": dict(sorted(counts.items())),
        }
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embtransfer",
        description="Parent-child embedding transfer pipeline",
    )
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="override transfer.seed")
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker count (results are identical regardless)",
    )
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-tokenizer", help="train a unigram or BPE tokenizer")
    p.add_argument("--kind", choices=["unigram", "bpe"])
    p.add_argument("--vocab-size", type=int, dest="vocab_size")
    p.add_argument("--input", help="monolingual training text")
    p.add_argument("--output", required=True, help="model path prefix")

    p = sub.add_parser("encode", help="segment text with a trained tokenizer")
    p.add_argument("--kind", choices=["unigram", "bpe"])
    p.add_argument("--model", required=True, help="model path prefix")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("align", help="train the aligner and decode the corpus")
    p.add_argument("--output", help="Pharaoh output path")
    p.add_argument(
        "--import",
        dest="import_path",
        help="validate and adopt an externally produced Pharaoh file",
    )

    p = sub.add_parser("project", help="project word links onto sub-words")
    p.add_argument("--kind", choices=["unigram", "bpe"])
    p.add_argument("--source-model", dest="source_model", help="child-side tokenizer prefix")
    p.add_argument("--target-model", dest="target_model", help="parent-side tokenizer prefix")
    p.add_argument("--alignments", help="Pharaoh file (default: output_dir/alignments.pharaoh)")
    p.add_argument("--output", help="table path (default: output_dir/alignment_table.tsv)")

    p = sub.add_parser("transfer", help="build the child embedding matrix")
    p.add_argument("--strategy", choices=["baseline", "mi", "top1", "mean", "single"])
    p.add_argument("--k", help="'all' or a positive integer (mean strategy)")
    p.add_argument("--rank", type=int, help="rank for the single strategy")
    p.add_argument("--table", help="alignment table TSV")
    p.add_argument(
        "--parent-binary",
        action="store_true",
        help="parent embeddings are in the binary format",
    )
    p.add_argument("--format", choices=["binary", "text"], dest="out_format")

    p = sub.add_parser("report", help="summarize a transfer report")
    p.add_argument("--report", required=True, help="transfer report TSV")
    return parser


def run(argv: list[str] | None = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    config = load_config(args.config)
    if args.seed is not None:
        config["transfer"]["seed"] = args.seed
    if args.command == "train-tokenizer":
        apply_overrides(
            config, "tokenizer", {"kind": args.kind, "vocab_size": args.vocab_size}
        )
    if args.command == "transfer":
        k = args.k
        if k is not None and k != "all":
            try:
                k = int(k)
            except ValueError:
                raise ValidationError(f"--k must be 'all' or an integer, got {k!r}")
        apply_overrides(
            config,
            "transfer",
            {"strategy": args.strategy, "k": k, "rank": args.rank, "format": args.out_format},
        )
    validate_common(config)
    handlers = {
        "train-tokenizer": cmd_train_tokenizer,
        "encode": cmd_encode,
        "align": cmd_align,
        "project": cmd_project,
        "transfer": cmd_transfer,
        "report": cmd_report,
    }
    handlers[args.command](config, args)


def main(argv: list[str] | None = None) -> int:
    try:
        run(argv)
        return 0
    except (ValidationError, FormatError) as exc:
        json.dump({"error": str(exc), "kind": type(exc).__name__}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except PipelineError as exc:
        json.dump({"error": str(exc), "kind": type(exc).__name__}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except OSError as exc:
        json.dump({"error": str(exc), "kind": "OSError"}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
