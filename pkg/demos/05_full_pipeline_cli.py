#!/usr/bin/env python3
"""Drive the whole pipeline through the CLI on a generated toy corpus:
tokenize -> align -> project -> transfer -> report.

Run: python3 demos/05_full_pipeline_cli.py
"""

import json
import random
import subprocess
import sys
import tempfile
from pathlib import Path

from embtransfer import Vocab, init_random, write_embeddings

LEXICON = {f"kelime{i}": f"word{i}" for i in range(15)}


def cli(*args):
    cmd = [sys.executable, "-m", "embtransfer"] + [str(a) for a in args]
    print("$ embtransfer " + " ".join(str(a) for a in args))
    proc = subprocess.run(cmd, capture_output=True, text=True, check=True)
    print("  " + proc.stdout.strip())


def main():
    root = Path(tempfile.mkdtemp(prefix="embtransfer-demo-"))
    print(f"working in {root}\n")
    rng = random.Random(3)
    src_lines, tgt_lines = [], []
    for _ in range(80):
        words = [rng.choice(list(LEXICON)) for _ in range(rng.randint(3, 6))]
        src_lines.append(" ".join(words))
        tgt_lines.append(" ".join(LEXICON[w] for w in words))
    (root / "child.txt").write_text("\n".join(src_lines) + "\n", encoding="utf-8")
    (root / "english.txt").write_text("\n".join(tgt_lines) + "\n", encoding="utf-8")

    cli("train-tokenizer", "--kind", "unigram", "--vocab-size", 100,
        "--input", root / "child.txt", "--output", root / "child")
    cli("train-tokenizer", "--kind", "unigram", "--vocab-size", 100,
        "--input", root / "english.txt", "--output", root / "english")

    # stand-in parent: seeded Gaussian embeddings over the english vocab
    parent_vocab = Vocab.from_file(root / "english.vocab")
    matrix = init_random(parent_vocab, 16, seed=1, mean=0.0, std=0.5)
    write_embeddings(matrix, parent_vocab, root / "parent.emb.bin", binary=True)

    config = {
        "paths": {
            "source_corpus": str(root / "child.txt"),
            "target_corpus": str(root / "english.txt"),
            "parent_vocab": str(root / "english.vocab"),
            "parent_embeddings": str(root / "parent.emb.bin"),
            "child_vocab": str(root / "child.vocab"),
            "output_dir": str(root / "out"),
        },
        "tokenizer": {
            "source_model": str(root / "child"),
            "target_model": str(root / "english"),
        },
        "transfer": {"dim": 16, "seed": 7},
    }
    config_path = root / "run.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")

    cli("--config", config_path, "align")
    cli("--config", config_path, "project")
    cli("--config", config_path, "transfer", "--strategy", "mean", "--parent-binary")
    cli("report", "--report", root / "out" / "transfer_report.tsv")
    print(f"\nartifacts under {root / 'out'}")


if __name__ == "__main__":
    main()
