"""Fine-tuning comparison across embedding initialization strategies.

The flow mirrors parent-child transfer at desk scale: train a tiny
parent model on the parent task, export its source embeddings through
the pipeline's binary format, let the `embtransfer` CLI build one child
embedding artifact per strategy, then fine-tune the same child model
(identical seed, data, and parent inner parameters) once per artifact.
Only the source embedding rows differ between runs.
"""

from __future__ import annotations

import csv
import json
import os
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .artifacts import (
    read_embeddings_binary,
    read_transfer_report,
    read_vocab,
    write_alignment_table,
    write_embeddings_binary,
    write_vocab,
)
from .bleu import score_bleu
from .data import TaskData, batches, build_task, exact_alignment_table, tensorize
from .model import PAD, TinySeq2Seq, build_model

STRATEGIES = ("baseline", "mi", "top1", "mean")


@dataclass
class HarnessConfig:
    """Paths and hyperparameters for one comparison run.

    Defaults follow the usual fine-tuning setup (lr 5e-5, batch 64,
    max length 128); toy runs scale batch and length down.
    """

    artifact_paths: dict[str, str]
    child_vocab_path: str
    parent_state_path: str
    output_dir: str
    report_paths: dict[str, str] = field(default_factory=dict)
    dim: int = 32
    layers: int = 1
    steps: int = 200
    learning_rate: float = 5e-5
    batch_size: int = 64
    max_len: int = 128
    seed: int = 0

    def validate(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        for strategy, path in self.artifact_paths.items():
            if not os.path.exists(path):
                raise ValueError(f"missing artifact for {strategy}: {path}")


def train_parent(
    task: TaskData, dim: int = 32, layers: int = 1, steps: int = 600,
    lr: float = 1e-3, batch_size: int = 32, max_len: int = 16, seed: int = 1,
) -> tuple[dict, np.ndarray]:
    """Train the parent model; returns (state dict, source embeddings)."""
    torch.manual_seed(seed)
    torch.set_num_threads(1)
    model = build_model(len(task.src_vocab), len(task.tgt_vocab), dim, seed, layers=layers)
    src_index = {t: i for i, t in enumerate(task.src_vocab)}
    tgt_index = {t: i for i, t in enumerate(task.tgt_vocab)}
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    stream = batches(task.train, src_index, tgt_index, batch_size, max_len, seed)
    model.train()
    for _ in range(steps):
        src, tgt_in, tgt_out = next(stream)
        optimizer.zero_grad()
        logits = model(src, tgt_in)
        loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
        loss.backward()
        optimizer.step()
    matrix = model.src_embed.weight.detach().numpy().astype("<f4")
    return model.state_dict(), matrix


def _run_pipeline_transfer(
    workdir: Path, strategy: str, seed: int, table_path: Path | None
) -> Path:
    """Build one child artifact through the embtransfer CLI."""
    out_dir = workdir / f"strategy_{strategy}"
    config = {
        "paths": {
            "parent_embeddings": str(workdir / "parent.emb.bin"),
            "parent_vocab": str(workdir / "parent.vocab"),
            "child_vocab": str(workdir / "child.vocab"),
            "output_dir": str(out_dir),
        },
        "transfer": {"strategy": strategy, "seed": seed, "format": "binary"},
    }
    config_path = workdir / f"transfer_{strategy}.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    cmd = [
        sys.executable, "-m", "embtransfer",
        "--config", str(config_path),
        "transfer", "--parent-binary",
    ]
    if table_path is not None:
        cmd += ["--table", str(table_path)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"embtransfer transfer failed: {proc.stderr}")
    return out_dir


def prepare_artifacts(
    workdir: str | os.PathLike,
    dim: int = 32,
    parent_steps: int = 600,
    seed: int = 0,
) -> HarnessConfig:
    """Build the synthetic tasks, the parent, and one artifact per strategy."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    parent_task = build_task(child=False, n_train=400, seed=seed + 100)
    child_task = build_task(child=True, n_train=120, seed=seed + 200)

    state, parent_matrix = train_parent(
        parent_task, dim=dim, steps=parent_steps, seed=seed + 1
    )
    write_embeddings_binary(parent_matrix, workdir / "parent.emb.bin")
    write_vocab(parent_task.src_vocab, workdir / "parent.vocab")
    write_vocab(child_task.src_vocab, workdir / "child.vocab")
    state_path = workdir / "parent_state.pt"
    torch.save(state, state_path)

    table_path = workdir / "alignment_table.tsv"
    write_alignment_table(exact_alignment_table(parent_task, child_task), table_path)

    artifact_paths = {}
    report_paths = {}
    for strategy in STRATEGIES:
        table = table_path if strategy in ("top1", "mean") else None
        out_dir = _run_pipeline_transfer(workdir, strategy, seed, table)
        artifact_paths[strategy] = str(out_dir / "child_embeddings.bin")
        report_paths[strategy] = str(out_dir / "transfer_report.tsv")
    return HarnessConfig(
        artifact_paths=artifact_paths,
        report_paths=report_paths,
        child_vocab_path=str(workdir / "child.vocab"),
        parent_state_path=str(state_path),
        output_dir=str(workdir / "comparison"),
        dim=dim,
        seed=seed,
        batch_size=32,
        max_len=16,
        learning_rate=3e-4,
    )


def _build_child_model(config: HarnessConfig, child_task: TaskData) -> TinySeq2Seq:
    model = build_model(
        len(child_task.src_vocab),
        len(child_task.tgt_vocab),
        config.dim,
        config.seed,
        layers=config.layers,
    )
    state = torch.load(config.parent_state_path, weights_only=True)
    state = {k: v for k, v in state.items() if k != "src_embed.weight"}
    missing = model.load_state_dict(state, strict=False)
    assert missing.missing_keys == ["src_embed.weight"]
    return model


@torch.no_grad()
def _eval_loss(model, loss_fn, src, tgt_in, tgt_out) -> float:
    was_training = model.training
    model.eval()
    logits = model(src, tgt_in)
    loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
    if was_training:
        model.train()
    return float(loss)


def run_comparison(config: HarnessConfig) -> dict:
    """Fine-tune once per strategy; write per-strategy CSVs and a summary.

    Every run shares the seed, data order, and parent inner parameters;
    only the source embedding initialization differs. Loaded rows are
    checked bit-exact against the artifact before the first step.
    """
    config.validate()
    torch.set_num_threads(1)
    child_task = build_task(child=True, n_train=120, seed=config.seed + 200)
    child_vocab = read_vocab(config.child_vocab_path)
    if child_vocab != child_task.src_vocab:
        raise ValueError("child vocab file does not match the synthetic task")
    src_index = {t: i for i, t in enumerate(child_task.src_vocab)}
    tgt_index = {t: i for i, t in enumerate(child_task.tgt_vocab)}
    val_tensors = tensorize(child_task.val, src_index, tgt_index, config.max_len)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)

    os.makedirs(config.output_dir, exist_ok=True)
    summary: dict = {
        "config": {
            "steps": config.steps,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "max_len": config.max_len,
            "dim": config.dim,
            "seed": config.seed,
        },
        "strategies": {},
    }
    for strategy, artifact in config.artifact_paths.items():
        matrix = read_embeddings_binary(artifact)
        model = _build_child_model(config, child_task)
        model.load_source_embeddings(matrix)
        loaded = model.src_embed.weight.detach().numpy()
        if not np.array_equal(loaded.view(np.uint32), matrix.view(np.uint32)):
            raise AssertionError(f"{strategy}: embedding rows not loaded bit-exactly")

        optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
        stream = batches(
            child_task.train, src_index, tgt_index,
            config.batch_size, config.max_len, config.seed,
        )
        rows = []
        best = (float("inf"), -1)
        step0_val = _eval_loss(model, loss_fn, *val_tensors)
        model.train()
        step0_train = None
        for step in range(config.steps):
            src, tgt_in, tgt_out = next(stream)
            optimizer.zero_grad()
            logits = model(src, tgt_in)
            loss = loss_fn(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))
            if step == 0:
                step0_train = float(loss.detach())
            loss.backward()
            optimizer.step()
            val_loss = _eval_loss(model, loss_fn, *val_tensors)
            if val_loss < best[0]:
                best = (val_loss, step)
            rows.append((step, float(loss.detach()), val_loss))

        csv_path = os.path.join(config.output_dir, f"{strategy}.csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "train_loss", "val_loss"])
            writer.writerows(rows)

        hyps = model.greedy_decode(val_tensors[0], max_len=config.max_len)
        id_to_tgt = child_task.tgt_vocab
        hyp_tokens = [[id_to_tgt[t] for t in h] for h in hyps]
        ref_tokens = [t for _, t in child_task.val]
        bleu, bleu_meta = score_bleu(hyp_tokens, ref_tokens)

        summary["strategies"][strategy] = {
            "artifact": artifact,
            "csv": csv_path,
            "step0_train_loss": step0_train,
            "step0_val_loss": step0_val,
            "final_val_loss": rows[-1][2],
            "best_val_loss": best[0],
            "best_step": best[1],
            "best_val_perplexity": float(np.exp(best[0])),
            "val_bleu": bleu,
            "bleu_meta": bleu_meta,
        }

    summary_path = os.path.join(config.output_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    summary["summary_path"] = summary_path
    return summary
