"""Readers and writers for the embedding-pipeline file formats.

The harness talks to the transfer pipeline only through its files:
vocab (one token per line, line number = id), embeddings (text header
"rows dim" + token rows, or the same header followed by row-major
little-endian float32), and the transfer report TSV
(token, provenance, n, contributors).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


def read_vocab(path: str | os.PathLike) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read()
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def write_vocab(tokens: list[str], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok in tokens:
            fh.write(tok + "\n")


def read_embeddings_binary(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        rows, dim = int(header[0]), int(header[1])
        data = fh.read()
    if len(data) != rows * dim * 4:
        raise ValueError(f"binary payload size mismatch in {path}")
    return np.frombuffer(data, dtype="<f4").reshape(rows, dim).copy()


def write_embeddings_binary(
    matrix: np.ndarray, path: str | os.PathLike
) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n".encode("ascii"))
        fh.write(matrix.tobytes())


def read_embeddings_text(path: str | os.PathLike) -> tuple[np.ndarray, list[str]]:
    with open(path, encoding="utf-8") as fh:
        rows, dim = (int(x) for x in fh.readline().split())
        tokens = []
        matrix = np.empty((rows, dim), dtype=np.float32)
        for i, line in enumerate(fh):
            parts = line.split()
            tokens.append(parts[0])
            matrix[i] = [float(v) for v in parts[1:]]
    if len(tokens) != rows:
        raise ValueError(f"row count mismatch in {path}")
    return matrix, tokens


@dataclass(frozen=True)
class ReportRow:
    token: str
    provenance: str
    n: int
    contributors: tuple[str, ...]


def read_transfer_report(path: str | os.PathLike) -> dict[str, ReportRow]:
    rows: dict[str, ReportRow] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            token, provenance, n, contributors = line.split("\t")
            rows[token] = ReportRow(
                token,
                provenance,
                int(n),
                tuple(contributors.split(" ")) if contributors else (),
            )
    return rows


def write_alignment_table(
    entries: dict[str, list[tuple[str, int]]], path: str | os.PathLike
) -> None:
    """Child -> ranked (parent, count) rows, the pipeline's table TSV."""
    with open(path, "w", encoding="utf-8") as fh:
        for child in sorted(entries, key=lambda t: t.encode("utf-8")):
            for parent, count in entries[child]:
                fh.write(f"{child}\t{parent}\t{count}\n")
