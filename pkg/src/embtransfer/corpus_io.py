"""Ingestion and serialization of pipeline artifacts.

File formats (all UTF-8, '\\n' line endings, '.' decimal separator
regardless of locale):

* parallel corpus: two plain-text files, one sentence per line, same
  line count; words are whitespace-separated.
* Pharaoh alignments: one line per sentence pair, links as "i-j" pairs
  (0-indexed source-target), space-separated, sorted by (i, j).
* embeddings, text: header line "<rows> <dim>", then one line per token:
  the token followed by <dim> decimal values with 6 decimal places.
* embeddings, binary: the same header as a text line, then row-major
  little-endian 32-bit floats. Tokens are not stored; keep the vocab
  file next to it.
* vocab: one token per line; the line number (0-based) is the id.
* alignment table: TSV rows "child<TAB>parent<TAB>count", grouped by
  child sub-word (groups in byte order), descending count within a
  group, count ties broken by parent token byte order.

Every writer goes through a temp file and an atomic rename, so failed
runs never leave partial artifacts.
"""

from __future__ import annotations

import logging
import os
import re
import tempfile
import unicodedata
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import FormatError, ValidationError

logger = logging.getLogger(__name__)

_PHARAOH_LINK = re.compile(r"^(\d+)-(\d+)$")


@dataclass
class SentencePair:
    """One aligned sentence pair; ``index`` is its position in the corpus."""

    source: list[str]
    target: list[str]
    index: int


class Vocab:
    """Ordered set of unique tokens with stable integer ids 0..|V|-1."""

    def __init__(self, tokens: Iterable[str]):
        self.tokens: list[str] = list(tokens)
        self.index: dict[str, int] = {}
        for i, tok in enumerate(self.tokens):
            if tok in self.index:
                raise ValidationError(f"duplicate token in vocab: {tok!r}")
            self.index[tok] = i

    def id(self, token: str) -> int:
        return self.index[token]

    def token(self, token_id: int) -> str:
        return self.tokens[token_id]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocab) and self.tokens == other.tokens

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "Vocab":
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
        lines = raw.split("\n")
        if lines and lines[-1] == "":
            lines.pop()  # trailing newline, not an empty token
        return cls(lines)

    def to_file(self, path: str | os.PathLike) -> None:
        for tok in self.tokens:
            if "\n" in tok or "\r" in tok:
                raise FormatError(f"token contains a line break: {tok!r}", path=path)
        with atomic_write(path) as fh:
            for tok in self.tokens:
                fh.write(tok + "\n")


@dataclass(frozen=True)
class AlignmentLinks:
    """Word-alignment links for one sentence pair.

    Links are (source word index, target word index) pairs. Decoded
    alignments are n-to-1 onto the target (a source index appears at
    most once); symmetrized unions may relax that.
    """

    links: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def sorted_links(self) -> list[tuple[int, int]]:
        return sorted(self.links)

    def validate(self, source_len: int, target_len: int) -> None:
        for i, j in self.links:
            if not (0 <= i < source_len and 0 <= j < target_len):
                raise ValidationError(
                    f"link ({i},{j}) out of range for lengths "
                    f"({source_len},{target_len})"
                )

    def to_pharaoh_line(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in self.sorted_links())

    @classmethod
    def from_pharaoh_line(cls, line: str, path=None, lineno=None) -> "AlignmentLinks":
        links = set()
        for piece in line.split():
            m = _PHARAOH_LINK.match(piece)
            if m is None:
                raise FormatError(
                    f"malformed alignment token {piece!r}", path=path, line=lineno
                )
            links.add((int(m.group(1)), int(m.group(2))))
        return cls(frozenset(links))


@contextmanager
def atomic_write(path: str | os.PathLike, binary: bool = False):
    """Write to a temp file in the target directory, then atomically rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        mode = "wb" if binary else "w"
        with os.fdopen(fd, mode, encoding=None if binary else "utf-8") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def normalize_line(line: str, nfc: bool = True, lowercase: bool = False) -> str:
    if nfc:
        line = unicodedata.normalize("NFC", line)
    if lowercase:
        line = line.lower()
    return line


def load_parallel_corpus(
    source_path: str | os.PathLike,
    target_path: str | os.PathLike,
    nfc: bool = True,
    lowercase: bool = False,
) -> list[SentencePair]:
    """Load a line-aligned parallel corpus into SentencePairs.

    Words are whitespace-tokenized after optional NFC normalization and
    lowercasing. Pairs where either side is empty after normalization are
    skipped with a warning; remaining pairs are indexed consecutively in
    file order.
    """
    with open(source_path, encoding="utf-8") as fh:
        src_lines = fh.read().splitlines()
    with open(target_path, encoding="utf-8") as fh:
        tgt_lines = fh.read().splitlines()
    if len(src_lines) != len(tgt_lines):
        raise ValidationError(
            f"line count mismatch {len(src_lines)}≠{len(tgt_lines)} "
            f"({source_path} vs {target_path})"
        )
    pairs: list[SentencePair] = []
    skipped = 0
    for lineno, (src, tgt) in enumerate(zip(src_lines, tgt_lines), start=1):
        src_tokens = normalize_line(src, nfc, lowercase).split()
        tgt_tokens = normalize_line(tgt, nfc, lowercase).split()
        if not src_tokens or not tgt_tokens:
            skipped += 1
            logger.warning("skipping empty pair at line %d", lineno)
            continue
        pairs.append(SentencePair(src_tokens, tgt_tokens, len(pairs)))
    if skipped:
        logger.warning("skipped %d empty pair(s) of %d", skipped, len(src_lines))
    return pairs


def write_pharaoh(
    alignments: Iterable[AlignmentLinks], path: str | os.PathLike
) -> None:
    with atomic_write(path) as fh:
        for links in alignments:
            fh.write(links.to_pharaoh_line() + "\n")


def read_pharaoh(path: str | os.PathLike) -> list[AlignmentLinks]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            out.append(
                AlignmentLinks.from_pharaoh_line(line, path=path, lineno=lineno)
            )
    return out


def _parse_embedding_header(line: str, path=None) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise FormatError(f"bad embedding header {line!r}", path=path, line=1)
    try:
        rows, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"bad embedding header {line!r}", path=path, line=1)
    if rows < 0 or dim <= 0:
        raise FormatError(f"bad embedding header {line!r}", path=path, line=1)
    return rows, dim


def write_embeddings(
    matrix: np.ndarray,
    vocab: Vocab,
    path: str | os.PathLike,
    binary: bool = False,
) -> None:
    """Write an embedding matrix in the text or binary format.

    The matrix must have one row per vocab token. Binary files hold
    little-endian float32 and round-trip bit-exactly; text holds 6
    decimal places.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != len(vocab):
        raise ValidationError(
            f"matrix shape {matrix.shape} does not match vocab size {len(vocab)}"
        )
    rows, dim = matrix.shape
    if binary:
        with atomic_write(path, binary=True) as fh:
            fh.write(f"{rows} {dim}\n".encode("ascii"))
            fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
        return
    for tok in vocab.tokens:
        if any(ch.isspace() for ch in tok):
            raise FormatError(
                f"token {tok!r} contains whitespace; use the binary format",
                path=path,
            )
    with atomic_write(path) as fh:
        fh.write(f"{rows} {dim}\n")
        for tok, row in zip(vocab.tokens, matrix):
            fh.write(tok + " " + " ".join(f"{v:.6f}" for v in row) + "\n")


def read_embeddings(
    path: str | os.PathLike,
    binary: bool = False,
    vocab: Vocab | None = None,
) -> tuple[np.ndarray, Vocab | None]:
    """Read an embedding file, returning (float32 matrix, vocab).

    Text files carry their own tokens; binary files do not, so the vocab
    (if supplied) is only checked against the header row count.
    """
    if binary:
        with open(path, "rb") as fh:
            header = fh.readline().decode("ascii")
            rows, dim = _parse_embedding_header(header, path=path)
            data = fh.read()
        expected = rows * dim * 4
        if len(data) != expected:
            raise FormatError(
                f"binary payload is {len(data)} bytes, expected {expected}",
                path=path,
            )
        matrix = np.frombuffer(data, dtype="<f4").reshape(rows, dim).copy()
        if vocab is not None and len(vocab) != rows:
            raise FormatError(
                f"vocab size {len(vocab)} does not match header rows {rows}",
                path=path,
            )
        return matrix, vocab
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        rows, dim = _parse_embedding_header(header, path=path)
        tokens = []
        matrix = np.empty((rows, dim), dtype=np.float32)
        count = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if count >= rows:
                raise FormatError(
                    f"more rows than header declares ({rows})", path=path, line=lineno
                )
            if len(parts) != dim + 1:
                raise FormatError(
                    f"row has {len(parts) - 1} values, expected {dim}",
                    path=path,
                    line=lineno,
                )
            tokens.append(parts[0])
            try:
                matrix[count] = [float(v) for v in parts[1:]]
            except ValueError:
                raise FormatError("non-numeric embedding value", path=path, line=lineno)
            count += 1
        if count != rows:
            raise FormatError(
                f"found {count} rows, header declares {rows}", path=path
            )
    return matrix, Vocab(tokens)


def _byte_key(token: str) -> bytes:
    return token.encode("utf-8")


def write_alignment_table(
    entries: Mapping[str, Sequence[tuple[str, int]]], path: str | os.PathLike
) -> None:
    """Write a child-subword -> ranked parent candidates table as TSV.

    Groups are emitted in child-token byte order; within a group rows are
    sorted by descending count, ties by parent token byte order (the
    canonical ranking, re-imposed here so files are deterministic).
    """
    with atomic_write(path) as fh:
        for child in sorted(entries, key=_byte_key):
            ranked = sorted(entries[child], key=lambda pc: (-pc[1], _byte_key(pc[0])))
            for parent, count in ranked:
                if count <= 0:
                    raise ValidationError(
                        f"non-positive count {count} for ({child!r}, {parent!r})"
                    )
                fh.write(f"{child}\t{parent}\t{count}\n")


def read_alignment_table(
    path: str | os.PathLike,
) -> dict[str, list[tuple[str, int]]]:
    entries: dict[str, list[tuple[str, int]]] = {}
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(
                    f"expected 3 tab-separated fields, got {len(parts)}",
                    path=path,
                    line=lineno,
                )
            child, parent, raw_count = parts
            try:
                count = int(raw_count)
            except ValueError:
                raise FormatError(
                    f"non-integer count {raw_count!r}", path=path, line=lineno
                )
            if (child, parent) in seen:
                raise FormatError(
                    f"duplicate row for ({child!r}, {parent!r})",
                    path=path,
                    line=lineno,
                )
            seen.add((child, parent))
            entries.setdefault(child, []).append((parent, count))
    return entries
