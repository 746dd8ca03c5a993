"""Project word alignments onto sub-words and aggregate the ranked table.

For every aligned word pair the full cross product of their sub-words is
emitted (many-to-many), exactly |subwords(source)| x |subwords(target)|
links per word link. Corpus-wide counts are then ranked per child
sub-word by descending frequency, ties by parent token byte order.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .corpus_io import AlignmentLinks, Vocab, read_alignment_table, write_alignment_table
from .errors import SpanCrossingError, ValidationError
from .segmentation import Segmentation


def _subwords_by_word(seg: Segmentation, sentence_index=None) -> list[list[str]]:
    """Group a segmentation's tokens by the word each span falls inside."""
    groups: list[list[str]] = [[] for _ in seg.word_spans]
    w = 0
    for token, (start, end) in zip(seg.tokens, seg.spans):
        while w < len(seg.word_spans) and start >= seg.word_spans[w][1]:
            w += 1
        if w >= len(seg.word_spans) or end > seg.word_spans[w][1] or start < seg.word_spans[w][0]:
            raise SpanCrossingError(token, (start, end), sentence_index)
        groups[w].append(token)
    return groups


def project_sentence(
    links: AlignmentLinks,
    source_seg: Segmentation,
    target_seg: Segmentation,
    sentence_index: int | None = None,
) -> list[tuple[str, str]]:
    """Expand word links into (child sub-word, parent sub-word) pairs.

    The source side is the child language; emitted pairs list it first.
    Pairs are position-level: repeated sub-words contribute once per
    occurrence, so the result length is exactly the sum over word links
    of |subwords(f)| * |subwords(e)|.
    """
    src_groups = _subwords_by_word(source_seg, sentence_index)
    tgt_groups = _subwords_by_word(target_seg, sentence_index)
    links.validate(len(src_groups), len(tgt_groups))
    out: list[tuple[str, str]] = []
    for i, j in links.sorted_links():
        for sf in src_groups[i]:
            for se in tgt_groups[j]:
                out.append((sf, se))
    return out


def _bytes(token: str) -> bytes:
    return token.encode("utf-8")


@dataclass
class SubwordAlignmentTable:
    """Ranked parent-candidate sets D(x) keyed by child sub-word.

    ``entries`` maps each child sub-word to its candidates sorted by
    descending count, count ties by parent byte order; keys are in byte
    order. ``discarded`` counts parent-side links dropped for being
    outside the parent vocabulary (a run statistic, not serialized).
    """

    entries: dict[str, list[tuple[str, int]]]
    total_links: int = 0
    discarded: int = 0
    below_min_count: int = 0

    def candidates(self, child: str) -> list[tuple[str, int]]:
        return self.entries.get(child, [])

    def top(self, child: str, rank: int = 1) -> tuple[str, int] | None:
        ranked = self.entries.get(child, [])
        return ranked[rank - 1] if 1 <= rank <= len(ranked) else None

    def __len__(self) -> int:
        return len(self.entries)

    def save(self, path: str | os.PathLike) -> None:
        write_alignment_table(self.entries, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SubwordAlignmentTable":
        entries = read_alignment_table(path)
        total = sum(c for ranked in entries.values() for _, c in ranked)
        return cls(entries=entries, total_links=total)


def aggregate_table(
    links: Iterable[tuple[str, str]],
    parent_vocab: Vocab | set[str] | None,
    min_count: int = 1,
) -> SubwordAlignmentTable:
    """Count projected links over the corpus and build the ranked table.

    Parent-side tokens absent from ``parent_vocab`` are dropped and
    tallied in the discard statistic; pass None to skip filtering.
    Pairs occurring fewer than ``min_count`` times are excluded.
    """
    if min_count < 1:
        raise ValidationError(f"min_count must be >= 1, got {min_count}")
    counts: Counter = Counter()
    discarded = 0
    for child, parent in links:
        if parent_vocab is not None and parent not in parent_vocab:
            discarded += 1
            continue
        counts[(child, parent)] += 1
    by_child: dict[str, list[tuple[str, int]]] = {}
    below_min = 0
    for (child, parent), c in counts.items():
        if c < min_count:
            below_min += 1
            continue
        by_child.setdefault(child, []).append((parent, c))
    entries: dict[str, list[tuple[str, int]]] = {}
    kept_total = 0
    for child in sorted(by_child, key=_bytes):
        ranked = sorted(by_child[child], key=lambda pc: (-pc[1], _bytes(pc[0])))
        entries[child] = ranked
        kept_total += sum(c for _, c in ranked)
    return SubwordAlignmentTable(
        entries=entries,
        total_links=kept_total,
        discarded=discarded,
        below_min_count=below_min,
    )
