"""Byte-pair-encoding tokenizer: greedy merge training and application.

Merges are learned over plain word symbols; the word-boundary marker is
fused onto the first character of each word before merging at encode
time, which is equivalent to applying marker-less merges and prefixing
the first output token. The model vocab therefore contains the plain
alphabet and merge results plus every marker-fused word-initial token
observed on the training corpus.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass

from .corpus_io import Vocab, atomic_write
from .errors import FormatError, ValidationError
from .segmentation import MARKER, Segmentation, decode_tokens, segment_words, split_words


@dataclass
class BpeModel:
    merges: list[tuple[str, str]]
    vocab: Vocab

    def encode(self, sentence: str) -> Segmentation:
        return encode(self, sentence)

    def decode(self, tokens: list[str]) -> str:
        return decode_tokens(tokens)


def _pair_counts(word_freqs: dict[tuple[str, ...], int]) -> Counter:
    counts: Counter = Counter()
    for symbols, freq in word_freqs.items():
        for pair in zip(symbols, symbols[1:]):
            counts[pair] += freq
    return counts


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    left, right = pair
    merged = left + right
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def _best_pair(counts: Counter) -> tuple[tuple[str, str], int]:
    # highest count; ties go to the byte-wise smallest (left, right) pair
    best_count = max(counts.values())
    pair = min(
        (p for p, c in counts.items() if c == best_count),
        key=lambda p: (_bytes(p[0]), _bytes(p[1])),
    )
    return pair, best_count


def train_bpe(
    corpus: list[str], vocab_size: int, min_pair_freq: int = 2
) -> BpeModel:
    """Learn BPE merges from monolingual text.

    Merging stops once the base inventory (alphabet plus merge results)
    reaches ``vocab_size`` or no adjacent pair occurs at least
    ``min_pair_freq`` times. Pair-count ties break toward the byte-wise
    smallest pair, so training is deterministic.
    """
    word_freqs: Counter = Counter()
    for line in corpus:
        for word in split_words(line):
            word_freqs[tuple(word)] += 1
    if not word_freqs:
        raise ValidationError("empty corpus: no words to train on")
    alphabet = sorted({ch for word in word_freqs for ch in word}, key=_bytes)
    if vocab_size <= len(alphabet):
        raise ValidationError(
            f"vocab_size {vocab_size} must exceed alphabet size {len(alphabet)}"
        )

    words = dict(word_freqs)
    merges: list[tuple[str, str]] = []
    inventory = list(alphabet)
    inventory_set = set(inventory)
    while len(inventory) < vocab_size:
        counts = _pair_counts(words)
        if not counts:
            break
        pair, freq = _best_pair(counts)
        if freq < min_pair_freq:
            break
        merges.append(pair)
        merged = pair[0] + pair[1]
        if merged not in inventory_set:
            inventory.append(merged)
            inventory_set.add(merged)
        words = {
            _merge_word(symbols, pair): freq for symbols, freq in words.items()
        }

    seen_initial = set()
    for symbols in words:
        seen_initial.add(symbols[0])
    vocab_tokens = list(inventory)
    for tok in sorted(seen_initial, key=_bytes):
        vocab_tokens.append(MARKER + tok)
    return BpeModel(merges=merges, vocab=Vocab(vocab_tokens))


def _bytes(token: str) -> bytes:
    return token.encode("utf-8")


def _segment_word(merges: list[tuple[str, str]], marked_word: str) -> list[str]:
    # strip the marker, merge, then fuse it back onto the first token
    assert marked_word.startswith(MARKER)
    word = marked_word[len(MARKER):]
    if not word:
        return [MARKER]
    symbols = tuple(word)
    for pair in merges:
        if len(symbols) == 1:
            break
        symbols = _merge_word(symbols, pair)
    return [MARKER + symbols[0]] + list(symbols[1:])


def encode_words(model: BpeModel, words: list[str]) -> Segmentation:
    """Segment an already word-split sentence (words must hold no whitespace)."""
    return segment_words(words, lambda marked: _segment_word(model.merges, marked))


def encode(model: BpeModel, sentence: str) -> Segmentation:
    """Segment a sentence; unknown characters pass through as single tokens."""
    return encode_words(model, split_words(sentence))


def save_bpe(model: BpeModel, merges_path: str | os.PathLike, vocab_path: str | os.PathLike) -> None:
    with atomic_write(merges_path) as fh:
        for left, right in model.merges:
            fh.write(f"{left} {right}\n")
    model.vocab.to_file(vocab_path)


def load_bpe(merges_path: str | os.PathLike, vocab_path: str | os.PathLike) -> BpeModel:
    merges = []
    with open(merges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise FormatError(
                    f"expected 'left right', got {line!r}", path=merges_path, line=lineno
                )
            merges.append((parts[0], parts[1]))
    return BpeModel(merges=merges, vocab=Vocab.from_file(vocab_path))
