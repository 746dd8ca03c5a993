"""Unigram language-model tokenizer: seed, EM, prune, Viterbi segmentation.

Training alternates EM over the segmentation lattice with pruning of
low-contribution pieces until the vocabulary fits the target size.
The default E-step uses hard (Viterbi) counts, which is deterministic
and monotone in the Viterbi corpus log-likelihood; pass
``lattice=True`` for full forward-backward expectations, monotone in
the marginal likelihood.

Single characters seen in training always stay in the piece inventory,
so segmentation is total; characters never seen at all fall back to
single-character tokens with a fixed penalty.
"""

from __future__ import annotations

import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field

from .corpus_io import Vocab, atomic_write
from .errors import FormatError, ValidationError
from .segmentation import MARKER, Segmentation, decode_tokens, segment_words, split_words

logger = logging.getLogger(__name__)

# log-prob assigned to pieces with zero expected count (kept only because
# characters are never pruned) and to unseen-character fallbacks
FLOOR_LOGP = -1e9
UNKNOWN_LOGP = -1e4


@dataclass
class UnigramModel:
    pieces: dict[str, float]  # token -> natural-log probability
    em_history: list[float] = field(default_factory=list, repr=False)

    @property
    def vocab(self) -> Vocab:
        return Vocab(self.pieces.keys())

    def encode(self, sentence: str) -> Segmentation:
        return encode(self, sentence)

    def decode(self, tokens: list[str]) -> str:
        return decode_tokens(tokens)


def _viterbi_word(pieces: dict[str, float], word: str, max_len: int) -> tuple[list[str], float]:
    """Best segmentation of one annotated word.

    Ties break toward fewer tokens, then leftmost-longest: the score is
    (log-prob, -token count, token-length sequence) maximized
    lexicographically, where longer-earlier length sequences compare
    larger.
    """
    n = len(word)
    # best[i]: (logp, -ntokens, lengths) for word[:i], plus a backpointer
    best: list[tuple[float, int, tuple[int, ...]] | None] = [None] * (n + 1)
    back: list[tuple[int, str]] = [(0, "")] * (n + 1)
    best[0] = (0.0, 0, ())
    for end in range(1, n + 1):
        lo = max(0, end - max_len)
        for start in range(lo, end):
            prev = best[start]
            if prev is None:
                continue
            piece = word[start:end]
            lp = pieces.get(piece)
            if lp is None:
                if end - start > 1:
                    continue
                lp = UNKNOWN_LOGP
            cand = (prev[0] + lp, prev[1] - 1, prev[2] + (end - start,))
            if best[end] is None or cand > best[end]:
                best[end] = cand
                back[end] = (start, piece)
    tokens: list[str] = []
    pos = n
    while pos > 0:
        start, piece = back[pos]
        tokens.append(piece)
        pos = start
    tokens.reverse()
    final = best[n]
    assert final is not None
    return tokens, final[0]


def _logsumexp(values: list[float]) -> float:
    m = max(values)
    if m == -math.inf:
        return m
    return m + math.log(sum(math.exp(v - m) for v in values))


def _lattice_counts(
    pieces: dict[str, float], word: str, max_len: int
) -> tuple[dict[str, float], float]:
    """Expected piece counts and marginal log-likelihood for one word."""
    n = len(word)
    arcs: list[list[tuple[int, str, float]]] = [[] for _ in range(n + 1)]
    for end in range(1, n + 1):
        for start in range(max(0, end - max_len), end):
            piece = word[start:end]
            lp = pieces.get(piece)
            if lp is None:
                if end - start > 1:
                    continue
                lp = UNKNOWN_LOGP
            arcs[end].append((start, piece, lp))
    alpha = [-math.inf] * (n + 1)
    alpha[0] = 0.0
    for end in range(1, n + 1):
        alpha[end] = _logsumexp([alpha[s] + lp for s, _, lp in arcs[end]] or [-math.inf])
    beta = [-math.inf] * (n + 1)
    beta[n] = 0.0
    for end in range(n, 0, -1):
        if beta[end] == -math.inf:
            continue
        for start, _, lp in arcs[end]:
            contrib = lp + beta[end]
            if beta[start] == -math.inf:
                beta[start] = contrib
            else:
                beta[start] = _logsumexp([beta[start], contrib])
    total = alpha[n]
    counts: dict[str, float] = {}
    for end in range(1, n + 1):
        for start, piece, lp in arcs[end]:
            post = math.exp(alpha[start] + lp + beta[end] - total)
            if post > 0.0:
                counts[piece] = counts.get(piece, 0.0) + post
    return counts, total


def _em_round(
    pieces: dict[str, float],
    word_counts: dict[str, int],
    max_len: int,
    lattice: bool,
) -> tuple[dict[str, float], dict[str, float], float]:
    """One E+M step. Returns (new pieces, counts, corpus log-likelihood).

    The returned likelihood is measured under the *incoming* parameters
    (Viterbi objective for hard counts, marginal for the lattice).
    """
    counts: dict[str, float] = {}
    loglik = 0.0
    for word, freq in word_counts.items():
        if lattice:
            word_exp, word_ll = _lattice_counts(pieces, word, max_len)
            for piece, c in word_exp.items():
                counts[piece] = counts.get(piece, 0.0) + freq * c
        else:
            tokens, word_ll = _viterbi_word(pieces, word, max_len)
            for tok in tokens:
                counts[tok] = counts.get(tok, 0.0) + freq
        loglik += freq * word_ll
    total = sum(counts.values())
    new_pieces = {
        piece: (math.log(counts[piece] / total) if counts.get(piece, 0.0) > 0.0 else FLOOR_LOGP)
        for piece in pieces
    }
    return new_pieces, counts, loglik


def _bytes(token: str) -> bytes:
    return token.encode("utf-8")


def train_unigram(
    corpus: list[str],
    vocab_size: int,
    seed_size: int = 1_000_000,
    em_rounds: int = 2,
    shrink_factor: float = 0.75,
    max_piece_len: int = 8,
    min_seed_freq: int = 2,
    lattice: bool = False,
) -> UnigramModel:
    """Train a unigram tokenizer on monolingual text.

    Seeds with all substrings of marker-annotated words up to
    ``max_piece_len`` characters occurring at least ``min_seed_freq``
    times (single characters always), capped at ``seed_size`` by
    frequency. Then alternates ``em_rounds`` EM steps with pruning to a
    ``shrink_factor`` fraction (characters never pruned) until at most
    ``vocab_size`` pieces remain, and finishes with one more EM pass so
    the distribution is normalized over the final inventory.
    """
    if not (0.0 < shrink_factor < 1.0):
        raise ValidationError(f"shrink_factor must be in (0,1), got {shrink_factor}")
    if seed_size < vocab_size:
        raise ValidationError(
            f"seed_size {seed_size} must be at least vocab_size {vocab_size}"
        )
    word_counts: Counter = Counter()
    for line in corpus:
        for word in split_words(line):
            word_counts[MARKER + word] += 1
    if not word_counts:
        raise ValidationError("empty corpus: no words to train on")

    raw_chars = {ch for word in word_counts for ch in word if ch != MARKER}
    if vocab_size <= len(raw_chars):
        raise ValidationError(
            f"vocab_size {vocab_size} must exceed the {len(raw_chars)} distinct characters"
        )
    if len(raw_chars) <= 1:
        logger.warning(
            "degenerate corpus with %d distinct character(s); the model will "
            "hold little beyond character pieces", len(raw_chars),
        )

    substr_counts: Counter = Counter()
    for word, freq in word_counts.items():
        n = len(word)
        for i in range(n):
            for j in range(i + 1, min(i + max_piece_len, n) + 1):
                substr_counts[word[i:j]] += freq
    chars = sorted({ch for word in word_counts for ch in word}, key=_bytes)
    candidates = [
        (piece, c)
        for piece, c in substr_counts.items()
        if len(piece) >= 2 and c >= min_seed_freq
    ]
    candidates.sort(key=lambda pc: (-pc[1], _bytes(pc[0])))
    room = max(0, seed_size - len(chars))
    seed = list(chars) + [piece for piece, _ in candidates[:room]]

    total = sum(substr_counts[p] for p in seed)
    pieces = {p: math.log(substr_counts[p] / total) for p in seed}

    history: list[float] = []
    char_set = set(chars)
    while True:
        for _ in range(max(1, em_rounds)):
            pieces, counts, loglik = _em_round(pieces, word_counts, max_piece_len, lattice)
            history.append(loglik)
        if len(pieces) <= vocab_size:
            break
        keep = max(vocab_size, math.ceil(len(pieces) * shrink_factor))
        if keep >= len(pieces):
            keep = max(vocab_size, len(pieces) - 1)
        ranked = sorted(
            (p for p in pieces if p not in char_set),
            key=lambda p: (-counts.get(p, 0.0), _bytes(p)),
        )
        n_extra = max(0, keep - len(char_set))
        kept = set(ranked[:n_extra]) | char_set
        pieces = {p: lp for p, lp in pieces.items() if p in kept}
    pieces, _, loglik = _em_round(pieces, word_counts, max_piece_len, lattice)
    history.append(loglik)

    ordered = sorted(pieces.items(), key=lambda kv: (-kv[1], _bytes(kv[0])))
    model = UnigramModel(pieces=dict(ordered))
    model.em_history = history
    return model


def corpus_loglik(model: UnigramModel, corpus: list[str], viterbi: bool = True,
                  max_piece_len: int | None = None) -> float:
    """Corpus log-likelihood under the model (Viterbi or marginal)."""
    max_len = max_piece_len or max((len(p) for p in model.pieces), default=1)
    total = 0.0
    for line in corpus:
        for word in split_words(line):
            marked = MARKER + word
            if viterbi:
                _, ll = _viterbi_word(model.pieces, marked, max_len)
            else:
                _, ll = _lattice_counts(model.pieces, marked, max_len)
            total += ll
    return total


def encode_words(model: UnigramModel, words: list[str]) -> Segmentation:
    """Segment an already word-split sentence (words must hold no whitespace)."""
    max_len = max((len(p) for p in model.pieces), default=1)
    return segment_words(
        words, lambda marked: _viterbi_word(model.pieces, marked, max_len)[0]
    )


def encode(model: UnigramModel, sentence: str) -> Segmentation:
    """Viterbi-segment a sentence under the trained piece distribution."""
    return encode_words(model, split_words(sentence))


def save_unigram(model: UnigramModel, path: str | os.PathLike) -> None:
    """Serialize as TSV of "piece<TAB>log-prob" in model order."""
    with atomic_write(path) as fh:
        for piece, lp in model.pieces.items():
            fh.write(f"{piece}\t{lp!r}\n")


def load_unigram(path: str | os.PathLike) -> UnigramModel:
    pieces: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(
                    f"expected 'piece<TAB>logprob', got {line!r}", path=path, line=lineno
                )
            try:
                lp = float(parts[1])
            except ValueError:
                raise FormatError(
                    f"non-numeric log-prob {parts[1]!r}", path=path, line=lineno
                )
            if parts[0] in pieces:
                raise FormatError(f"duplicate piece {parts[0]!r}", path=path, line=lineno)
            pieces[parts[0]] = lp
    if not pieces:
        raise FormatError("empty unigram model", path=path)
    return UnigramModel(pieces=pieces)
