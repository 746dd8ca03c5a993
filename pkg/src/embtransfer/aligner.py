"""Statistical word alignment: IBM Model 1 EM and an HMM aligner.

Source words are aligned given target words (the conditioning side), so
several source words may share one target position (n-to-1). A
distinguished NULL token on the conditioning side absorbs unaligned
source words.

The HMM treats the latent jump width as part of the hidden state:
widths live in [-max_jump, +max_jump] and the successor position is
``clamp(prev + width)``, so every transition row is a proper
distribution and the count-and-normalize M-step is the exact maximizer.
That keeps EM monotone in corpus log-likelihood, which the tests check
to 1e-9.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .corpus_io import AlignmentLinks, SentencePair, atomic_write
from .errors import FormatError, ValidationError

NULL_TOKEN = "<NULL>"

# probability floor applied during decoding only, to avoid log(0) on
# pairs never seen in training
DECODE_FLOOR = 1e-12


class TranslationTable:
    """Sparse conditional distribution t(source | conditioning target)."""

    def __init__(self, probs: dict[str, dict[str, float]] | None = None):
        self.probs: dict[str, dict[str, float]] = probs if probs is not None else {}
        self.loglik_history: list[float] = []

    def prob(self, e: str, f: str) -> float:
        return self.probs.get(e, {}).get(f, 0.0)

    def conditioning_tokens(self) -> list[str]:
        return list(self.probs)

    def save(self, path: str | os.PathLike) -> None:
        with atomic_write(path) as fh:
            for e in sorted(self.probs, key=_bytes):
                row = self.probs[e]
                for f in sorted(row, key=_bytes):
                    fh.write(f"{e}\t{f}\t{float(row[f])!r}\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "TranslationTable":
        probs: dict[str, dict[str, float]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise FormatError(
                        f"expected 'e<TAB>f<TAB>prob', got {line!r}", path=path, line=lineno
                    )
                probs.setdefault(parts[0], {})[parts[1]] = float(parts[2])
        return cls(probs)


def _bytes(token: str) -> bytes:
    return token.encode("utf-8")


def _uniform_table(corpus: list[SentencePair]) -> TranslationTable:
    source_vocab = {f for pair in corpus for f in pair.source}
    init = 1.0 / len(source_vocab)
    probs: dict[str, dict[str, float]] = {}
    for pair in corpus:
        for e in pair.target + [NULL_TOKEN]:
            row = probs.setdefault(e, {})
            for f in pair.source:
                row[f] = init
    return TranslationTable(probs)


def model1_expected_counts(
    corpus: list[SentencePair], table: TranslationTable, null_weight: float
) -> tuple[dict[str, dict[str, float]], float]:
    """E-step: expected link counts and the corpus log-likelihood.

    Counts are accumulated in sentence-index order so results are
    bit-deterministic. The alignment prior puts ``null_weight`` on NULL
    and splits the rest uniformly over target positions.
    """
    counts: dict[str, dict[str, float]] = {}
    loglik = 0.0
    for pair in corpus:
        targets = pair.target
        prior_real = (1.0 - null_weight) / len(targets)
        for f in pair.source:
            weights = [null_weight * table.prob(NULL_TOKEN, f)]
            for e in targets:
                weights.append(prior_real * table.prob(e, f))
            denom = sum(weights)
            if denom <= 0.0:
                raise ValidationError(
                    f"zero total probability for source word {f!r}; "
                    "was the table trained on this corpus?"
                )
            loglik += math.log(denom)
            counts.setdefault(NULL_TOKEN, {})
            counts[NULL_TOKEN][f] = counts[NULL_TOKEN].get(f, 0.0) + weights[0] / denom
            for e, w in zip(targets, weights[1:]):
                row = counts.setdefault(e, {})
                row[f] = row.get(f, 0.0) + w / denom
    return counts, loglik


def _normalize(counts: dict[str, dict[str, float]]) -> dict[str, dict[str, float]]:
    probs: dict[str, dict[str, float]] = {}
    for e, row in counts.items():
        total = sum(row.values())
        if total <= 0.0:
            continue
        probs[e] = {f: c / total for f, c in row.items()}
    return probs


def train_model1(
    corpus: list[SentencePair], iterations: int = 5, null_weight: float = 0.2
) -> TranslationTable:
    """EM training of IBM Model 1 from a uniform initialization."""
    if iterations < 1:
        raise ValidationError(f"iterations must be >= 1, got {iterations}")
    if not corpus:
        raise ValidationError("empty corpus")
    if not (0.0 <= null_weight < 1.0):
        raise ValidationError(f"null_weight must be in [0,1), got {null_weight}")
    table = _uniform_table(corpus)
    history = []
    for _ in range(iterations):
        counts, loglik = model1_expected_counts(corpus, table, null_weight)
        history.append(loglik)
        table = TranslationTable(_normalize(counts))
    table.loglik_history = history
    return table


def model1_loglik(
    corpus: list[SentencePair], table: TranslationTable, null_weight: float = 0.2
) -> float:
    _, loglik = model1_expected_counts(corpus, table, null_weight)
    return loglik


@dataclass
class HmmModel:
    """HMM alignment model: lexical table plus a shared jump distribution.

    ``jump[w]`` for w in [-max_jump, +max_jump] and ``null_mass`` sum to
    one; NULL states remember the last real position.
    """

    translation: TranslationTable
    jump: dict[int, float]
    null_mass: float
    max_jump: int
    loglik_history: list[float] = field(default_factory=list, repr=False)

    def save(self, path: str | os.PathLike) -> None:
        """JSON jump distribution next to a translation TSV at path + '.lex'."""
        payload = {
            "max_jump": self.max_jump,
            "null_mass": self.null_mass,
            "jump": {str(w): self.jump[w] for w in sorted(self.jump)},
        }
        with atomic_write(path) as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.translation.save(os.fspath(path) + ".lex")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "HmmModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        jump = {int(w): p for w, p in payload["jump"].items()}
        return cls(
            translation=TranslationTable.load(os.fspath(path) + ".lex"),
            jump=jump,
            null_mass=payload["null_mass"],
            max_jump=payload["max_jump"],
        )


def _jump_matrix(model_jump: dict[int, float], max_jump: int, I: int) -> np.ndarray:
    """W[m+1, i] = P(next real position i | previous memory m), m in -1..I-1."""
    W = np.zeros((I + 1, I))
    for m in range(-1, I):
        for w in range(-max_jump, max_jump + 1):
            i = min(max(m + w, 0), I - 1)
            W[m + 1, i] += model_jump[w]
    return W


def _transition_matrix(model: HmmModel, I: int, W: np.ndarray) -> np.ndarray:
    """Rows: real states 0..I-1 then null states with memory -1..I-1."""
    S = 2 * I + 1
    trans = np.zeros((S, S))
    for i in range(I):  # from real i, memory i
        trans[i, :I] = W[i + 1]
        trans[i, I + i + 1] = model.null_mass
    for m in range(-1, I):  # from null state with memory m
        s = I + m + 1
        trans[s, :I] = W[m + 1]
        trans[s, s] = model.null_mass
    return trans


def _emission_matrix(model: HmmModel, pair: SentencePair) -> np.ndarray:
    """emit[j, s]: t(f_j | e_i) for real states, t(f_j | NULL) for null ones."""
    I = len(pair.target)
    J = len(pair.source)
    emit = np.empty((J, 2 * I + 1))
    for j, f in enumerate(pair.source):
        for i, e in enumerate(pair.target):
            emit[j, i] = model.translation.prob(e, f)
        emit[j, I:] = model.translation.prob(NULL_TOKEN, f)
    return emit


def _forward_backward(model: HmmModel, pair: SentencePair, W: np.ndarray):
    """Scaled forward-backward. Returns (alpha, beta, scales, trans, emit);
    alpha rows are filtering distributions and sum(log scales) is the
    sentence log-likelihood."""
    I = len(pair.target)
    J = len(pair.source)
    S = 2 * I + 1
    emit = _emission_matrix(model, pair)
    trans = _transition_matrix(model, I, W)

    start = np.zeros(S)
    start[:I] = W[0]  # first position reached by a jump from memory -1
    start[I] = model.null_mass

    alpha = np.empty((J, S))
    scales = np.empty(J)
    vec = start * emit[0]
    scales[0] = vec.sum()
    if scales[0] <= 0.0:
        raise ValidationError(
            f"sentence pair {pair.index} has zero likelihood under the lexicon"
        )
    alpha[0] = vec / scales[0]
    for j in range(1, J):
        vec = (alpha[j - 1] @ trans) * emit[j]
        scales[j] = vec.sum()
        if scales[j] <= 0.0:
            raise ValidationError(
                f"sentence pair {pair.index} has zero likelihood under the lexicon"
            )
        alpha[j] = vec / scales[j]

    beta = np.empty((J, S))
    beta[J - 1] = 1.0
    for j in range(J - 2, -1, -1):
        beta[j] = (trans @ (emit[j + 1] * beta[j + 1])) / scales[j + 1]
    return alpha, beta, scales, trans, emit


def _distribute_widths(
    mem_to_real: np.ndarray,
    jump: dict[int, float],
    max_jump: int,
    I: int,
    W: np.ndarray,
    width_counts: dict[int, float],
) -> None:
    """Split posterior mass over (memory, position) into jump widths.

    At clamped boundaries several widths land on one position; mass is
    divided among them proportionally to the current jump weights, the
    exact E-step for the width latent variable.
    """
    for m in range(-1, I):
        row = mem_to_real[m + 1]
        for w in range(-max_jump, max_jump + 1):
            i = min(max(m + w, 0), I - 1)
            denom = W[m + 1, i]
            if denom > 0.0 and row[i] > 0.0:
                width_counts[w] += float(row[i]) * jump[w] / denom


def train_hmm(
    corpus: list[SentencePair],
    model1_table: TranslationTable,
    iterations: int = 5,
    max_jump: int = 5,
    null_mass: float = 0.2,
) -> HmmModel:
    """Forward-backward EM for the HMM aligner, seeded with Model 1."""
    if max_jump < 1:
        raise ValidationError(f"max_jump must be >= 1, got {max_jump}")
    if not corpus:
        raise ValidationError("empty corpus")
    widths = list(range(-max_jump, max_jump + 1))
    jump = {w: (1.0 - null_mass) / len(widths) for w in widths}
    model = HmmModel(model1_table, jump, null_mass, max_jump)
    history = []
    for _ in range(iterations):
        trans_counts: dict[str, dict[str, float]] = {}
        width_counts = {w: 0.0 for w in widths}
        null_count = 0.0
        loglik = 0.0
        jump_cache: dict[int, np.ndarray] = {}
        for pair in corpus:
            I = len(pair.target)
            J = len(pair.source)
            if I not in jump_cache:
                jump_cache[I] = _jump_matrix(model.jump, max_jump, I)
            W = jump_cache[I]
            alpha, beta, scales, trans, emit = _forward_backward(model, pair, W)
            loglik += float(np.log(scales).sum())

            gamma = alpha * beta  # normalized per position
            for j, f in enumerate(pair.source):
                for i, e in enumerate(pair.target):
                    g = float(gamma[j, i])
                    if g > 0.0:
                        row = trans_counts.setdefault(e, {})
                        row[f] = row.get(f, 0.0) + g
                g_null = float(gamma[j, I:].sum())
                if g_null > 0.0:
                    row = trans_counts.setdefault(NULL_TOKEN, {})
                    row[f] = row.get(f, 0.0) + g_null

            # mem_to_real[m+1, i]: posterior mass of a jump from memory m to
            # real position i; position 0 counts as a jump from memory -1
            mem_to_real = np.zeros((I + 1, I))
            mem_to_real[0] += gamma[0, :I]
            null_count += float(gamma[0, I:].sum())
            for j in range(J - 1):
                xi = (
                    alpha[j][:, None]
                    * trans
                    * (emit[j + 1] * beta[j + 1])[None, :]
                    / scales[j + 1]
                )
                null_count += float(xi[:, I:].sum())
                mem_to_real[1:] += xi[:I, :I]  # from real i: memory i
                mem_to_real += xi[I:, :I]  # from null with memory -1..I-1
            _distribute_widths(mem_to_real, model.jump, max_jump, I, W, width_counts)
        history.append(loglik)

        total = sum(width_counts.values()) + null_count
        model = HmmModel(
            TranslationTable(_normalize(trans_counts)),
            {w: width_counts[w] / total for w in widths},
            null_count / total,
            max_jump,
        )
    model.loglik_history = history
    return model


def hmm_loglik(corpus: list[SentencePair], model: HmmModel) -> float:
    total = 0.0
    cache: dict[int, np.ndarray] = {}
    for pair in corpus:
        I = len(pair.target)
        if I not in cache:
            cache[I] = _jump_matrix(model.jump, model.max_jump, I)
        _, _, scales, _, _ = _forward_backward(model, pair, cache[I])
        total += float(np.log(scales).sum())
    return total


def _log_guard(values: np.ndarray) -> np.ndarray:
    """log with structural zeros kept at -inf and a floor elsewhere."""
    out = np.full(values.shape, -np.inf)
    pos = values > 0.0
    out[pos] = np.log(np.maximum(values[pos], DECODE_FLOOR))
    return out


def viterbi_align(
    model: HmmModel | TranslationTable,
    pair: SentencePair,
    null_weight: float = 0.2,
) -> AlignmentLinks:
    """Best n-to-1 alignment for one sentence pair.

    Every source word is assigned one target position or NULL (emitting
    no link); score ties break toward the smaller target index, with
    real positions preferred over NULL.
    """
    if isinstance(model, TranslationTable):
        return _viterbi_model1(model, pair, null_weight)
    I = len(pair.target)
    J = len(pair.source)
    S = 2 * I + 1
    W = _jump_matrix(model.jump, model.max_jump, I)
    emit = _emission_matrix(model, pair)
    trans = _transition_matrix(model, I, W)

    start = np.zeros(S)
    start[:I] = W[0]
    start[I] = model.null_mass
    log_trans = _log_guard(trans)
    log_emit = np.log(np.maximum(emit, DECODE_FLOOR))

    score = _log_guard(start) + log_emit[0]
    back = np.zeros((J, S), dtype=int)
    for j in range(1, J):
        cand = score[:, None] + log_trans  # [s_prev, s]
        best_prev = np.argmax(cand, axis=0)  # first max -> smallest index
        score = cand[best_prev, np.arange(S)] + log_emit[j]
        back[j] = best_prev
    s = int(np.argmax(score))
    states = [s]
    for j in range(J - 1, 0, -1):
        s = int(back[j, s])
        states.append(s)
    states.reverse()
    links = {(j, s) for j, s in enumerate(states) if s < I}
    return AlignmentLinks(frozenset(links))


def _viterbi_model1(
    table: TranslationTable, pair: SentencePair, null_weight: float
) -> AlignmentLinks:
    I = len(pair.target)
    prior_real = (1.0 - null_weight) / I
    links = set()
    for j, f in enumerate(pair.source):
        best_score = null_weight * max(table.prob(NULL_TOKEN, f), DECODE_FLOOR)
        best_i = None
        for i, e in enumerate(pair.target):
            s = prior_real * max(table.prob(e, f), DECODE_FLOOR)
            if s > best_score or (s == best_score and best_i is None):
                best_score = s
                best_i = i
        if best_i is not None:
            links.add((j, best_i))
    return AlignmentLinks(frozenset(links))


_NEIGHBORS = [(-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]


def symmetrize(
    forward: AlignmentLinks,
    reverse: AlignmentLinks,
    mode: str = "grow-diag-final-and",
    source_len: int | None = None,
    target_len: int | None = None,
) -> AlignmentLinks:
    """Combine two alignments of the same pair, both in (source, target)
    orientation.

    Modes: "intersection", "union", "grow-diag-final-and"; the latter
    satisfies intersection <= result <= union.
    """
    if source_len is not None and target_len is not None:
        forward.validate(source_len, target_len)
        reverse.validate(source_len, target_len)
    fwd, rev = set(forward.links), set(reverse.links)
    union = fwd | rev
    inter = fwd & rev
    if mode == "intersection":
        return AlignmentLinks(frozenset(inter))
    if mode == "union":
        return AlignmentLinks(frozenset(union))
    if mode != "grow-diag-final-and":
        raise ValidationError(f"unknown symmetrization mode {mode!r}")

    aligned = set(inter)
    src_done = {i for i, _ in aligned}
    tgt_done = {j for _, j in aligned}
    changed = True
    while changed:
        changed = False
        for i, j in sorted(aligned):
            for di, dj in _NEIGHBORS:
                cand = (i + di, j + dj)
                if cand in union and cand not in aligned:
                    if cand[0] not in src_done or cand[1] not in tgt_done:
                        aligned.add(cand)
                        src_done.add(cand[0])
                        tgt_done.add(cand[1])
                        changed = True
    for i, j in sorted(union - aligned):
        if i not in src_done and j not in tgt_done:
            aligned.add((i, j))
            src_done.add(i)
            tgt_done.add(j)
    return AlignmentLinks(frozenset(aligned))
