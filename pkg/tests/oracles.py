"""Independent brute-force oracles used by the tests.

These deliberately re-derive expected values by exhaustive enumeration,
staying independent of the code paths they check.
"""

import itertools
import math

from embtransfer.aligner import NULL_TOKEN
from embtransfer.segmentation import MARKER, Segmentation, annotate


def brute_force_model1_counts(corpus, table, null_weight):
    """Exact Model 1 expected counts by enumerating every alignment
    function source -> target + NULL. Feasible only for tiny fixtures."""
    counts = {}
    loglik = 0.0
    for pair in corpus:
        I = len(pair.target)
        states = [NULL_TOKEN] + list(range(I))
        prior = {NULL_TOKEN: null_weight}
        for i in range(I):
            prior[i] = (1.0 - null_weight) / I
        joint = []
        total = 0.0
        for assign in itertools.product(states, repeat=len(pair.source)):
            p = 1.0
            for j, a in enumerate(assign):
                e = NULL_TOKEN if a == NULL_TOKEN else pair.target[a]
                p *= prior[a] * table.prob(e, pair.source[j])
            joint.append((assign, p))
            total += p
        loglik += math.log(total)
        for assign, p in joint:
            w = p / total
            for j, a in enumerate(assign):
                e = NULL_TOKEN if a == NULL_TOKEN else pair.target[a]
                row = counts.setdefault(e, {})
                f = pair.source[j]
                row[f] = row.get(f, 0.0) + w
    return counts, loglik


def enumerate_segmentations(word, pieces):
    """All ways to cover ``word`` with tokens from ``pieces``."""
    if not word:
        return [[]]
    out = []
    for end in range(1, len(word) + 1):
        head = word[:end]
        if head in pieces:
            for rest in enumerate_segmentations(word[end:], pieces):
                out.append([head] + rest)
    return out


def _logsumexp(vals):
    m = max(vals)
    return m + math.log(sum(math.exp(v - m) for v in vals))


def brute_force_unigram_em_round(pieces, word_counts, hard=True):
    """Oracle E+M step over the exhaustively enumerated lattice."""
    counts = {p: 0.0 for p in pieces}
    loglik = 0.0
    for word, freq in word_counts.items():
        segs = enumerate_segmentations(word, pieces)
        scored = [(sum(pieces[t] for t in seg), seg) for seg in segs]
        if hard:
            best_lp = max(lp for lp, _ in scored)
            best = max(
                (seg for lp, seg in scored if lp == best_lp),
                key=lambda seg: (-len(seg), tuple(len(t) for t in seg)),
            )
            for tok in best:
                counts[tok] += freq
            loglik += freq * best_lp
        else:
            total = _logsumexp([lp for lp, _ in scored])
            for lp, seg in scored:
                w = math.exp(lp - total)
                for tok in seg:
                    counts[tok] += freq * w
            loglik += freq * total
    total_c = sum(counts.values())
    new = {p: (math.log(c / total_c) if c > 0 else -1e9) for p, c in counts.items()}
    return new, counts, loglik


def seg_from_words(words, pieces_per_word):
    """Hand-build a Segmentation with consistent spans for projection tests."""
    annotated, word_spans = annotate(words)
    tokens = []
    spans = []
    pos = 0
    for pieces in pieces_per_word:
        for i, piece in enumerate(pieces):
            tok = (MARKER + piece) if i == 0 else piece
            spans.append((pos, pos + len(tok)))
            tokens.append(tok)
            pos += len(tok)
    seg = Segmentation(tokens, spans, word_spans)
    seg.validate()
    assert seg.annotated_text == annotated
    return seg


def random_word_split(word, rng):
    pieces = []
    rest = word
    while rest:
        k = rng.randint(1, len(rest))
        pieces.append(rest[:k])
        rest = rest[k:]
    return pieces
