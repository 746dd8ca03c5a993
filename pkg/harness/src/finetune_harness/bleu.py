"""Corpus BLEU-4 with add-one smoothing on the higher-order precisions."""

from __future__ import annotations

import math
from collections import Counter


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def score_bleu(
    hypotheses: list[list[str]], references: list[list[str]]
) -> tuple[float, dict]:
    """Corpus BLEU-4. Returns (score, metadata).

    Modified n-gram precisions are clipped against the reference counts;
    n >= 2 precisions use add-one smoothing, so identical corpora still
    score exactly 100. A corpus with zero unigram overlap scores 0.
    """
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis count {len(hypotheses)} != reference count {len(references)}"
        )
    matches = [0] * 5
    totals = [0] * 5
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, 5):
            hyp_counts = _ngrams(hyp, n)
            ref_counts = _ngrams(ref, n)
            totals[n] += sum(hyp_counts.values())
            matches[n] += sum(
                min(c, ref_counts[g]) for g, c in hyp_counts.items()
            )
    meta = {
        "method": "corpus-bleu4",
        "smoothing": "add-one on n>=2 precisions",
        "hyp_len": hyp_len,
        "ref_len": ref_len,
    }
    if totals[1] == 0 or matches[1] == 0:
        return 0.0, meta
    log_precision = math.log(matches[1] / totals[1])
    for n in range(2, 5):
        log_precision += math.log((matches[n] + 1) / (totals[n] + 1))
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / max(hyp_len, 1))
    score = 100.0 * brevity * math.exp(log_precision / 4.0)
    meta["brevity_penalty"] = brevity
    return score, meta
