#!/usr/bin/env python3
"""Train the Model 1 + HMM aligner on a toy bitext and inspect what the
EM stages learn.

Run: python3 demos/02_word_alignment.py
"""

import random

from embtransfer import (
    SentencePair,
    hmm_loglik,
    model1_loglik,
    train_hmm,
    train_model1,
    viterbi_align,
)

LEXICON = {
    "köpek": "dog", "adam": "man", "kadın": "woman", "ev": "house",
    "büyük": "big", "küçük": "small", "görür": "sees", "sever": "loves",
}


def toy_bitext(n=60, seed=5):
    rng = random.Random(seed)
    src_words = list(LEXICON)
    corpus = []
    for i in range(n):
        src = [rng.choice(src_words) for _ in range(rng.randint(2, 5))]
        tgt = [LEXICON[w] for w in src]
        corpus.append(SentencePair(src, tgt, i))
    return corpus


def main():
    corpus = toy_bitext()
    table = train_model1(corpus, iterations=5)
    print("Model 1 log-likelihood per iteration:")
    print("  " + " -> ".join(f"{x:.1f}" for x in table.loglik_history))

    print("\nlexicon learned for 'dog':")
    row = sorted(table.probs["dog"].items(), key=lambda kv: -kv[1])[:3]
    for f, p in row:
        print(f"  t({f} | dog) = {p:.3f}")

    hmm = train_hmm(corpus, table, iterations=5)
    print("\nHMM log-likelihood per iteration:")
    print("  " + " -> ".join(f"{x:.1f}" for x in hmm.loglik_history))
    print(f"\njump distribution (monotone text, so +1 dominates): "
          f"+1 -> {hmm.jump[1]:.3f}, null -> {hmm.null_mass:.4f}")
    print(f"HMM vs Model 1 corpus log-likelihood: "
          f"{hmm_loglik(corpus, hmm):.1f} vs {model1_loglik(corpus, table):.1f}")

    pair = corpus[0]
    links = viterbi_align(hmm, pair)
    print(f"\nViterbi decode of pair 0: {' '.join(pair.source)!r} / "
          f"{' '.join(pair.target)!r}")
    for i, j in links.sorted_links():
        print(f"  {pair.source[i]} -> {pair.target[j]}")


if __name__ == "__main__":
    main()
