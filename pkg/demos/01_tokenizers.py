#!/usr/bin/env python3
"""Train both sub-word tokenizers on a small corpus and compare their
segmentations.

Run: python3 demos/01_tokenizers.py
"""

from embtransfer import train_bpe, train_unigram

CORPUS = [
    "die produktion von harnstoff",
    "die produktion läuft weiter",
    "harnstoff wird produziert",
    "der stoff wird weiter produziert",
    "produktion und produktionskosten",
    "die kosten der produktion",
] * 4

SAMPLES = [
    "die produktion von harnstoff",
    "produktionskosten steigen",
    "unbekanntes wort",
]


def show(name, model):
    print(f"\n== {name} ==")
    for text in SAMPLES:
        seg = model.encode(text)
        print(f"  {text!r:40} -> {' '.join(seg.tokens)}")
        assert model.decode(seg.tokens) == text
    print("  roundtrip ok on all samples")


def main():
    unigram = train_unigram(CORPUS, vocab_size=60)
    print(f"unigram: {len(unigram.pieces)} pieces; most probable:")
    for piece, lp in list(unigram.pieces.items())[:8]:
        print(f"  {piece!r:16} logp={lp:.3f}")
    show("unigram", unigram)

    bpe = train_bpe(CORPUS, vocab_size=40, min_pair_freq=2)
    print(f"\nbpe: {len(bpe.merges)} merges; first ten:")
    for left, right in bpe.merges[:10]:
        print(f"  {left!r} + {right!r}")
    show("bpe", bpe)


if __name__ == "__main__":
    main()
