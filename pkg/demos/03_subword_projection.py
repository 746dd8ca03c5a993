#!/usr/bin/env python3
"""Project word alignments onto sub-words: the many-to-many expansion
and the ranked candidate table D(x).

Run: python3 demos/03_subword_projection.py
"""

from embtransfer import AlignmentLinks, Vocab, aggregate_table, project_sentence
from embtransfer.unigram import UnigramModel, encode_words

# hand-assembled piece inventories so the segmentations are predictable
SRC_PIECES = {"▁üre": -1.0, "tme": -1.0, "▁": -8.0}
TGT_PIECES = {
    "▁produck": -1.0, "tion": -1.0,
    "▁Harn": -1.0, "stoff": -1.0, "▁": -8.0,
}
for tok in "üretmproducknHashof":
    SRC_PIECES.setdefault(tok, -6.0)
    TGT_PIECES.setdefault(tok, -6.0)


def main():
    src_model = UnigramModel(pieces=SRC_PIECES)
    tgt_model = UnigramModel(pieces=TGT_PIECES)

    src_words = ["üretme", "üre"]
    tgt_words = ["producktion", "Harnstoff"]
    src_seg = encode_words(src_model, src_words)
    tgt_seg = encode_words(tgt_model, tgt_words)
    print("child segmentation: ", src_seg.tokens)
    print("parent segmentation:", tgt_seg.tokens)

    word_links = AlignmentLinks(frozenset({(0, 0), (1, 1)}))
    print("\nword links:", word_links.sorted_links())
    pairs = project_sentence(word_links, src_seg, tgt_seg)
    print(f"projected sub-word links ({len(pairs)} = 2*2 + 1*2):")
    for child, parent in pairs:
        print(f"  {child} <-> {parent}")

    parent_vocab = Vocab(sorted({p for _, p in pairs}))
    table = aggregate_table(pairs, parent_vocab)
    print("\nranked candidate sets:")
    for child, ranked in table.entries.items():
        cands = ", ".join(f"{p}:{c}" for p, c in ranked)
        print(f"  D({child}) = [{cands}]")


if __name__ == "__main__":
    main()
