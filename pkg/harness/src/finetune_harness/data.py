"""Synthetic exact-alignment translation task.

A parent language and a child language share the same deterministic
word-to-word mapping onto one target language. Child words are renamed
parent words, so the alignment table that maps each child token to its
parent twin is exact by construction; a few source tokens are shared
verbatim between the two languages to give identical-overlap transfer
something to copy.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import torch

from .model import BOS, EOS, PAD

SPECIALS = ["<pad>", "<bos>", "<eos>"]


@dataclass
class TaskData:
    src_vocab: list[str]
    tgt_vocab: list[str]
    train: list[tuple[list[str], list[str]]]
    val: list[tuple[list[str], list[str]]]
    mapping: dict[str, str] = field(default_factory=dict)


def build_task(
    n_content: int = 30,
    n_shared: int = 5,
    n_train: int = 120,
    n_val: int = 32,
    child: bool = False,
    seed: int = 100,
) -> TaskData:
    """Sentences over content + shared tokens, word-mapped onto targets.

    With ``child=True`` the content tokens are renamed (c* instead of
    p*) while shared tokens and the target side stay identical.
    """
    prefix = "c" if child else "p"
    content = [f"{prefix}{i:02d}" for i in range(n_content)]
    shared = [f"s{i}" for i in range(n_shared)]
    src_vocab = SPECIALS + content + shared
    targets = [f"y{i:02d}" for i in range(n_content)] + [f"ys{i}" for i in range(n_shared)]
    tgt_vocab = SPECIALS + targets
    mapping = {w: t for w, t in zip(content + shared, targets)}

    rng = random.Random(seed)
    def sample():
        n = rng.randint(3, 8)
        words = [rng.choice(content + shared) for _ in range(n)]
        return words, [mapping[w] for w in words]

    train = [sample() for _ in range(n_train)]
    val = [sample() for _ in range(n_val)]
    return TaskData(src_vocab, tgt_vocab, train, val, mapping)


def exact_alignment_table(parent: TaskData, child: TaskData) -> dict[str, list[tuple[str, int]]]:
    """Each child content token aligned to its parent twin, count 3."""
    entries = {}
    for child_tok in child.src_vocab:
        if child_tok.startswith("c"):
            parent_tok = "p" + child_tok[1:]
            entries[child_tok] = [(parent_tok, 3)]
    return entries


def tensorize(
    pairs: list[tuple[list[str], list[str]]],
    src_index: dict[str, int],
    tgt_index: dict[str, int],
    max_len: int,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Pad-batch into (src, tgt_in, tgt_out) id tensors."""
    src_len = min(max(len(s) for s, _ in pairs), max_len)
    tgt_len = min(max(len(t) for _, t in pairs), max_len) + 1
    src = torch.full((len(pairs), src_len), PAD, dtype=torch.long)
    tgt_in = torch.full((len(pairs), tgt_len), PAD, dtype=torch.long)
    tgt_out = torch.full((len(pairs), tgt_len), PAD, dtype=torch.long)
    for b, (s, t) in enumerate(pairs):
        s_ids = [src_index[w] for w in s[:max_len]]
        t_ids = [tgt_index[w] for w in t[: max_len - 1]]
        src[b, : len(s_ids)] = torch.tensor(s_ids)
        tgt_in[b, 0] = BOS
        tgt_in[b, 1 : len(t_ids) + 1] = torch.tensor(t_ids)
        tgt_out[b, : len(t_ids)] = torch.tensor(t_ids)
        tgt_out[b, len(t_ids)] = EOS
    return src, tgt_in, tgt_out


def batches(data, src_index, tgt_index, batch_size, max_len, seed):
    """Deterministic shuffled batch stream, cycling over the data."""
    rng = random.Random(seed)
    order = list(range(len(data)))
    while True:
        rng.shuffle(order)
        for start in range(0, len(order) - batch_size + 1, batch_size):
            chunk = [data[i] for i in order[start : start + batch_size]]
            yield tensorize(chunk, src_index, tgt_index, max_len)
