"""Tiny deterministic encoder-decoder transformer for the comparisons.

Deliberately small: the harness demonstrates how embedding
initialization changes fine-tuning behavior, not publication-scale
translation quality.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

PAD, BOS, EOS = 0, 1, 2


class PositionalEncoding(nn.Module):
    def __init__(self, dim: int, max_len: int = 256):
        super().__init__()
        pe = torch.zeros(max_len, dim)
        pos = torch.arange(max_len, dtype=torch.float32).unsqueeze(1)
        div = torch.exp(
            torch.arange(0, dim, 2, dtype=torch.float32) * (-math.log(10000.0) / dim)
        )
        pe[:, 0::2] = torch.sin(pos * div)
        pe[:, 1::2] = torch.cos(pos * div[: (dim + 1) // 2])
        self.register_buffer("pe", pe)

    def forward(self, x):
        return x + self.pe[: x.size(1)].unsqueeze(0)


class TinySeq2Seq(nn.Module):
    """Transformer encoder-decoder with a swappable source embedding."""

    def __init__(
        self,
        src_vocab: int,
        tgt_vocab: int,
        dim: int = 32,
        heads: int = 4,
        layers: int = 1,
        ffn: int = 64,
        max_len: int = 64,
    ):
        super().__init__()
        self.dim = dim
        self.src_embed = nn.Embedding(src_vocab, dim, padding_idx=PAD)
        self.tgt_embed = nn.Embedding(tgt_vocab, dim, padding_idx=PAD)
        self.positional = PositionalEncoding(dim, max_len)
        self.transformer = nn.Transformer(
            d_model=dim,
            nhead=heads,
            num_encoder_layers=layers,
            num_decoder_layers=layers,
            dim_feedforward=ffn,
            dropout=0.0,
            batch_first=True,
        )
        self.out = nn.Linear(dim, tgt_vocab)

    def load_source_embeddings(self, matrix: np.ndarray) -> None:
        """Overwrite the source embedding table, bit-exact."""
        if matrix.shape != tuple(self.src_embed.weight.shape):
            raise ValueError(
                f"embedding artifact shape {matrix.shape} does not match "
                f"model {tuple(self.src_embed.weight.shape)}"
            )
        with torch.no_grad():
            self.src_embed.weight.copy_(torch.from_numpy(matrix.copy()))

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        src_key_padding = src == PAD
        tgt_key_padding = tgt_in == PAD
        causal = nn.Transformer.generate_square_subsequent_mask(
            tgt_in.size(1), dtype=torch.bool
        )
        enc = self.positional(self.src_embed(src) * math.sqrt(self.dim))
        dec = self.positional(self.tgt_embed(tgt_in) * math.sqrt(self.dim))
        hidden = self.transformer(
            enc,
            dec,
            tgt_mask=causal,
            src_key_padding_mask=src_key_padding,
            tgt_key_padding_mask=tgt_key_padding,
            memory_key_padding_mask=src_key_padding,
        )
        return self.out(hidden)

    @torch.no_grad()
    def greedy_decode(self, src: torch.Tensor, max_len: int = 32) -> list[list[int]]:
        self.eval()
        batch = src.size(0)
        tgt = torch.full((batch, 1), BOS, dtype=torch.long)
        finished = torch.zeros(batch, dtype=torch.bool)
        for _ in range(max_len):
            logits = self(src, tgt)
            next_tok = logits[:, -1].argmax(dim=-1, keepdim=True)
            next_tok[finished] = PAD
            tgt = torch.cat([tgt, next_tok], dim=1)
            finished |= next_tok.squeeze(1) == EOS
            if bool(finished.all()):
                break
        out = []
        for row in tgt[:, 1:].tolist():
            toks = []
            for t in row:
                if t in (EOS, PAD):
                    break
                toks.append(t)
            out.append(toks)
        return out


def build_model(src_vocab: int, tgt_vocab: int, dim: int, seed: int, **kwargs) -> TinySeq2Seq:
    """Seeded construction so every strategy starts from identical weights."""
    torch.manual_seed(seed)
    return TinySeq2Seq(src_vocab, tgt_vocab, dim=dim, **kwargs)
