"""Word-boundary marker convention shared by both tokenizers.

A sentence is split on whitespace and each word is prefixed with the
marker "▁" (LOWER ONE EIGHTH BLOCK); the concatenation of the
marked words is the *annotated* form that segmentations index into.
Decoding maps the marker back to a single space and trims the leading
one, so ``decode(encode(s)) == normalize_text(s)`` for any input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError

MARKER = "▁"


def normalize_text(text: str) -> str:
    """Collapse whitespace runs to single spaces and neutralize the marker.

    A literal marker character in the input would be indistinguishable
    from a word boundary after encoding, so it is treated as whitespace.
    The result is the exact string ``decode(encode(text))`` returns.
    """
    return " ".join(text.replace(MARKER, " ").split())


def split_words(text: str) -> list[str]:
    return normalize_text(text).split(" ") if normalize_text(text) else []


def annotate(words: list[str]) -> tuple[str, list[tuple[int, int]]]:
    """Return the marker-annotated string and per-word character spans."""
    spans = []
    pos = 0
    parts = []
    for word in words:
        marked = MARKER + word
        spans.append((pos, pos + len(marked)))
        parts.append(marked)
        pos += len(marked)
    return "".join(parts), spans


@dataclass
class Segmentation:
    """Tokens plus their character spans in the annotated sentence.

    ``spans`` partition the annotated text exactly; ``word_spans`` are the
    word-level spans in the same coordinate system (used when projecting
    word alignments onto sub-words).
    """

    tokens: list[str]
    spans: list[tuple[int, int]]
    word_spans: list[tuple[int, int]] = field(default_factory=list)

    def validate(self) -> None:
        if len(self.tokens) != len(self.spans):
            raise ValidationError("tokens and spans differ in length")
        pos = 0
        for tok, (start, end) in zip(self.tokens, self.spans):
            if start != pos or end - start != len(tok):
                raise ValidationError(
                    f"span {start, end} does not match token {tok!r} at {pos}"
                )
            pos = end

    @property
    def annotated_text(self) -> str:
        return "".join(self.tokens)


def decode_tokens(tokens: list[str]) -> str:
    """Concatenate tokens and map the marker back to spaces."""
    text = "".join(tokens).replace(MARKER, " ")
    if text.startswith(" "):
        text = text[1:]
    return text


def segment_words(
    words: list[str], segment_one: "callable"
) -> Segmentation:
    """Build a sentence Segmentation from a per-word segmenter.

    ``segment_one`` receives a marker-annotated word and returns its
    tokens; spans are accumulated over the concatenated sentence.
    """
    annotated, word_spans = annotate(words)
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    for word in words:
        for tok in segment_one(MARKER + word):
            spans.append((pos, pos + len(tok)))
            tokens.append(tok)
            pos += len(tok)
    seg = Segmentation(tokens, spans, word_spans)
    if seg.annotated_text != annotated:
        raise ValidationError("segmenter did not reproduce the annotated word")
    return seg
