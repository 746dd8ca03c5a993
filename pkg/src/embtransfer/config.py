"""JSON run configuration with per-command CLI overrides.

One config file describes a full pipeline run; every command reads only
its own section plus paths. Defaults mirror the usual setup: 50K
sub-word vocabulary, 512-dimensional embeddings, 5 EM iterations per
aligner stage.
"""

from __future__ import annotations

import copy
import json
import os

from .errors import FormatError, ValidationError

DEFAULT_CONFIG: dict = {
    "paths": {
        "source_corpus": None,
        "target_corpus": None,
        "parent_embeddings": None,
        "parent_vocab": None,
        "child_vocab": None,
        "output_dir": "out",
    },
    "tokenizer": {
        "kind": "unigram",
        "vocab_size": 50000,
        "source_training_text": None,
        "target_training_text": None,
        "source_model": None,
        "target_model": None,
        "em_rounds": 2,
        "shrink_factor": 0.75,
        "min_pair_freq": 2,
    },
    "aligner": {
        "model1_iterations": 5,
        "hmm_iterations": 5,
        "max_jump": 5,
        "null_weight": 0.2,
        "symmetrization": None,
    },
    "transfer": {
        "strategy": "mean",
        "k": "all",
        "rank": 1,
        "seed": 0,
        "dim": 512,
        "gaussian_mean": None,
        "gaussian_std": None,
        "min_count": 1,
        "format": "binary",
    },
}


def load_config(path: str | os.PathLike | None) -> dict:
    """Read a JSON config and overlay it on the defaults."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        return config
    if not os.path.exists(path):
        raise ValidationError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"config is not valid JSON: {exc}", path=path)
    for section, values in user.items():
        if section not in config:
            raise ValidationError(f"unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ValidationError(f"config section {section!r} must be an object")
        for key, value in values.items():
            if key not in config[section]:
                raise ValidationError(f"unknown config key {section}.{key}")
            config[section][key] = value
    return config


def apply_overrides(config: dict, section: str, overrides: dict) -> None:
    for key, value in overrides.items():
        if value is not None:
            config[section][key] = value


def require_file(path, what: str) -> str:
    if path is None:
        raise ValidationError(f"{what} is not configured")
    if not os.path.exists(path):
        raise ValidationError(f"input not found: {what} at {path}")
    return os.fspath(path)


def validate_common(config: dict) -> None:
    tok = config["tokenizer"]
    if tok["kind"] not in ("unigram", "bpe"):
        raise ValidationError(f"tokenizer.kind must be unigram or bpe, got {tok['kind']!r}")
    if not isinstance(tok["vocab_size"], int) or tok["vocab_size"] < 1:
        raise ValidationError("tokenizer.vocab_size must be a positive integer")
    tr = config["transfer"]
    if tr["strategy"] not in ("baseline", "mi", "top1", "mean", "single"):
        raise ValidationError(f"unknown transfer.strategy {tr['strategy']!r}")
    if tr["format"] not in ("binary", "text"):
        raise ValidationError("transfer.format must be binary or text")
    if tr["k"] != "all" and (not isinstance(tr["k"], int) or tr["k"] < 1):
        raise ValidationError("transfer.k must be 'all' or a positive integer")
