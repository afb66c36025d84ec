"""Small hand-specified models for tests and demos."""

from __future__ import annotations

import math

from santrauka.lm import TableModel
from santrauka.tokenizer import Vocabulary

__all__ = ["greedy_trap_model"]


def greedy_trap_model() -> TableModel:
    """Three-token model where the greedy path is not the best path.

    The first step slightly favors token A, but continuations after B
    are far more certain, so the two-step sequence (B, eos) outscores
    greedy's (A, eos). A beam of two finds it.
    """
    vocab = Vocabulary(
        ["A", "B", "<eos>"],
        [math.log(1 / 3)] * 3,
        eos="<eos>",
        unk=None,
    )
    return TableModel(
        vocab,
        start=[0.55, 0.45, 0.0],
        transitions={
            0: [0.3, 0.2, 0.5],  # after A
            1: [0.05, 0.05, 0.9],  # after B
        },
    )
