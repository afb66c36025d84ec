"""Sequence decoding over any language model: greedy, beam, and sampling.

Every step starts from the model's logits and shapes them into the
distribution the step actually uses, in a fixed composition order:
temperature, then top-k, then top-p (sampling paths only), then the
repeated-n-gram ban, renormalizing along the way. Greedy and plain beam
search ignore the top-k/top-p filters.

Scores are raw cumulative log-probabilities of the selected tokens under
each step's shaped distribution; no length normalization is applied.
Ties anywhere resolve toward the lower token id, which makes every
decoder deterministic. Sampling draws from numpy's seeded PCG64 stream
through inverse-CDF lookup, so outputs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from santrauka.lm import LanguageModel, apply_temperature
from santrauka.tokenizer import TokenSequence, detokenize, token_ids

__all__ = [
    "DecodeConfig",
    "DecodeResult",
    "Hypothesis",
    "batch_decode",
    "beam_search",
    "block_repeated_ngrams",
    "decode",
    "greedy_decode",
    "sample_decode",
    "top_k_filter",
    "top_p_filter",
]

METHODS = ("greedy", "beam", "sample")


@dataclass(frozen=True)
class DecodeConfig:
    """Decoding parameters shared by all methods.

    ``top_k``/``top_p``/``no_repeat_ngram_size`` are off when None. The
    ``sample_within_beam`` flag turns beam search stochastic: successor
    candidates are sampled from the filtered distribution instead of
    taken greedily.
    """

    method: str = "greedy"
    beam_size: int = 1
    top_k: int | None = None
    top_p: float | None = None
    temperature: float = 1.0
    no_repeat_ngram_size: int | None = None
    max_length: int = 128
    seed: int = 0
    sample_within_beam: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.beam_size < 1:
            raise ValueError("beam_size must be at least 1")
        if self.max_length < 1:
            raise ValueError("max_length must be at least 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be at least 1")
        if self.top_p is not None and not 0 < self.top_p <= 1:
            raise ValueError("top_p must lie in (0, 1]")
        if self.no_repeat_ngram_size is not None and self.no_repeat_ngram_size < 1:
            raise ValueError("no_repeat_ngram_size must be at least 1")


@dataclass(frozen=True)
class Hypothesis:
    """A partial output with its cumulative log-probability."""

    ids: tuple[int, ...]
    log_prob: float
    finished: bool


@dataclass(frozen=True)
class DecodeResult:
    """A finished decode: generated ids, their text, score, step count."""

    tokens: TokenSequence
    text: str
    score: float
    steps: int


def top_k_filter(dist: np.ndarray, k: int) -> np.ndarray:
    """Keep the k most probable tokens, zero the rest, renormalize.

    Ties on probability resolve toward the lower id. k >= vocabulary
    size returns the input unchanged.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    dist = np.asarray(dist, dtype=float)
    if k >= dist.size:
        return dist.copy()
    order = np.lexsort((np.arange(dist.size), -dist))
    out = np.zeros_like(dist)
    keep = order[:k]
    out[keep] = dist[keep]
    return out / out.sum()


def top_p_filter(dist: np.ndarray, p: float) -> np.ndarray:
    """Keep the largest head of the sorted distribution with mass <= p.

    At least the single most probable token always survives, even when
    its probability alone exceeds p. p=1 returns the input unchanged.
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    dist = np.asarray(dist, dtype=float)
    if p == 1:
        return dist.copy()
    order = np.lexsort((np.arange(dist.size), -dist))
    cumulative = np.cumsum(dist[order])
    keep_count = int(np.searchsorted(cumulative, p, side="right"))
    if keep_count == 0:
        keep_count = 1
    out = np.zeros_like(dist)
    keep = order[:keep_count]
    out[keep] = dist[keep]
    return out / out.sum()


def block_repeated_ngrams(
    ids: Sequence[int], dist: np.ndarray, n: int, eos_id: int
) -> np.ndarray:
    """Zero out tokens that would repeat an n-gram already in ``ids``.

    A token t is banned when the last n-1 generated ids followed by t
    form an n-gram that already occurs in the sequence. If every token
    would be banned, the distribution collapses to eos so decoding can
    always halt.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    dist = np.asarray(dist, dtype=float)
    ids = tuple(ids)
    if len(ids) < n:
        return dist.copy()
    seen = {ids[i : i + n] for i in range(len(ids) - n + 1)}
    context = ids[len(ids) - (n - 1) :] if n > 1 else ()
    out = dist.copy()
    for gram in seen:
        if gram[:-1] == context:
            out[gram[-1]] = 0.0
    total = out.sum()
    if total <= 0.0:
        out[:] = 0.0
        out[eos_id] = 1.0
        return out
    return out / total


def _shaped_distribution(
    model: LanguageModel,
    prompt_ids: tuple[int, ...],
    generated: tuple[int, ...],
    config: DecodeConfig,
    sampling: bool,
) -> np.ndarray:
    logits = model.next_logits(prompt_ids + generated)
    dist = apply_temperature(logits, config.temperature)
    if sampling:
        if config.top_k is not None:
            dist = top_k_filter(dist, config.top_k)
        if config.top_p is not None:
            dist = top_p_filter(dist, config.top_p)
    if config.no_repeat_ngram_size is not None:
        dist = block_repeated_ngrams(
            generated, dist, config.no_repeat_ngram_size, model.vocab.eos_id
        )
    return dist


def _result(
    model: LanguageModel, generated: tuple[int, ...], score: float
) -> DecodeResult:
    vocab = model.vocab
    surface = tuple(t for t in generated if not vocab.is_special(t))
    text = detokenize(TokenSequence(surface, vocab))
    return DecodeResult(
        tokens=TokenSequence(generated, vocab),
        text=text,
        score=score,
        steps=len(generated),
    )


def _prompt_finished(model: LanguageModel, prompt_ids: tuple[int, ...]) -> bool:
    return bool(prompt_ids) and prompt_ids[-1] == model.vocab.eos_id


def greedy_decode(model: LanguageModel, prompt, config: DecodeConfig) -> DecodeResult:
    """Follow the argmax of each step's shaped distribution until eos."""
    prompt_ids = token_ids(prompt)
    if _prompt_finished(model, prompt_ids):
        return _result(model, (), 0.0)
    eos = model.vocab.eos_id
    generated: tuple[int, ...] = ()
    score = 0.0
    for _ in range(config.max_length):
        dist = _shaped_distribution(model, prompt_ids, generated, config, sampling=False)
        token = int(np.argmax(dist))
        score += math.log(dist[token])
        generated = generated + (token,)
        if token == eos:
            break
    return _result(model, generated, score)


def _successors(dist: np.ndarray, count: int) -> list[int]:
    order = np.lexsort((np.arange(dist.size), -dist))
    return [int(t) for t in order[:count] if dist[t] > 0.0]


def _sampled_successors(
    dist: np.ndarray, count: int, rng: np.random.Generator
) -> list[int]:
    support = int(np.count_nonzero(dist))
    size = min(count, support)
    picks = rng.choice(dist.size, size=size, replace=False, p=dist / dist.sum())
    return sorted(int(t) for t in picks)


def beam_search(
    model: LanguageModel, prompt, config: DecodeConfig, return_all: bool = False
):
    """Keep the beam_size best partial sequences per step, return the best.

    Hypotheses that emit eos (or hit max_length) are set aside as
    finished; the winner is the finished hypothesis with the highest raw
    log-probability, ties toward the lexicographically smaller id
    sequence. With ``return_all`` the sorted finished pool is returned
    alongside the best result.
    """
    prompt_ids = token_ids(prompt)
    eos = model.vocab.eos_id
    rng = np.random.default_rng(config.seed) if config.sample_within_beam else None
    finished: list[Hypothesis] = []
    if _prompt_finished(model, prompt_ids):
        finished.append(Hypothesis((), 0.0, True))
        live: list[Hypothesis] = []
    else:
        live = [Hypothesis((), 0.0, False)]
    for _ in range(config.max_length):
        if not live:
            break
        candidates: list[Hypothesis] = []
        for hyp in live:
            dist = _shaped_distribution(
                model, prompt_ids, hyp.ids, config, sampling=config.sample_within_beam
            )
            if rng is not None:
                picks = _sampled_successors(dist, config.beam_size, rng)
            else:
                picks = _successors(dist, config.beam_size)
            for token in picks:
                candidates.append(
                    Hypothesis(
                        hyp.ids + (token,),
                        hyp.log_prob + math.log(dist[token]),
                        token == eos,
                    )
                )
        candidates.sort(key=lambda h: (-h.log_prob, h.ids))
        live = []
        for hyp in candidates:
            if hyp.finished:
                finished.append(hyp)
            elif len(live) < config.beam_size:
                live.append(hyp)
    # anything still alive ran out of budget and counts as finished
    finished.extend(Hypothesis(h.ids, h.log_prob, True) for h in live)
    finished.sort(key=lambda h: (-h.log_prob, h.ids))
    best = finished[0]
    result = _result(model, best.ids, best.log_prob)
    if return_all:
        return result, finished
    return result


def _sample_index(dist: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(dist)
    u = rng.random() * cumulative[-1]
    idx = int(np.searchsorted(cumulative, u, side="right"))
    idx = min(idx, dist.size - 1)
    while idx > 0 and dist[idx] == 0.0:
        idx -= 1
    return idx


def sample_decode(model: LanguageModel, prompt, config: DecodeConfig) -> DecodeResult:
    """Draw each token from the shaped distribution, seeded and repeatable."""
    prompt_ids = token_ids(prompt)
    if _prompt_finished(model, prompt_ids):
        return _result(model, (), 0.0)
    eos = model.vocab.eos_id
    rng = np.random.default_rng(config.seed)
    generated: tuple[int, ...] = ()
    score = 0.0
    for _ in range(config.max_length):
        dist = _shaped_distribution(model, prompt_ids, generated, config, sampling=True)
        token = _sample_index(dist, rng)
        score += math.log(dist[token])
        generated = generated + (token,)
        if token == eos:
            break
    return _result(model, generated, score)


def decode(model: LanguageModel, prompt, config: DecodeConfig) -> DecodeResult:
    """Dispatch to the decoder selected by ``config.method``."""
    if config.method == "greedy":
        return greedy_decode(model, prompt, config)
    if config.method == "beam":
        return beam_search(model, prompt, config)
    return sample_decode(model, prompt, config)


def _decode_task(task) -> tuple[DecodeResult | None, str | None]:
    model, prompt, config = task
    try:
        return decode(model, prompt, config), None
    except Exception as err:  # noqa: BLE001 - per-prompt fault isolation
        return None, f"{type(err).__name__}: {err}"


def batch_decode(
    model: LanguageModel,
    prompts: Sequence,
    config: DecodeConfig,
    workers: int = 1,
    errors: list[tuple[int, str]] | None = None,
) -> list[DecodeResult | None]:
    """Decode prompts independently, results in prompt order.

    Prompt i runs with seed ``config.seed + i``, so a batch equals the
    corresponding independent calls. A failing prompt leaves None in its
    slot and, when ``errors`` is a list, records (index, message) there;
    the rest of the batch continues. ``workers`` > 1 fans out across
    processes; ordering is unaffected.
    """
    tasks = [
        (model, token_ids(p), replace(config, seed=config.seed + i))
        for i, p in enumerate(prompts)
    ]
    if workers <= 1 or len(tasks) <= 1:
        outcomes = [_decode_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (workers * 4))
            outcomes = list(pool.map(_decode_task, tasks, chunksize=chunk))
    results: list[DecodeResult | None] = []
    for i, (result, message) in enumerate(outcomes):
        results.append(result)
        if message is not None and errors is not None:
            errors.append((i, message))
    return results
