"""Compare greedy search, beam search, and sampling on small models.

Run: python3 demos/02_decoding_strategies.py
"""

import math

import numpy as np

from santrauka import (
    DecodeConfig,
    beam_search,
    char_vocabulary,
    greedy_decode,
    greedy_trap_model,
    sample_decode,
    train_ngram,
    viterbi_segment,
)
from santrauka.lm import apply_temperature

# --- part 1: why beam search exists -----------------------------------------
# On this fixture the single most likely first token leads to a worse
# two-step sequence. Greedy falls for it; a beam of two does not.
model = greedy_trap_model()
greedy = greedy_decode(model, (), DecodeConfig(max_length=8))
beam = beam_search(model, (), DecodeConfig(method="beam", beam_size=2, max_length=8))
print("trap model:")
print(f"  greedy  -> {greedy.text!r:6} log-prob {greedy.score:.4f}")
print(f"  beam(2) -> {beam.text!r:6} log-prob {beam.score:.4f}  (higher is better)")
print()

# --- part 2: temperature reshapes a distribution -----------------------------
logits = np.log([0.6, 0.3, 0.1])
print("temperature sweep over P = [0.6, 0.3, 0.1]:")
for tau in (0.25, 1.0, 4.0):
    shaped = apply_temperature(logits, tau)
    print(f"  tau={tau:<5} -> {np.round(shaped, 3).tolist()}")
print()

# --- part 3: a character model trained on real-looking text ------------------
corpus = [
    "labas rytas vilnius",
    "labas vakaras kaunas",
    "geras rytas visiems",
    "gera diena visiems skaitytojams",
    "naujienos is viso pasaulio kasdien",
]
vocab = char_vocabulary(corpus)
streams = [viterbi_segment(text, vocab) for text in corpus]
lm = train_ngram(streams, order=3, alpha=0.01)

print("order-3 character model, three decoding strategies:")
greedy = greedy_decode(lm, (), DecodeConfig(max_length=40, no_repeat_ngram_size=4))
print(f"  greedy          : {greedy.text!r}")
beam = beam_search(
    lm, (), DecodeConfig(method="beam", beam_size=10, max_length=40, no_repeat_ngram_size=4)
)
print(f"  beam(10)        : {beam.text!r}")
print("  (beam scores are raw cumulative log-probs, so wide beams tend")
print("   toward shorter outputs; there is no length normalization)")
for seed in range(3):
    sampled = sample_decode(
        lm,
        (),
        DecodeConfig(
            method="sample", seed=seed, max_length=40, top_p=0.9, temperature=0.8
        ),
    )
    print(f"  sample(seed={seed})  : {sampled.text!r}")

print()
prompt = viterbi_segment("labas ", vocab)
continued = greedy_decode(lm, prompt, DecodeConfig(max_length=30))
print(f"greedy continuation of 'labas ': {continued.text!r}")
print(f"total log-prob in nats: {continued.score:.3f} = ln {math.exp(continued.score):.3g}")
