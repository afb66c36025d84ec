"""The whole desk-scale pipeline through the library API.

Builds a synthetic news corpus, filters it, trains a character-level
3-gram model on the training summaries, beam-decodes summaries for the
validation articles, and prints the aggregate report.

Run: python3 demos/04_full_pipeline.py
"""

import numpy as np

from santrauka import (
    DecodeConfig,
    aggregate,
    batch_decode,
    char_vocabulary,
    corpus_stats,
    evaluate_pair,
    filter_article,
    render_table,
    split_validation,
    train_ngram,
    viterbi_segment,
)
from santrauka.corpus import Article, FilterConfig, format_stats_table

rng = np.random.default_rng(7)
summary_words = ["kalba", "diena", "miela", "balta", "gelme", "medis", "akis"]
body_words = ["noru", "purvo", "rytu", "sausu", "tyru", "vyru", "zuvys", "sodus"]

articles = []
for i in range(200):
    summary = " ".join(rng.choice(summary_words, size=8))
    body = " ".join(rng.choice(body_words, size=70))
    articles.append(Article(source=f"site{i % 3}.lt", summary=summary, body=body))

# 1. filter
config = FilterConfig()
decisions = [filter_article(a, config) for a in articles]
kept = [a for a, d in zip(articles, decisions) if d is None]
print(format_stats_table(corpus_stats(zip(articles, decisions))))
print()

# 2. split
train, validation = split_validation(kept, n_validation=20, seed=7)
print(f"train={len(train)} validation={len(validation)}")

# 3. train a character-level 3-gram model on training summaries
vocab = char_vocabulary(a.summary for a in train)
streams = [viterbi_segment(a.summary, vocab) for a in train]
model = train_ngram(streams, order=3, alpha=0.5)
print(f"model: order={model.order} vocab={len(model.vocab)} contexts={len(model.counts)}")
print()

# 4. decode: condition each prompt on the start of the article body
decode_config = DecodeConfig(
    method="sample", top_p=0.9, no_repeat_ngram_size=2, max_length=80, seed=7
)
prompts = [viterbi_segment(a.body, vocab).ids[:48] for a in validation]
results = batch_decode(model, prompts, decode_config)
for result, article in list(zip(results, validation))[:3]:
    print(f"generated: {result.text!r}")
    print(f"reference: {article.summary!r}")
    print()

# 5. evaluate
records = [
    evaluate_pair(result.text, article.summary, stemmer="lithuanian-light")
    for result, article in zip(results, validation)
]
print(render_table({"sample(p=0.9)": aggregate(records)}))
print()
print("The same run, via the command line:")
print("  santrauka pipeline --input corpus.jsonl --output report.json \\")
print("      --n-validation 20 --method sample --top-p 0.9 --seed 7")
