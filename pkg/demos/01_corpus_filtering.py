"""Walk through the corpus filter: which articles survive and why.

Run: python3 demos/01_corpus_filtering.py
"""

from datetime import date

from santrauka import FilterConfig, corpus_stats, filter_article, overlap_ratio
from santrauka.corpus import Article, format_stats_table

config = FilterConfig()
print("Rules (checked in order):")
print(f"  summary length  > {config.min_summary_chars}")
print(f"  body length     > {config.min_body_chars}")
print(f"  body length     >= {config.min_body_to_summary_ratio} x summary length")
print(f"  overlap ratio   <  {config.max_overlap_ratio}")
print()

body_filler = "rudens lapai krenta ant tako ir vejas juos nesa tolyn " * 6

articles = [
    Article(
        source="alpha.lt",
        summary="Vyriausybe pristate nauja svietimo reforma mokykloms",
        body=body_filler,
        published_at=date(2019, 3, 14),
    ),
    Article(source="alpha.lt", summary="Trumpa", body=body_filler),
    Article(
        source="beta.lt",
        summary="Si santrauka yra beveik tokia pati kaip tekstas zodis zodin",
        body="ivadas: " + "Si santrauka yra beveik tokia pati kaip tekstas zodis zodin " * 5,
        published_at=date(2020, 9, 23),
    ),
    Article(
        source="beta.lt",
        summary="Ilga santrauka apie futbolo rungtynes kurios vyko vakar vakare miesto stadione",
        body="Rungtynes baigesi lygiosiomis po atkaklios kovos abiejose pusese",
    ),
]

decisions = []
for article in articles:
    decision = filter_article(article, config)
    decisions.append(decision)
    verdict = "KEEP" if decision is None else f"reject ({decision})"
    overlap = overlap_ratio(article.summary, article.body)
    print(f"{article.source:<9} overlap={overlap:.2f}  {verdict}")
    print(f"  summary: {article.summary[:60]}...")

print()
report = corpus_stats(zip(articles, decisions))
print(format_stats_table(report))
