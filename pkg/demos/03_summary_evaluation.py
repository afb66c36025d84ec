"""Score candidate summaries against references with ROUGE and friends.

Run: python3 demos/03_summary_evaluation.py
"""

from santrauka import aggregate, evaluate_pair, render_table, rouge_l, rouge_n
from santrauka.metrics import lithuanian_light_stem
from santrauka.tokenizer import word_tokenize

candidate = "the cat sat on the mat"
reference = "the cat ate on a mat"
print(f"candidate: {candidate!r}")
print(f"reference: {reference!r}")
cand_tokens = word_tokenize(candidate, lowercase=True)
ref_tokens = word_tokenize(reference, lowercase=True)
for n in (1, 2):
    score = rouge_n(cand_tokens, ref_tokens, n)
    print(f"  ROUGE-{n}: P={score.precision:.3f} R={score.recall:.3f} F={score.f1:.3f}")
score = rouge_l(cand_tokens, ref_tokens)
print(f"  ROUGE-L: P={score.precision:.3f} R={score.recall:.3f} F={score.f1:.3f}")
print()

# Lithuanian is highly inflected, so "namas" and "namo" are the same noun
# in different cases. The light stemmer folds them together before ROUGE.
words = ["namas", "namo", "namui", "knyga", "knygos", "miestuose"]
print("light stemming:", {w: lithuanian_light_stem(w) for w in words})
plain = evaluate_pair("didelis namas", "didelio namo")
stemmed = evaluate_pair("didelis namas", "didelio namo", stemmer="lithuanian-light")
print(f"ROUGE-1 F without stemming: {plain.rouge1.f1:.2f}")
print(f"ROUGE-1 F with stemming   : {stemmed.rouge1.f1:.2f}")
print()

pairs = [
    ("vyriausybe pristate nauja reforma", "vyriausybe vakar pristate reforma"),
    ("krepsinio rinktine laimejo varzybas", "rinktine pralaimejo draugiskas varzybas"),
    ("oras rytoj bus saltas ir vejuotas", "sinoptikai zada salta vejuota diena"),
]
records = [evaluate_pair(c, r, stemmer="lithuanian-light") for c, r in pairs]
print("corpus-level report, mean (standard deviation):")
print(render_table({"demo": aggregate(records)}))
