"""Train the whole pipeline on the bundled corpus and translate its sentences.

Run: python3 demos/translate_bundled.py
"""

import tempfile

from gloss_smt.corpus import bundled_corpus_path, load_bundled
from gloss_smt.decoder import decode
from gloss_smt.pipeline import PipelineConfig, train
from gloss_smt.word_align import format_giza_alignment

with tempfile.TemporaryDirectory() as out:
    result = train(PipelineConfig(corpus=str(bundled_corpus_path()), out_dir=out))

corpus = load_bundled()
print(f"{len(result['phrases'])} phrase pairs, {len(result['lm'].counts)} LM n-grams\n")

print("symmetrized alignments")
for pair, links in zip(corpus, result["alignments"]):
    print(" ", format_giza_alignment(pair, links))

print("\ntranslations (* marks an exact match with the corpus gloss)")
hits = 0
for pair in corpus:
    out = decode(pair.source, result["phrases"], result["lm"])
    exact = out.output == list(pair.target)
    hits += exact
    print(f"  {'*' if exact else ' '} {' '.join(pair.source):<40} -> {' '.join(out.output)}")
print(f"\n{hits}/{len(corpus)} exact")

print("\nderivation of the first sentence")
print(decode(corpus[0].source, result["phrases"], result["lm"]).dump())
