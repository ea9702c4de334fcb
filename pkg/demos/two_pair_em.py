"""Watch Model 1 EM settle on two sentence pairs, with and without string similarity.

Run: python3 demos/two_pair_em.py
"""

from gloss_smt.corpus import ParallelCorpus
from gloss_smt.word_align import EmOptions, train_model1, train_model2

corpus = ParallelCorpus.from_pairs([("i understand", "I UNDERSTAND"), ("i play piano", "I PLAY PIANO")])
cells = [("I", "i"), ("UNDERSTAND", "understand"), ("PLAY", "play"), ("PLAY", "piano"), ("PIANO", "piano")]


def trajectory(opts):
    rows = []
    train_model1(corpus, opts, on_iteration=lambda k, tt, ll: rows.append([tt.prob(e, f) for e, f in cells]))
    return rows


print("t(e|f) per Model 1 iteration, plain EM")
for (e, f), values in zip(cells, zip(*trajectory(EmOptions(iterations=3)))):
    print(f"  {e:>10} | {f:<10}", "  ".join(f"{v:.4f}" for v in values))

# Blending mixes each link weight with the Jaro-Winkler similarity of the two
# words, so 'play' and 'PLAY' pull together even though both glosses co-occur
# with both English words.
print("\nsame, blended with Jaro-Winkler at alpha 0.5")
for (e, f), values in zip(cells, zip(*trajectory(EmOptions(iterations=3, blend_alpha=0.5)))):
    print(f"  {e:>10} | {f:<10}", "  ".join(f"{v:.4f}" for v in values))

m1, _ = train_model1(corpus, EmOptions(iterations=3))
print("\nModel 2 seeded with three Model 1 iterations")
for n in (1, 2, 3):
    m2, _ = train_model2(corpus, EmOptions(iterations=n), m1)
    print(f"  after {n}: t(I|i)={m2.ttable.prob('I', 'i'):.4f}"
          f"  t(UNDERSTAND|understand)={m2.ttable.prob('UNDERSTAND', 'understand'):.4f}")
