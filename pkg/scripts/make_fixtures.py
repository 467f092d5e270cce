"""Regenerate the bundled fixture corpora under src/recipe_ner/data/fixtures/."""

from pathlib import Path

import numpy as np

from recipe_ner.corpus import Dataset, Phrase, Tag, Token, save_conll
from recipe_ner.synth import synthetic_corpus

OUT = Path(__file__).resolve().parents[1] / "src" / "recipe_ner" / "data" / "fixtures"


def add_noise(ds: Dataset, seed: int) -> Dataset:
    """Inject the error classes the cleaning rules repair."""
    rng = np.random.default_rng(seed)
    out = []
    for p in ds:
        toks = list(p.tokens)
        r = rng.random()
        if r < 0.05 and toks[0].tag is Tag.QUANTITY:
            toks[0] = Token("+" + toks[0].text, toks[0].tag)
        elif r < 0.08:
            toks = [Token(t.text, Tag.QUANTITY if t.tag is Tag.UNIT else
                          Tag.UNIT if t.tag is Tag.QUANTITY else t.tag) for t in toks]
        out.append(Phrase(tuple(toks), id=p.id, source=p.source))
    out.append(Phrase.from_pairs([("+1", "QUANTITY"), ("chikoo", "NAME")], id="chikoo", source="AR"))
    return Dataset(tuple(out), name=ds.name)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    train = add_noise(synthetic_corpus(300, seed=11, sources=("AR", "GK"), name="train"), 5)
    test = synthetic_corpus(120, seed=23, sources=("AR", "GK"), name="test")
    save_conll(train, OUT / "train.conll")
    save_conll(test, OUT / "test.conll")
    print(len(train), len(test))


if __name__ == "__main__":
    main()
