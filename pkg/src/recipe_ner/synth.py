"""Synthetic tagged ingredient phrases for tests, benchmarks and fixtures.

Every word belongs to exactly one tag, so corpora drawn from here are
separable: a CRF with a word feature can fit them perfectly.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import Dataset, Phrase, Tag, Token

VOCAB: dict[Tag, tuple[str, ...]] = {
    Tag.QUANTITY: ("1", "2", "3", "4", "6", "8", "12", "1/2", "1/4", "3/4", "1/3", "1.5"),
    Tag.UNIT: ("cup", "cups", "tablespoon", "tablespoons", "teaspoon", "teaspoons", "pound",
               "pounds", "ounce", "ounces", "clove", "cloves", "can", "pinch", "slices",
               "package", "tbsp", "tsp", "sprigs", "stalks"),
    Tag.SIZE: ("large", "small", "medium", "big", "thin", "thick", "jumbo"),
    Tag.STATE: ("chopped", "diced", "minced", "sliced", "grated", "melted", "softened",
                "beaten", "peeled", "crushed", "shredded", "cut", "packed", "drained",
                "toasted", "halved"),
    Tag.TEMP: ("cold", "warm", "hot", "frozen", "chilled", "lukewarm"),
    Tag.DF: ("fresh", "dried", "dry"),
    Tag.NAME: ("sugar", "butter", "salt", "garlic", "onion", "onions", "flour", "milk", "eggs",
               "egg", "tomatoes", "basil", "rice", "cumin", "water", "cilantro", "ginger",
               "paneer", "lentils", "spinach", "carrots", "potatoes", "honey", "yogurt",
               "cheese", "chicken", "beef", "parsley", "oregano", "thyme", "chikoo",
               "olive", "oil", "bell", "pepper", "lemon", "juice", "cream", "broth",
               "vanilla", "extract", "coconut", "almonds", "cinnamon"),
    Tag.O: ("to", "taste", "for", "garnish", "optional", "divided", "of", "or", "into",
            "pieces", ",", "-LRB-", "-RRB-", "and", "plus", "more"),
}

# multi-token names drawn as a unit so phrases read naturally
_NAMES: tuple[tuple[str, ...], ...] = (
    ("sugar",), ("butter",), ("salt",), ("garlic",), ("onion",), ("onions",), ("flour",),
    ("milk",), ("eggs",), ("egg",), ("tomatoes",), ("basil",), ("rice",), ("cumin",),
    ("water",), ("cilantro",), ("ginger",), ("paneer",), ("lentils",), ("spinach",),
    ("carrots",), ("potatoes",), ("honey",), ("yogurt",), ("cheese",), ("chicken",),
    ("beef",), ("parsley",), ("oregano",), ("thyme",), ("chikoo",), ("olive", "oil"),
    ("bell", "pepper"), ("lemon", "juice"), ("cream", "cheese"), ("chicken", "broth"),
    ("vanilla", "extract"), ("coconut", "milk"), ("almonds",), ("cinnamon",),
)

Q, U, SZ, ST, TP, DF, N, O = (Tag.QUANTITY, Tag.UNIT, Tag.SIZE, Tag.STATE, Tag.TEMP,
                              Tag.DF, Tag.NAME, Tag.O)

# N marks the (possibly multi-word) ingredient name; other slots are single words
_PATTERNS: tuple[tuple[Tag | str, ...], ...] = (
    (Q, U, N),
    (Q, U, ST, N),
    (Q, SZ, N),
    (Q, SZ, N, ",", ST),
    (Q, U, DF, N),
    (Q, U, TP, N),
    (Q, U, DF, N, ",", ST),
    (N, "to", "taste"),
    (Q, "-LRB-", Q, U, "-RRB-", U, N),
    (Q, U, N, ",", ST, "into", "pieces"),
    (Q, Q, U, N),
    (DF, N, "for", "garnish"),
    (Q, U, SZ, ST, N),
    (Q, U, TP, N, ",", "divided"),
    (N,),
    (Q, N),
)


def random_phrase(rng: np.random.Generator, id: str = "", source: str | None = None) -> Phrase:
    pattern = _PATTERNS[int(rng.integers(len(_PATTERNS)))]
    toks: list[Token] = []
    for i, slot in enumerate(pattern):
        if not isinstance(slot, Tag):
            toks.append(Token(slot, O))
        elif slot is N:
            toks.extend(Token(w, N) for w in _NAMES[int(rng.integers(len(_NAMES)))])
        elif slot is Q and i > 0 and pattern[i - 1] is Q:
            # mixed number: integer followed by a fraction
            toks.append(Token(("1/2", "1/4", "3/4", "1/3")[int(rng.integers(4))], Q))
        else:
            words = VOCAB[slot]
            if slot is Q and i + 1 < len(pattern) and pattern[i + 1] is Q:
                words = ("1", "2", "3")
            toks.append(Token(words[int(rng.integers(len(words)))], slot))
    return Phrase(tuple(toks), id=id, source=source)


def synthetic_corpus(n: int, seed: int = 0, sources: Sequence[str] = (),
                     name: str = "synthetic") -> Dataset:
    rng = np.random.Generator(np.random.PCG64(seed))
    phrases = []
    for i in range(n):
        src = sources[int(rng.integers(len(sources)))] if sources else None
        phrases.append(random_phrase(rng, id=str(i), source=src))
    return Dataset(tuple(phrases), name=name)


def random_tagged_phrase(rng: np.random.Generator, max_len: int = 8, id: str = "",
                         vocab_size: int = 12) -> Phrase:
    """Unstructured phrase: random length, random tags, words from a small per-tag pool."""
    n = int(rng.integers(1, max_len + 1))
    tags = list(Tag)
    toks = []
    for _ in range(n):
        t = tags[int(rng.integers(len(tags)))]
        toks.append(Token(f"{t.value.lower()}{int(rng.integers(vocab_size))}", t))
    return Phrase(tuple(toks), id=id)
