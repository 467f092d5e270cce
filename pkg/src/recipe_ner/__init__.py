"""Named entity recognition toolkit for recipe ingredient phrases."""

from .corpus import (ENTITY_TAGS, TAGS, Dataset, Phrase, Tag, Token, load_conll, save_conll,
                     tag_vocabulary, tokenize)

__version__ = "0.1.0"

__all__ = ["ENTITY_TAGS", "TAGS", "Dataset", "Phrase", "Tag", "Token", "load_conll",
           "save_conll", "tag_vocabulary", "tokenize"]
