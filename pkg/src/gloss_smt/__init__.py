"""Statistical translation from English to ASL gloss.

IBM Models 1-3 word alignment (optionally blended with Jaro-Winkler string
similarity), phrase extraction, a stupid-backoff n-gram language model and a
stack decoder.
"""

from .corpus import ParallelCorpus, SentencePair, load_bundled, load_parallel_corpus, tokenize
from .decoder import DecodeFailure, DecoderConfig, decode, exhaustive_decode
from .ngram_lm import NGramModel, train_ngram
from .phrase_model import PhraseTable, build_phrase_table, extract_phrases
from .pipeline import PipelineConfig, train
from .string_metrics import jaro, jaro_winkler

__version__ = "0.1.0"

__all__ = [
    "DecodeFailure",
    "DecoderConfig",
    "NGramModel",
    "ParallelCorpus",
    "PhraseTable",
    "PipelineConfig",
    "SentencePair",
    "build_phrase_table",
    "decode",
    "exhaustive_decode",
    "extract_phrases",
    "jaro",
    "jaro_winkler",
    "load_bundled",
    "load_parallel_corpus",
    "tokenize",
    "train",
    "train_ngram",
]
