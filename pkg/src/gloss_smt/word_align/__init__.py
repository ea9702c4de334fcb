"""IBM Models 1-3 word alignment with optional Jaro-Winkler blending."""

from .em import (
    AlignmentFunction,
    corpus_log_likelihood,
    model1_em_iteration,
    model1_sentence_prob,
    model2_em_iteration,
    model2_sentence_prob,
    train_model1,
    train_model2,
    viterbi_alignment,
)
from .model3 import (
    Model3Params,
    hill_climb,
    model3_alignment_prob,
    model3_em_iteration,
    null_generation_prob,
    train_model3,
)
from .persist import ModelFormatError, load_model, save_model
from .report import format_giza_alignment, render_alignment_matrix
from .symmetrize import symmetrize
from .tables import (
    AlignmentError,
    DegenerateRow,
    DistortionTable,
    EmOptions,
    Model2Params,
    TranslationTable,
    blended_link_weight,
    similarity_matrix,
)

__all__ = [
    "AlignmentError",
    "AlignmentFunction",
    "DegenerateRow",
    "DistortionTable",
    "EmOptions",
    "Model2Params",
    "Model3Params",
    "ModelFormatError",
    "TranslationTable",
    "blended_link_weight",
    "corpus_log_likelihood",
    "format_giza_alignment",
    "hill_climb",
    "load_model",
    "model1_em_iteration",
    "model1_sentence_prob",
    "model2_em_iteration",
    "model2_sentence_prob",
    "model3_alignment_prob",
    "model3_em_iteration",
    "null_generation_prob",
    "render_alignment_matrix",
    "save_model",
    "similarity_matrix",
    "symmetrize",
    "train_model1",
    "train_model2",
    "train_model3",
    "viterbi_alignment",
]
