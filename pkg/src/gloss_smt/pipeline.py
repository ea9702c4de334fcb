"""End-to-end training: alignment -> symmetrization -> phrases -> language model.

Artifacts written to the output directory:

=====================  =====================================================
``fwd.ibm{1,2,3}.txt``  English-to-gloss alignment models (ibm3 if trained)
``rev.ibm{1,2,3}.txt``  gloss-to-English alignment models
``alignments.txt``      symmetrized links per pair, ``i-j`` (1-based)
``phrase-table.txt``    extracted phrase pairs
``lm.txt``              gloss n-gram counts
``report.txt``          log-likelihoods and watched t(e|f) trajectories
``pipeline.json``       the configuration used
=====================  =====================================================
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .corpus import ParallelCorpus, load_parallel_corpus
from .decoder import DecoderConfig
from .ngram_lm import DEFAULT_BACKOFF, DEFAULT_ORDER, NGramModel, train_ngram
from .phrase_model import DEFAULT_MAX_PHRASE, PhraseTable, build_phrase_table
from .string_metrics import JaroWinklerConfig
from .word_align import (
    EmOptions,
    load_model,
    save_model,
    symmetrize,
    train_model1,
    train_model2,
    train_model3,
    viterbi_alignment,
)

PIPELINE_FILE = "pipeline.json"
ALIGNMENTS_FILE = "alignments.txt"
PHRASE_FILE = "phrase-table.txt"
LM_FILE = "lm.txt"
REPORT_FILE = "report.txt"


class PipelineError(Exception):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass
class PipelineConfig:
    corpus: str
    out_dir: str = "model"
    iters_m1: int = 5
    iters_m2: int = 1
    iters_m3: int = 3
    alpha: float = 0.5
    blend: bool = True
    jw_prefix_scale: float = 0.1
    jw_max_prefix: int = 4
    max_phrase: int = DEFAULT_MAX_PHRASE
    lm_order: int = DEFAULT_ORDER
    lm_backoff: float = DEFAULT_BACKOFF
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    watch: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        for name in ("iters_m1", "iters_m2", "iters_m3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if isinstance(self.decoder, dict):
            self.decoder = DecoderConfig(**self.decoder)
        self.watch = [tuple(w) for w in self.watch]

    def em_options(self, iterations: int, include_null: bool = False) -> EmOptions:
        return EmOptions(
            iterations=iterations,
            blend_alpha=self.alpha if self.blend else None,
            jw_config=JaroWinklerConfig(self.jw_prefix_scale, self.jw_max_prefix),
            include_null=include_null,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        return cls(**json.loads(text))


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


class _Report:
    def __init__(self, watch):
        self.watch = list(watch)
        self.lines: list[str] = []

    def section(self, title: str):
        self.lines.append(f"[{title}]")

    def trajectory_hook(self, store: list):
        def hook(k, table, ll):
            store.append((k, ll, [table.prob(e, f) for f, e in self.watch]))

        return hook

    def emit(self, title: str, store: list):
        self.section(title)
        self.lines.append("iteration\tloglik")
        for k, ll, _ in store:
            if k:
                self.lines.append(f"{k}\t{_fmt(ll)}")
        if self.watch:
            header = ["e", "f"] + ["initial" if k == 0 else f"it{k}" for k, _, _ in store]
            self.lines.append("\t".join(header))
            for w, (f, e) in enumerate(self.watch):
                row = [e, f] + [f"{vals[w]:.4f}" for _, _, vals in store]
                self.lines.append("\t".join(row))
        self.lines.append("")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:  # noqa: BLE001 - relabelled with the stage name
        raise PipelineError(name, exc) from exc


def _train_direction(corpus: ParallelCorpus, cfg: PipelineConfig, out: Path, prefix: str, report: _Report):
    alpha = cfg.alpha if cfg.blend else None
    traj1: list = []
    m1, _ = _stage(
        f"{prefix} model 1",
        train_model1,
        corpus,
        cfg.em_options(cfg.iters_m1),
        on_iteration=report.trajectory_hook(traj1),
    )
    save_model(m1, out / f"{prefix}.ibm1.txt", cfg.iters_m1, alpha)
    report.emit(f"{prefix} model 1", traj1)
    traj2: list = []
    m2, _ = _stage(
        f"{prefix} model 2",
        train_model2,
        corpus,
        cfg.em_options(cfg.iters_m2),
        m1,
        on_iteration=report.trajectory_hook(traj2),
    )
    save_model(m2, out / f"{prefix}.ibm2.txt", cfg.iters_m2, alpha)
    report.emit(f"{prefix} model 2", traj2)
    if cfg.iters_m3 == 0:
        return m2
    traj3: list = []
    m3, _ = _stage(
        f"{prefix} model 3",
        train_model3,
        corpus,
        m2,
        cfg.iters_m3,
        on_iteration=report.trajectory_hook(traj3),
    )
    save_model(m3, out / f"{prefix}.ibm3.txt", cfg.iters_m3, None, seed_file=f"{prefix}.ibm2.txt")
    report.emit(f"{prefix} model 3", traj3)
    return m3


def final_model_path(model_dir: str | Path, prefix: str) -> Path:
    model_dir = Path(model_dir)
    m3 = model_dir / f"{prefix}.ibm3.txt"
    return m3 if m3.exists() else model_dir / f"{prefix}.ibm2.txt"


def load_alignment_models(model_dir: str | Path):
    return load_model(final_model_path(model_dir, "fwd")), load_model(final_model_path(model_dir, "rev"))


def symmetrized_links(corpus: ParallelCorpus, fwd, rev) -> list[set[tuple[int, int]]]:
    out = []
    for pair in corpus:
        a_fwd, _ = viterbi_alignment(pair, fwd)
        a_rev, _ = viterbi_alignment(pair.reversed(), rev)
        out.append(symmetrize(a_fwd, a_rev))
    return out


def format_links(links) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(links))


def parse_links(line: str) -> set[tuple[int, int]]:
    links = set()
    for item in line.split():
        i, _, j = item.partition("-")
        links.add((int(i), int(j)))
    return links


def write_alignments(path: Path, alignments) -> None:
    path.write_text("".join(format_links(l) + "\n" for l in alignments), encoding="utf-8")


def read_alignments(path: Path) -> list[set[tuple[int, int]]]:
    return [parse_links(line) for line in path.read_text(encoding="utf-8").splitlines()]


def train(cfg: PipelineConfig) -> dict:
    """Run every training stage and write the artifacts into ``cfg.out_dir``."""
    corpus = _stage("corpus", load_parallel_corpus, cfg.corpus)
    if not len(corpus):
        raise PipelineError("corpus", ValueError(f"{cfg.corpus} contains no sentence pairs"))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / PIPELINE_FILE).write_text(cfg.to_json(), encoding="utf-8")

    report = _Report(cfg.watch)
    report.lines += [
        "# gloss-smt training report",
        f"pairs\t{len(corpus)}",
        f"blend\t{'alpha=' + repr(cfg.alpha) if cfg.blend else 'off'}",
        "",
    ]
    fwd = _train_direction(corpus, cfg, out, "fwd", report)
    rev_report = _Report([(e, f) for f, e in cfg.watch])
    rev = _train_direction(corpus.reversed(), cfg, out, "rev", rev_report)
    report.lines += rev_report.lines

    alignments = _stage("symmetrize", symmetrized_links, corpus, fwd, rev)
    write_alignments(out / ALIGNMENTS_FILE, alignments)

    stored = read_alignments(out / ALIGNMENTS_FILE)
    table = _stage("phrases", build_phrase_table, corpus, stored, cfg.max_phrase)
    table.save(out / PHRASE_FILE)

    lm = _stage("lm", train_ngram, (p.target for p in corpus), cfg.lm_order, cfg.lm_backoff)
    lm.save(out / LM_FILE)

    report.lines += [f"phrase pairs\t{len(table)}", f"lm n-grams\t{len(lm.counts)}"]
    (out / REPORT_FILE).write_text(report.text(), encoding="utf-8")
    return {"corpus": corpus, "fwd": fwd, "rev": rev, "alignments": alignments, "phrases": table, "lm": lm}


def load_translation_models(model_dir: str | Path) -> tuple[PhraseTable, NGramModel, PipelineConfig | None]:
    model_dir = Path(model_dir)
    table = PhraseTable.load(model_dir / PHRASE_FILE)
    lm = NGramModel.load(model_dir / LM_FILE)
    cfg_path = model_dir / PIPELINE_FILE
    cfg = PipelineConfig.from_json(cfg_path.read_text(encoding="utf-8")) if cfg_path.exists() else None
    return table, lm, cfg


__all__ = [
    "PipelineConfig",
    "PipelineError",
    "load_alignment_models",
    "load_translation_models",
    "symmetrized_links",
    "train",
]
