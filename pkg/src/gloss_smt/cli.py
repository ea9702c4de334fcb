"""``gloss-smt`` command line: train, translate, align, lm, jw, stats.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or malformed
corpus or model files, failed training stage), 3 decode failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .corpus import SOURCE, TARGET, CorpusError, corpus_stats, load_parallel_corpus, tokenize
from .decoder import DecodeFailure, DecoderConfig, decode
from .ngram_lm import DEFAULT_BACKOFF, DEFAULT_ORDER, NGramModel, sentence_logprob, train_ngram
from .phrase_model import DEFAULT_MAX_PHRASE
from .pipeline import (
    PipelineConfig,
    PipelineError,
    load_alignment_models,
    load_translation_models,
    read_alignments,
    train,
)
from .string_metrics import JaroWinklerConfig, jaro, jaro_winkler
from .word_align import (
    ModelFormatError,
    format_giza_alignment,
    render_alignment_matrix,
    viterbi_alignment,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DECODE = 3

SEED_ENV = "GLOSS_SMT_SEED"
PARTIAL_MARKER = "!! "

log = logging.getLogger("gloss_smt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this CLI reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _watch_pair(text: str) -> tuple[str, str]:
    f, sep, e = text.partition(":")
    if not sep or not f or not e:
        raise argparse.ArgumentTypeError(f"expected <english>:<gloss>, got {text!r}")
    return f.lower(), e


def _distortion_limit(text: str) -> int | None:
    if text.lower() in ("none", "unlimited"):
        return None
    value = int(text)
    return None if value < 0 else value


def _decoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beam", type=int, help="stack size (default 100)")
    p.add_argument(
        "--distortion-limit",
        type=_distortion_limit,
        default=argparse.SUPPRESS,
        help="maximum jump; 'none' or a negative value for unlimited (default 6)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gloss-smt", description="English to ASL gloss statistical translation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="align, extract phrases and train the LM")
    p.add_argument("corpus", help="english<TAB>gloss file")
    p.add_argument("--out", default="model", help="output directory (default: model)")
    p.add_argument("--alpha", type=float, default=0.5, help="Jaro-Winkler blending weight (default 0.5)")
    p.add_argument("--no-blend", action="store_true", help="plain EM without string similarity")
    p.add_argument("--iters-m1", type=int, default=PipelineConfig.iters_m1)
    p.add_argument("--iters-m2", type=int, default=PipelineConfig.iters_m2)
    p.add_argument("--iters-m3", type=int, default=PipelineConfig.iters_m3)
    p.add_argument("--max-phrase", type=int, default=DEFAULT_MAX_PHRASE)
    p.add_argument("--lm-order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--watch", type=_watch_pair, action="append", default=[], metavar="F:E",
                   help="report t(E|F) per iteration; repeatable")
    _decoder_flags(p)

    p = sub.add_parser("translate", help="translate English lines into gloss")
    p.add_argument("model", help="directory written by 'train'")
    p.add_argument("text", nargs="*", help="sentences to translate (default: read --input or stdin)")
    p.add_argument("-i", "--input", help="file with one sentence per line ('-' for stdin)")
    p.add_argument("--derivation", action="store_true", help="print the phrase derivation after each line")
    p.add_argument("--score", action="store_true", help="append the log score to each line")
    _decoder_flags(p)

    p = sub.add_parser("align", help="GIZA-style alignment listing")
    p.add_argument("corpus")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model directory; lists the English-to-gloss Viterbi alignments")
    src.add_argument("--links", help="file of 'i-j' link lines, one per corpus pair")
    p.add_argument("--matrix", action="store_true", help="also draw each alignment as a grid")

    p = sub.add_parser("lm", help="train a gloss n-gram model or score sentences with one")
    p.add_argument("corpus", help="english<TAB>gloss file (its gloss side is used)")
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--backoff", type=float, default=DEFAULT_BACKOFF)
    p.add_argument("--out", help="write the model file here")
    p.add_argument("--score", action="append", default=[], metavar="GLOSS",
                   help="print log-probability and perplexity of a gloss sentence; repeatable")

    p = sub.add_parser("jw", help="Jaro and Jaro-Winkler similarity of two strings")
    p.add_argument("s1")
    p.add_argument("s2")
    p.add_argument("--prefix-scale", type=float, default=0.1)
    p.add_argument("--max-prefix", type=int, default=4)

    p = sub.add_parser("stats", help="sentence, token and gloss n-gram counts")
    p.add_argument("corpus")
    p.add_argument("--max-order", type=int, default=3)
    return parser


def check_seed_env(environ=os.environ) -> int | None:
    """Validate the reserved seed variable; nothing in the toolkit samples yet."""
    raw = environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _decoder_config(args, base: DecoderConfig | None) -> DecoderConfig:
    fields = dict(vars(base)) if base is not None else {}
    if args.beam is not None:
        fields["beam_size"] = args.beam
    if hasattr(args, "distortion_limit"):
        fields["distortion_limit"] = args.distortion_limit
    try:
        return DecoderConfig(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args, out=None) -> int:
    out = out or sys.stdout
    cfg = PipelineConfig(
        corpus=args.corpus,
        out_dir=args.out,
        iters_m1=args.iters_m1,
        iters_m2=args.iters_m2,
        iters_m3=args.iters_m3,
        alpha=args.alpha,
        blend=not args.no_blend,
        max_phrase=args.max_phrase,
        lm_order=args.lm_order,
        decoder=_decoder_config(args, DecoderConfig()),
        watch=args.watch,
    )
    result = train(cfg)
    print(f"trained on {len(result['corpus'])} pairs; models in {cfg.out_dir}", file=out)
    return EXIT_OK


def _input_lines(args) -> list[str]:
    if args.text:
        return list(args.text)
    if args.input and args.input != "-":
        return Path(args.input).read_text(encoding="utf-8").splitlines()
    return sys.stdin.read().splitlines()


def cmd_translate(args, out=None) -> int:
    out = out or sys.stdout
    table, lm, saved = load_translation_models(args.model)
    cfg = _decoder_config(args, saved.decoder if saved else None)
    status = EXIT_OK
    for line in _input_lines(args):
        if not line.strip():
            print("", file=out)
            continue
        source = tokenize(line, SOURCE)
        try:
            result = decode(source, table, lm, cfg)
        except DecodeFailure as exc:
            print(f"warning: {exc}", file=sys.stderr)
            print(PARTIAL_MARKER + " ".join(exc.partial_output), file=out)
            status = EXIT_DECODE
            continue
        text = " ".join(result.output)
        print(f"{text}\t{result.score:.6f}" if args.score else text, file=out)
        if args.derivation:
            print(result.dump(), file=out)
    return status


def cmd_align(args, out=None) -> int:
    out = out or sys.stdout
    corpus = load_parallel_corpus(args.corpus)
    if args.links:
        alignments = read_alignments(Path(args.links))
        if len(alignments) != len(corpus):
            raise CorpusError(f"{args.links} has {len(alignments)} lines for {len(corpus)} pairs")
        rows = [(pair, links, None) for pair, links in zip(corpus, alignments)]
    else:
        fwd, _ = load_alignment_models(args.model)
        rows = []
        for pair in corpus:
            a, score = viterbi_alignment(pair, fwd)
            rows.append((pair, a.links(), score))
    for pair, links, score in rows:
        for i, j in links:
            if not (1 <= i <= pair.l_f and 1 <= j <= pair.l_e):
                raise CorpusError(f"pair {pair.id}: link {i}-{j} is outside the sentence")
        print(format_giza_alignment(pair, links, score), file=out)
        if args.matrix:
            print(render_alignment_matrix(pair, links), file=out)
            print("", file=out)
    return EXIT_OK


def cmd_lm(args, out=None) -> int:
    out = out or sys.stdout
    corpus = load_parallel_corpus(args.corpus)
    if args.order < 1:
        raise UsageError("--order must be >= 1")
    model = train_ngram((p.target for p in corpus), args.order, args.backoff)
    if args.out:
        model.save(args.out)
    counts = {}
    for gram in model.counts:
        counts[len(gram)] = counts.get(len(gram), 0) + 1
    print(" - ".join(f"n-gram {n} = {c}" for n, c in sorted(counts.items())), file=out)
    for text in args.score:
        total, ppl = sentence_logprob(model, tokenize(text, TARGET))
        print(f"{text}\tlogprob {total:.6f}\tperplexity {ppl:.4f}", file=out)
    return EXIT_OK


def cmd_jw(args, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg = JaroWinklerConfig(args.prefix_scale, args.max_prefix)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"jaro\t{jaro(args.s1, args.s2):.4f}", file=out)
    print(f"jaro-winkler\t{jaro_winkler(args.s1, args.s2, cfg):.4f}", file=out)
    return EXIT_OK


def cmd_stats(args, out=None) -> int:
    out = out or sys.stdout
    corpus = load_parallel_corpus(args.corpus)
    out.write(corpus_stats(corpus, args.max_order).format())
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "translate": cmd_translate,
    "align": cmd_align,
    "lm": cmd_lm,
    "jw": cmd_jw,
    "stats": cmd_stats,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        check_seed_env()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gloss-smt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, ModelFormatError, PipelineError, OSError, ValueError) as exc:
        print(f"gloss-smt: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
