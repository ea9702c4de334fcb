"""Plain-text persistence for alignment models.

Format, one record per line after a header::

    gloss-smt-model 1 <ibm1|ibm2|ibm3> iterations=<n> alpha=<a|off> null=<0|1> [seed=<file>]
    t <f> <e> <prob>
    a <i> <j> <l_e> <l_f> <prob>
    n <phi> <f> <prob>
    p0 <prob>
    d <j> <i> <l_e> <l_f> <prob>

``t`` records are written for every (f, e) cell in id order, which is enough
to rebuild both vocabularies on load. A Model 3 file names the Model 2 file
that seeds its hill-climbing.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..corpus import NULL, Vocabulary
from .model3 import Model3Params
from .tables import DistortionTable, Model2Params, TranslationTable

MAGIC = "gloss-smt-model"
VERSION = 1


class ModelFormatError(Exception):
    pass


def _num(x: float) -> str:
    return repr(float(x))


def _header(kind: str, iterations: int, alpha, include_null: bool, seed: str | None = None) -> str:
    alpha_s = "off" if alpha is None else repr(float(alpha))
    head = f"{MAGIC} {VERSION} {kind} iterations={iterations} alpha={alpha_s} null={int(include_null)}"
    return head + (f" seed={seed}" if seed else "")


def _t_lines(tt: TranslationTable):
    fv, ev = tt.source_vocab, tt.target_vocab
    for fi in range(len(fv)):
        f = fv.token(fi)
        for ei in range(len(ev)):
            yield f"t {f} {ev.token(ei)} {_num(tt.probs[fi, ei])}"


def _a_lines(dt: DistortionTable):
    for (l_e, l_f) in sorted(dt.probs):
        block = dt.probs[(l_e, l_f)]
        first = 0 if dt.include_null else 1
        for j in range(1, l_e + 1):
            for i in range(first, l_f + 1):
                yield f"a {i} {j} {l_e} {l_f} {_num(block[j - 1, i])}"


def save_model(model, path: str | Path, iterations: int = 0, alpha=None, seed_file: str | None = None) -> None:
    """Write a Model 1 table, :class:`Model2Params` or :class:`Model3Params`."""
    if isinstance(model, Model3Params):
        lines = [_header("ibm3", iterations, alpha, True, seed_file)]
        lines += _t_lines(model.ttable)
        fv = model.ttable.source_vocab
        for fi in range(1, len(fv)):
            for phi in range(model.phi_max + 1):
                lines.append(f"n {phi} {fv.token(fi)} {_num(model.fertility[fi, phi])}")
        lines.append(f"p0 {_num(model.p0)}")
        for (l_e, l_f) in sorted(model.rdist):
            block = model.rdist[(l_e, l_f)]
            for i in range(1, l_f + 1):
                for j in range(1, l_e + 1):
                    lines.append(f"d {j} {i} {l_e} {l_f} {_num(block[i, j - 1])}")
    elif isinstance(model, Model2Params):
        lines = [_header("ibm2", iterations, alpha, model.dtable.include_null)]
        lines += _t_lines(model.ttable)
        lines += _a_lines(model.dtable)
    else:
        lines = [_header("ibm1", iterations, alpha, model.include_null)]
        lines += _t_lines(model)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_header(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().split()
    if len(first) < 3 or first[0] != MAGIC:
        raise ModelFormatError(f"{path}: not a {MAGIC} file")
    if int(first[1]) != VERSION:
        raise ModelFormatError(f"{path}: unsupported version {first[1]}")
    info = {"kind": first[2]}
    for item in first[3:]:
        key, _, val = item.partition("=")
        info[key] = val
    return info


def load_model(path: str | Path):
    path = Path(path)
    info = read_header(path)
    include_null = info.get("null") == "1"
    fv = Vocabulary(with_null=False)
    ev = Vocabulary()
    cells = []
    dist: dict[tuple[int, int], np.ndarray] = {}
    fert: list[tuple[int, str, float]] = []
    rdist: dict[tuple[int, int], np.ndarray] = {}
    p0 = None
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line_no, line in enumerate(fh, start=2):
            rec = line.split()
            if not rec:
                continue
            kind = rec[0]
            try:
                if kind == "t":
                    cells.append((fv.add(rec[1]), ev.add(rec[2]), float(rec[3])))
                elif kind == "a":
                    i, j, l_e, l_f = map(int, rec[1:5])
                    block = dist.setdefault((l_e, l_f), np.zeros((l_e, l_f + 1)))
                    block[j - 1, i] = float(rec[5])
                elif kind == "n":
                    fert.append((int(rec[1]), rec[2], float(rec[3])))
                elif kind == "p0":
                    p0 = float(rec[1])
                elif kind == "d":
                    j, i, l_e, l_f = map(int, rec[1:5])
                    block = rdist.setdefault((l_e, l_f), np.zeros((l_f + 1, l_e)))
                    block[i, j - 1] = float(rec[5])
                else:
                    raise ModelFormatError(f"{path}:{line_no}: unknown record {kind!r}")
            except (IndexError, ValueError) as exc:
                raise ModelFormatError(f"{path}:{line_no}: {exc}") from None
    if not len(fv) or fv.token(0) != NULL:
        raise ModelFormatError(f"{path}: first t record must belong to {NULL}")
    fv.with_null = True
    probs = np.zeros((len(fv), len(ev)))
    for fi, ei, p in cells:
        probs[fi, ei] = p
    tt = TranslationTable(fv, ev, probs, include_null=include_null)
    kind = info["kind"]
    if kind == "ibm1":
        return tt
    if kind == "ibm2":
        return Model2Params(tt, DistortionTable(dist, include_null))
    if kind == "ibm3":
        phi_max = max(phi for phi, _, _ in fert) if fert else 0
        fertility = np.full((len(fv), phi_max + 1), 1.0 / (phi_max + 1))
        for phi, f, p in fert:
            fertility[fv.id(f), phi] = p
        seed = None
        if info.get("seed"):
            seed = load_model(path.parent / info["seed"])
            if not isinstance(seed, Model2Params):
                raise ModelFormatError(f"{path}: seed model must be ibm2")
        tt.include_null = True
        return Model3Params(tt, fertility, p0 if p0 is not None else 1.0, rdist, seed)
    raise ModelFormatError(f"{path}: unknown model class {kind!r}")
