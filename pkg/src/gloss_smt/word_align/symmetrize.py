"""Merge the two directed alignments of a sentence pair (grow-diag-final)."""

from __future__ import annotations

from typing import Iterable, Union

from .em import AlignmentFunction

Link = tuple[int, int]
LinkSet = set[Link]

NEIGHBOURS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def _as_links(x: Union[AlignmentFunction, Iterable[Link]], reverse: bool) -> LinkSet:
    if isinstance(x, AlignmentFunction):
        return x.links(reverse=reverse)
    return {(int(i), int(j)) for i, j in x}


def symmetrize(fwd, rev) -> LinkSet:
    """Grow-diag-final merge of two directed link sets.

    ``fwd`` holds (source, target) links from the English-to-gloss model;
    ``rev`` comes from the gloss-to-English model. Either may be an
    :class:`AlignmentFunction` (``rev`` is then flipped) or an iterable of
    (source, target) links. Growth scans existing links row-major.
    """
    fwd_links = _as_links(fwd, reverse=False)
    rev_links = _as_links(rev, reverse=True)
    union = fwd_links | rev_links
    links = fwd_links & rev_links
    src_aligned = {i for i, _ in links}
    tgt_aligned = {j for _, j in links}

    def add(link):
        links.add(link)
        src_aligned.add(link[0])
        tgt_aligned.add(link[1])

    grown = True
    while grown:
        grown = False
        for i, j in sorted(links):
            for di, dj in NEIGHBOURS:
                cand = (i + di, j + dj)
                if cand in union and cand not in links and (
                    cand[0] not in src_aligned or cand[1] not in tgt_aligned
                ):
                    add(cand)
                    grown = True
    for cand in sorted(union):
        if cand not in links and (cand[0] not in src_aligned or cand[1] not in tgt_aligned):
            add(cand)
    return links
