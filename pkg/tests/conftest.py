import time
from pathlib import Path

import pytest

from gloss_smt.corpus import ParallelCorpus, SentencePair, bundled_corpus_path, load_bundled
from gloss_smt.pipeline import PipelineConfig, train

TWO_PAIRS = [("i understand", "I UNDERSTAND"), ("i play piano", "I PLAY PIANO")]

_criteria: list[tuple[str, str, str]] = []

SUITE_BUDGET_S = 60.0
_session_start = time.perf_counter()


def two_pair_corpus() -> ParallelCorpus:
    return ParallelCorpus.from_pairs(TWO_PAIRS)


@pytest.fixture
def two_pairs():
    return two_pair_corpus()


@pytest.fixture(scope="session")
def bundled():
    return load_bundled()


@pytest.fixture(scope="session")
def trained(tmp_path_factory):
    """Default pipeline trained once on the bundled corpus."""
    out = tmp_path_factory.mktemp("model")
    result = train(PipelineConfig(corpus=str(bundled_corpus_path()), out_dir=str(out)))
    result["dir"] = out
    return result


def pair(src: str, tgt: str, id: int = 0) -> SentencePair:
    return SentencePair.from_text(src, tgt, id)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    label = report.user_properties and dict(report.user_properties).get("criterion")
    if label:
        status = "PASS" if report.passed else "FAIL"
        detail = dict(report.user_properties).get("detail", "")
        _criteria.append((status, label, detail))


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker and call.when == "setup":
        item.user_properties.append(("criterion", marker.args[0]))


_full_run = False
_deselected = False


def pytest_deselected(items):
    global _deselected
    _deselected = True


def pytest_collection_finish(session):
    """The runtime budget only applies when every test module was collected unfiltered."""
    global _full_run
    here = Path(__file__).parent
    collected = {Path(item.fspath) for item in session.items}
    narrowed = _deselected or any("::" in arg for arg in session.config.args)
    _full_run = collected == set(here.glob("test_*.py")) and not narrowed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    elapsed = time.perf_counter() - _session_start
    if _full_run:
        status = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
        _criteria.append((status, f"property suite: full run under {SUITE_BUDGET_S:.0f} s", f"{elapsed:.1f} s"))
    terminalreporter.section("acceptance criteria")
    for status, label, detail in _criteria:
        line = f"{status}  {label}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
