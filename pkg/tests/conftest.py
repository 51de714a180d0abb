import json

import pytest

from relex.corpus import Corpus, EntityMention, Sentence


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one PASS/FAIL line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.fspath.basename == "test_acceptance.py":
        status = "PASS" if report.passed else "FAIL"
        writer = item.config.pluginmanager.get_plugin("terminalreporter")
        if writer is not None:
            writer.write_line(f"[ACCEPTANCE] {status} {item.name}")


def make_sentence(sid: str, text: str, mentions) -> Sentence:
    """Build a sentence from whitespace-tokenized text.

    ``mentions`` is a list of (start, end, ner) triples; surfaces are
    derived from the tokens.
    """
    tokens = tuple(text.split())
    ms = tuple(
        EntityMention(start, end, " ".join(tokens[start:end]), ner)
        for start, end, ner in mentions
    )
    return Sentence(sid, tokens, ms)


def make_corpus(*sentences) -> Corpus:
    return Corpus(sentences)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


@pytest.fixture
def founders_sentence():
    # "Sony was founded by Akio Morita ."  subj = Sony, obj = Akio Morita
    return make_sentence(
        "s1",
        "Sony was founded by Akio Morita .",
        [(0, 1, "ORGANIZATION"), (4, 6, "PERSON")],
    )
