import sys
from pathlib import Path

import pytest

import wikied
from wikied.ingest import DumpRecord, PageKind, build_snapshot, parse_dump
from wikied.store import KnowledgeSnapshot, load_snapshot

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def article(title, body="", infobox=None):
    return DumpRecord(title=title, kind=PageKind.ARTICLE, body=body, infobox_type=infobox)


def redirect(title, target):
    return DumpRecord(title=title, kind=PageKind.REDIRECT, redirect_target=target)


def disambiguation(title, *targets):
    return DumpRecord(title=title, kind=PageKind.DISAMBIGUATION, disambig_targets=tuple(targets))


@pytest.fixture(scope="session")
def saadi_records():
    with open(wikied.data_path("saadi.dump"), encoding="utf-8") as fh:
        return parse_dump(fh)


@pytest.fixture(scope="session")
def saadi_snapshot_path(saadi_records, tmp_path_factory):
    path = tmp_path_factory.mktemp("snap") / "saadi.snap"
    build_snapshot(saadi_records, path)
    return path


@pytest.fixture(scope="session")
def saadi(saadi_snapshot_path):
    return load_snapshot(saadi_snapshot_path)


@pytest.fixture(scope="session")
def two_hop_records():
    """Level-2 story: A1 -> D2 -> C2; A2 reaches nothing. Mentions: Saadi {A1, A2}, Shiraz {C2}."""
    return [
        article("A1", "Saadi the poet, see [[D2]]."),
        article("A2", "Saadi, a village."),
        article("D2", "A garden of [[C2]] [[C2]] [[C2]]."),
        article("C2", "Shiraz is a city."),
        disambiguation("Saadi", "A1", "A2"),
        redirect("Shiraz", "C2"),
    ]


@pytest.fixture(scope="session")
def two_hop(two_hop_records):
    return KnowledgeSnapshot.from_records(two_hop_records)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
