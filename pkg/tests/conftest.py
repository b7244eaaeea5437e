import pytest

from topocollab.corpus import PaperRecord

TOY_PAPERS = [
    ("1", ["AA1", "AA2", "AA3"], ["A1", "A2", "A3"]),
    ("2", ["AA1", "AA4"], ["A1", "A4"]),
    ("3", ["AA3", "AA4", "AA2"], ["A3", "A4", "A2"]),
    ("4", ["AA1", "AA7"], ["A5", "A7"]),
    ("5", ["AA1", "AA6", "AA7", "AA8"], ["A5", "A6", "A7", "A8"]),
    ("6", ["AA6", "AA4"], ["A6", "A4"]),
    ("7", ["AA8", "AA2"], ["A8", "A2"]),
]

# Hierarchy around "Y": 3 red neighbors, 7 blue second
# neighbors each reached by one red-blue edge, 9 edges leaving the blues.
RING_EDGES = [
    ("Y", "r1"), ("Y", "r2"), ("Y", "r3"), ("r1", "r2"),
    ("r1", "b1"), ("r1", "b2"), ("r1", "b3"), ("r2", "b4"), ("r2", "b5"), ("r3", "b6"), ("r3", "b7"),
    ("b1", "b2"),
    ("b1", "g1"), ("b1", "g2"), ("b2", "g2"), ("b3", "g3"), ("b4", "g4"), ("b4", "g5"),
    ("b5", "g5"), ("b6", "g6"), ("b7", "g7"),
    ("g1", "g8"),
]


@pytest.fixture
def toy_corpus():
    return [PaperRecord(pid, tuple(a), tuple(e)) for pid, a, e in TOY_PAPERS]


@pytest.fixture
def ring_corpus():
    return [PaperRecord(f"e{k}", (a, b)) for k, (a, b) in enumerate(RING_EDGES)]


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    def record(criterion, passed, detail=""):
        _ACCEPTANCE[criterion] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE, key=lambda c: int(c.split()[0].lstrip("AC"))):
        passed, detail = _ACCEPTANCE[criterion]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")
