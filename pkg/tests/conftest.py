import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from panelize.fixtures import reference_mesh  # noqa: E402
from panelize.mesh import build_adjacency  # noqa: E402

LOWER_LOOP = (1, 2, 3, 4, 5, 10, 9, 8, 7, 6)
UPPER_LOOP = (6, 7, 8, 9, 10, 15, 14, 13, 12, 11)
MID_ROW = (6, 7, 8, 9, 10)
MID_COL = (3, 8, 13)


@pytest.fixture
def ref_mesh():
    return reference_mesh()


@pytest.fixture
def ref_index(ref_mesh):
    return build_adjacency(ref_mesh)


# acceptance criteria report: test_acceptance records one line per criterion
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
