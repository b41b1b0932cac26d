import pytest

from stokesdirac.mesh import build_interval_complex, build_triangle_strip_complex


@pytest.fixture(scope="session")
def interval2():
    return build_interval_complex(1.0, 2)


@pytest.fixture(scope="session")
def interval1():
    return build_interval_complex(1.0, 1)


@pytest.fixture(scope="session")
def strip12():
    return build_triangle_strip_complex(1, 2)


@pytest.fixture(scope="session")
def strip23():
    return build_triangle_strip_complex(2, 3)


def all_complexes():
    return [
        build_interval_complex(1.0, 1),
        build_interval_complex(1.0, 2),
        build_interval_complex(2.5, 5),
        build_triangle_strip_complex(1, 2),
        build_triangle_strip_complex(2, 3, 0.5),
    ]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
