import numpy as np
import pytest

from knotcycle import contact, cycles, io
from knotcycle.thickness import thickness


@pytest.fixture(scope='session')
def trefoil():
    return io.bundled_trefoil()


@pytest.fixture(scope='session')
def trefoil_report(trefoil):
    return thickness(trefoil)


@pytest.fixture(scope='session')
def trefoil_cf(trefoil):
    return contact.trace_contact(trefoil, n=999)


@pytest.fixture(scope='session')
def nine_cycle(trefoil_cf):
    found = cycles.detect_cycles(trefoil_cf, 9, ns=[9])
    att = [c for c in found if c.minimal and c.stability == 'attracting']
    assert att, 'no attracting minimal 9-cycle'
    return att[0]


@pytest.fixture(scope='session')
def nine_partition(nine_cycle):
    return cycles.partition(nine_cycle)


def rotation_map(alpha, n=720, wobble=0.0):
    """Circle map ``t + alpha + wobble sin(2 pi t) / (2 pi)`` as a lift."""
    b = np.arange(n + 1) / n
    v = b + alpha + wobble * np.sin(2 * np.pi * b) / (2 * np.pi)
    return contact.ContactFunction(b, v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get('test_acceptance') or sys.modules.get('tests.test_acceptance')
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section('acceptance criteria')
    for line in mod.verdict_lines():
        terminalreporter.write_line(line)
