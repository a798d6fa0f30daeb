import zlib

import numpy as np
import pytest

import grasspool
import grasspool.grassmann as grassmann
import grasspool.grp as grp

# Every OptTrace produced anywhere in the run, for the descent check.
RECORDED_TRACES = []
# criterion label -> (passed, detail), filled by test_acceptance.
ACCEPTANCE = {}
MONOTONE_LABEL = "6 monotone descent"

_original_cg = grassmann.cg_minimize


def _recording_cg(*args, **kwargs):
    U, trace = _original_cg(*args, **kwargs)
    RECORDED_TRACES.append(trace)
    return U, trace


# Installed at import so test modules importing cg_minimize get the wrapper.
grassmann.cg_minimize = _recording_cg
grp.cg_minimize = _recording_cg
grasspool.cg_minimize = _recording_cg


@pytest.fixture
def rng(request):
    # distinct but reproducible stream per test
    return np.random.default_rng(zlib.crc32(request.node.nodeid.encode()))


def pytest_sessionfinish(session, exitstatus):
    bad = [t for t in RECORDED_TRACES if not t.is_monotone(1e-12)]
    if bad:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    bad = sum(not t.is_monotone(1e-12) for t in RECORDED_TRACES)
    terminalreporter.write_line(f"cg traces recorded: {len(RECORDED_TRACES)}, non-monotone: {bad}")
    if MONOTONE_LABEL in ACCEPTANCE:
        # the criterion covers every trace of the run, not just those seen by its test
        ACCEPTANCE[MONOTONE_LABEL] = (bad == 0, f"{bad} non-monotone of {len(RECORDED_TRACES)} traces in the full run (tol 1e-12 |f|)")
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for label in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0])):
            ok, detail = ACCEPTANCE[label]
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
