"""Acceptance suite: one oracle or property check per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line with the measured deviation,
the tolerance and the runtime budget; the lines are repeated in the terminal
summary. Criterion 9 reruns criteria 1-8 from a cold cache and compares their
artifacts byte for byte.
"""

import warnings

import pytest

from spincmv.verify import CHECKS, check_determinism

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="module")
def first_run():
    return {}


def _run(number, first_run):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = CHECKS[number]()
    first_run[number] = result
    return result


def _report(result):
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line


def test_criterion_1_prototypical_states(first_run):
    _report(_run(1, first_run))


def test_criterion_2_coherent_ising(first_run):
    _report(_run(2, first_run))


def test_criterion_3_dissipative_ising(first_run):
    _report(_run(3, first_run))


def test_criterion_4_hubbard_quench(first_run):
    _report(_run(4, first_run))


def test_criterion_5_tfim_equilibrium(first_run):
    _report(_run(5, first_run))


def test_criterion_6_geometry(first_run):
    _report(_run(6, first_run))


def test_criterion_7_shape_taxonomy(first_run):
    _report(_run(7, first_run))


def test_criterion_8_figure_sequence(first_run):
    _report(_run(8, first_run))


def test_criterion_9_determinism(first_run):
    if len(first_run) != len(CHECKS):
        pytest.skip("needs criteria 1-8 from this session")
    _report(check_determinism(dict(first_run)))
