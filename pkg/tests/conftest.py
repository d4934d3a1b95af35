import math
import time

import numpy as np
import pytest

from gafzeros.gauss import IIDSampler
from gafzeros.spectral import ArcUniform, Atoms, CovarianceEvaluator, Lebesgue
from gafzeros.zeros import mc_zero_sets

# documented seed for the 10,000-run i.i.d. Monte Carlo experiments
MC_SEED = 2024
MC_RUNS = 10_000
MC_DEGREE = 100

ACCEPTANCE_LINES = []


@pytest.fixture
def lebesgue():
    return CovarianceEvaluator(Lebesgue())


@pytest.fixture
def lebesgue_quad():
    return CovarianceEvaluator(Lebesgue(), closed_form=None)


@pytest.fixture
def arc():
    return CovarianceEvaluator(ArcUniform(-math.pi / 2, math.pi / 2))


@pytest.fixture
def arc_quad():
    return CovarianceEvaluator(ArcUniform(-math.pi / 2, math.pi / 2), closed_form=None)


@pytest.fixture
def atoms4():
    return CovarianceEvaluator(Atoms.roots_of_unity(4))


@pytest.fixture(scope="session")
def iid_mc_runs():
    """10,000 seeded zero sets of the degree-100 i.i.d. polynomial, with wall time."""
    t0 = time.perf_counter()
    runs = mc_zero_sets(IIDSampler(), MC_DEGREE, MC_RUNS, MC_SEED)
    return runs, time.perf_counter() - t0


def disk_points(rng, n, radius):
    return radius * np.sqrt(rng.random(n)) * np.exp(2j * math.pi * rng.random(n))


@pytest.fixture
def report():
    def record(criterion, ok, detail):
        line = f"[{criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
