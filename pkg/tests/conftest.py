import numpy as np
import pytest

from clique.data import CLASSIFICATION, REGRESSION, Dataset, FeatureSchema, SimSpec, simulate
from clique.models import Hyperparams, fit_forest

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    lines = request.config.stash[_ACCEPTANCE]

    def log(criterion, ok, detail=""):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")

    return log


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Compile the numba kernels once so timed tests measure the work."""
    for kind in ("and_gate", "reg_interaction"):
        d = simulate(SimSpec(kind, 20, 0))
        fit_forest(d, Hyperparams(n_trees=2)).predict_batch(d.X)


@pytest.fixture
def and_gate_small():
    return simulate(SimSpec("and_gate", 120, 3))


@pytest.fixture
def regression_small():
    rng = np.random.default_rng(5)
    X = rng.uniform(-1, 1, size=(60, 3))
    y = X[:, 0] + 0.5 * X[:, 1]
    return Dataset(X, y, tuple(FeatureSchema(f"x{j}") for j in range(3)), REGRESSION)


@pytest.fixture
def categorical_dataset():
    rng = np.random.default_rng(11)
    n = 90
    colour = rng.integers(0, 3, n)
    x = rng.uniform(-1, 1, n)
    y = ((colour == 1) | (x > 0.5)).astype(np.int64)
    X = np.column_stack([colour, x])
    schema = (FeatureSchema("colour", "categorical", ("red", "green", "blue")), FeatureSchema("x"))
    return Dataset(X, y, schema, CLASSIFICATION, ("no", "yes"))
