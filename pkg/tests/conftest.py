import math

import numpy as np
import pytest

from gepucs.karva import FUNCTIONS, FunctionSet

ALL = FunctionSet(tuple(FUNCTIONS.values()))

# Independent interpreter for infix strings produced by to_infix.
INFIX_NAMESPACE = {
    "__builtins__": {},
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "ln": np.log,
    "exp": np.exp,
}


def eval_infix(text, bindings):
    env = dict(INFIX_NAMESPACE)
    env.update({k: np.float64(v) for k, v in bindings.items()})
    with np.errstate(all="ignore"):
        return float(eval(text, env))  # noqa: S307 - test-only interpreter


def random_gene_symbols(rng, functions, terminals, h):
    from gepucs.karva import tail_length

    t = tail_length(h, functions.max_arity)
    head_pool = list(functions.ids) + list(terminals)
    head = [head_pool[i] for i in rng.integers(len(head_pool), size=h)]
    tail = [terminals[i] for i in rng.integers(len(terminals), size=t)]
    return tuple(head + tail), t


def rel_close(a, b, tol):
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


@pytest.fixture
def all_functions():
    return ALL


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
