from pathlib import Path

import numpy as np
import pytest

from signed_ego.signing import Sign
from signed_ego.triads import SignedGraph

FIXTURE = Path(__file__).resolve().parents[1] / "fixtures" / "corpus.jsonl.gz"


def random_signed_graph(seed: int, n: int = 30, p: float = 0.3, p_neg: float = 0.4) -> SignedGraph:
    rng = np.random.default_rng(seed)
    nodes = [f"n{i:03d}" for i in range(n)]
    g = SignedGraph(nodes)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                g.edges[(nodes[i], nodes[j])] = Sign.NEGATIVE if rng.random() < p_neg else Sign.POSITIVE
    return g


@pytest.fixture
def fixture_path() -> Path:
    return FIXTURE


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
