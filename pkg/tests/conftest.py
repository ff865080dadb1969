import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from topobetti.constructions import CuttingSpec, FoldingSpec, build_topo_network


# The four reference classifier instances used across the suite:
# (name, d, m_vec, w_vec, expected Betti vector of the closed sublevel set).
REFERENCE_INSTANCES = (
    ("d2-M4-w3", 2, (4,), (3,), (12, 4)),
    ("d2-M8-w4", 2, (2, 4), (4,), (40, 24)),
    ("d3-M2-w11", 3, (2,), (1, 1), (4, 0, 0)),
    ("d3-M4-w11", 3, (2, 2), (1, 1), (18, 2, 4)),
)


@pytest.fixture(scope="session")
def reference_networks():
    nets = {}
    for name, d, m_vec, w_vec, betti in REFERENCE_INSTANCES:
        fold = FoldingSpec(d, m_vec)
        cut = CuttingSpec(d, w_vec)
        nets[name] = (build_topo_network(fold, cut), fold, cut, betti)
    return nets
