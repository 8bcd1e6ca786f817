import os

import pytest

from surfdec import build_layout, build_se_circuit
from surfdec.graph import build_code_capacity_pair, build_decoder_graphs


def full_mode() -> bool:
    """Acceptance tests run desk-scale trial counts when SURFDEC_ACCEPTANCE=full."""
    return os.environ.get("SURFDEC_ACCEPTANCE", "smoke").lower() == "full"


@pytest.fixture(scope="session")
def layout3():
    return build_layout(3)


@pytest.fixture(scope="session")
def circuit3(layout3):
    return build_se_circuit(layout3)


@pytest.fixture(scope="session")
def layout5():
    return build_layout(5)


@pytest.fixture(scope="session")
def circuit5(layout5):
    return build_se_circuit(layout5)


@pytest.fixture(scope="session")
def graphs3():
    """L=3, T=3 circuit-level lattices at p=0.01."""
    return build_decoder_graphs(3, 3, 0.01)


@pytest.fixture(scope="session")
def graphs5():
    """L=5, T=3 circuit-level lattices at p=0.001."""
    return build_decoder_graphs(5, 3, 0.001)


@pytest.fixture(scope="session")
def cc_pair3():
    return build_code_capacity_pair(3)


@pytest.fixture(scope="session")
def cc_pair5():
    return build_code_capacity_pair(5)
