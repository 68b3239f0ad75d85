import pytest

from curtailseq import Hypotheses, build_distribution, search_design


@pytest.fixture(scope="session")
def hyp_01_055():
    return Hypotheses(0.1, 0.55, 0.025, 0.2)


@pytest.fixture(scope="session")
def hyp_01_035():
    return Hypotheses(0.1, 0.35, 0.025, 0.2)


@pytest.fixture(scope="session")
def design49(hyp_01_055):
    design = search_design(hyp_01_055).design
    assert (design.u, design.K) == (4, 9)
    return design


@pytest.fixture(scope="session")
def design622(hyp_01_035):
    design = search_design(hyp_01_035).design
    assert (design.u, design.K) == (6, 22)
    return design


@pytest.fixture(scope="session")
def dist49(design49):
    return build_distribution(design49)


@pytest.fixture(scope="session")
def dist622(design622):
    return build_distribution(design622)
