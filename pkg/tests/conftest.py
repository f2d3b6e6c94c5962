import pytest

from lattice_shuttle import LatticeConfig, derive_params

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def cs_cfg():
    # lambda_L = 866 nm, a = 850 E_R, 133Cs, d = lambda_L / 2
    return LatticeConfig.from_recoil(866e-9, 850.0)


@pytest.fixture(scope="session")
def params(cs_cfg):
    return derive_params(cs_cfg)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
