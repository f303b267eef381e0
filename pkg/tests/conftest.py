import os
from pathlib import Path

import pytest

CACHE = str(Path(__file__).resolve().parent.parent / ".tw6cache")
os.environ.setdefault("TW6_CACHE_DIR", CACHE)


@pytest.fixture(scope="session")
def cfg():
    from tw6.config import RunConfig
    return RunConfig(digits=60, cache_dir=CACHE)


@pytest.fixture(scope="session")
def sol(cfg):
    from tw6.painleve2 import hm_build
    return hm_build(cfg)


@pytest.fixture(scope="session")
def basis(cfg, sol):
    from tw6.phisystem import phi_integrate
    return phi_integrate(cfg, sol)


@pytest.fixture(scope="session")
def ev(cfg, sol, basis):
    from tw6.dist import TW6Evaluator
    return TW6Evaluator(cfg, sol, basis)


@pytest.fixture(scope="session")
def conn(cfg, sol, basis):
    from tw6.connection import connection_data
    return connection_data(cfg, sol, basis, with_rays=False)
