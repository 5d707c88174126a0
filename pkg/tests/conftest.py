import time

import pytest

import desksetup
from restyle.training import train


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    """The desk-scale training run shared by the acceptance criteria.

    Returns (checkpoint, loss reports, wall-clock minutes). Takes a few
    minutes; every dependent test reuses the same run.
    """
    data = tmp_path_factory.mktemp("desk-corpus")
    desksetup.build_corpus(data)
    start = time.perf_counter()
    ckpt, reports = train(desksetup.DESK_CONFIG, data)
    minutes = (time.perf_counter() - start) / 60.0
    return ckpt, reports, minutes


@pytest.fixture(scope="session")
def thresholds():
    return desksetup.load_thresholds()
