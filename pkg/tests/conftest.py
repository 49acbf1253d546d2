import pytest

from cbpv_quant.config import RunConfig, build_runtime


@pytest.fixture(scope="session")
def prob_rt():
    return build_runtime(RunConfig(signature="prob"))


@pytest.fixture(scope="session")
def prob_nondet_rt():
    return build_runtime(RunConfig(signature="prob+nondet"))


@pytest.fixture(scope="session")
def cost_nondet_rt():
    return build_runtime(RunConfig(signature="cost+nondet"))


@pytest.fixture(scope="session")
def store_rt():
    return build_runtime(RunConfig(signature="store", locations=("l", "r"), value_bound=3))


@pytest.fixture(scope="session")
def store_nondet_rt():
    return build_runtime(
        RunConfig(signature="store+nondet", locations=("l", "r"), value_bound=3)
    )


@pytest.fixture(scope="session")
def prob_store_rt():
    return build_runtime(
        RunConfig(signature="prob+store", locations=("l",), value_bound=2)
    )
