import pytest
from importlib import resources

from quantforge import frontend, parse_topology, load_parameters


def bundled_text(name):
    return (resources.files("quantforge.data") / f"{name}.net").read_text()


@pytest.fixture
def cnv6():
    return parse_topology(bundled_text("cnv6"))


@pytest.fixture
def mlp4():
    return parse_topology(bundled_text("mlp4"))


@pytest.fixture
def cnv6_with_params():
    net = parse_topology(bundled_text("cnv6"))
    return load_parameters(net, frontend.random_parameter_blob(net, seed=20))


@pytest.fixture
def mlp4_with_params():
    net = parse_topology(bundled_text("mlp4"))
    return load_parameters(net, frontend.random_parameter_blob(net, seed=21))
