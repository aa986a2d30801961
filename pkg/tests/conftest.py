import importlib.resources

import pytest

from lamcone import parse_document


def fixture_text(name: str) -> str:
    return (importlib.resources.files("lamcone") / "fixtures" / name).read_text()


@pytest.fixture(scope="session")
def fig1_doc():
    return parse_document(fixture_text("fig1.lam"))


@pytest.fixture(scope="session")
def torus_handle_doc():
    return parse_document(fixture_text("torus-handle.lam"))


@pytest.fixture(scope="session")
def nonbound_doc():
    return parse_document(fixture_text("nonbound.lam"))


@pytest.fixture(scope="session")
def theta_doc():
    return parse_document(fixture_text("theta.lam"))


@pytest.fixture(scope="session")
def adversarial_doc():
    return parse_document(fixture_text("adversarial-pair.lam"))


@pytest.fixture(scope="session")
def sphere_doc():
    return parse_document(fixture_text("sphere-audit.lam"))
