from __future__ import annotations

import pytest

from promisekit.corpus import corpus_text
from promisekit.dsl import parse_scenario, parse_trace


@pytest.fixture(scope="session")
def ride():
    """The bundled car-ride scenario: two concurrent offers, one exclusive
    usage, three agents."""
    return parse_scenario(corpus_text("jub.promise"))


@pytest.fixture(scope="session")
def ride_model(ride):
    return ride.model


@pytest.fixture(scope="session")
def ride_events(ride):
    """The bundled six-event negotiation: offer, accept, second offer,
    decline, and the two withdrawals."""
    return tuple(parse_trace(corpus_text("jub_trace.txt"), ride.model))
