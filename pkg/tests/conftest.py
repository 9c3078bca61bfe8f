"""Shared small fixtures: posets and one workhorse frame per kind."""

import pytest

from gtw.frames import make_box_frame, make_cin_frame, make_im_frame, make_si_frame
from gtw.order import Poset


def chain(n):
    return Poset(n, tuple(sum(1 << j for j in range(i, n)) for i in range(n)))


def antichain(n):
    return Poset(n, tuple(1 << i for i in range(n)))


C2 = chain(2)
POINT = chain(1)
V_POSET = Poset(3, (0b111, 0b010, 0b100))


@pytest.fixture
def b1():
    """Two-state chain with R = {(0,1),(1,1)}; the recurring box example."""
    return make_box_frame(C2, [(0, 1), (1, 1)])


@pytest.fixture
def im_c2():
    """im frame on the chain: both states see the top upset."""
    return make_im_frame(C2, [[0b10], [0b10]])


@pytest.fixture
def cin_point():
    """One-state cin frame with both families empty."""
    return make_cin_frame(POINT, [frozenset()], [frozenset()])


@pytest.fixture
def si_c2():
    """si frame on the chain with R = {(0,1),(1,1)}."""
    return make_si_frame(C2, [(0, 1), (1, 1)])
