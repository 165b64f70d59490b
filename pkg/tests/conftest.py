from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from alexdb import Space, simple_space

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xA1EC5)


@st.composite
def spaces(draw, max_elements: int = 8, min_elements: int = 1) -> Space:
    """Random T0 spaces: forward edges over an ordered element list."""
    n = draw(st.integers(min_elements, max_elements))
    keys = [f"e{i}" for i in range(n)]
    possible = [(keys[i], keys[j]) for i in range(n) for j in range(i + 1, n)]
    if possible:
        chosen = draw(st.sets(st.sampled_from(possible)))
    else:
        chosen = set()
    return simple_space(keys, chosen)


@st.composite
def spaces_with_subset(draw, max_elements: int = 8):
    space = draw(spaces(max_elements))
    keys = sorted(space.keys())
    subset = draw(st.sets(st.sampled_from(keys))) if keys else set()
    return space, frozenset(subset)
