import os
import random
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from camrkit.synthetic import qiantang_example, random_graph  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, recoverable=False, attributes=True, max_words=8):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(random.Random(seed), f"h{seed}", max_words, attributes=attributes, recoverable=recoverable)


@pytest.fixture
def qiantang():
    return qiantang_example()
