import numpy as np
import pytest
from hypothesis import strategies as st

from robustnet.graph import DiGraph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def graphs(draw, max_n=7, directed=None):
    """Small random graphs, directed or not."""
    n = draw(st.integers(1, max_n))
    is_directed = draw(st.booleans()) if directed is None else directed
    pairs = [(j, i) for j in range(n) for i in range(n) if j != i and (is_directed or j < i)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return DiGraph.from_edges(n, chosen, directed=is_directed)
