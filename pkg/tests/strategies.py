"""Shared hypothesis strategies."""
from hypothesis import strategies as st

from hgsg.lattice import Coord1D


@st.composite
def canonical_coords(draw, max_level=12):
    level = draw(st.integers(0, max_level))
    if level == 0:
        return Coord1D(0, 0)
    if level == 1:
        return Coord1D(1, draw(st.sampled_from([0, 2])))
    k = draw(st.integers(0, (1 << (level - 1)) - 1))
    return Coord1D(level, 2 * k + 1)
