import numpy as np
import pytest

from pground.geometry import Interval, MaskDomain, Rectangle, build_grid


@pytest.fixture
def interval_grid():
    return build_grid(Interval(0.0, 1.0), 31)


@pytest.fixture
def square_grid():
    return build_grid(Rectangle(0.0, 1.0, 0.0, 1.0), 16)


@pytest.fixture
def l_mask():
    """Unit square minus its upper-right quadrant, 2x2 coarse cells."""
    cells = np.array([[True, True], [True, False]])
    return MaskDomain(width=2, height=2, cells=cells, cell_size=0.5)


def hat_function(grid):
    """Piecewise-linear peak of height 1 at the midpoint of (0, 1)."""
    from pground.calculus import GridFunction
    x = grid.node_coords()
    vals = np.maximum(0.0, 1.0 - 2.0 * np.abs(x - 0.5))
    vals[~grid.interior] = 0.0
    return GridFunction(grid, vals)
