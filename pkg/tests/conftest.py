import math

import numpy as np
import pytest

from adsnull.curves import (BendingProfile, SGrid, closure_period,
                            integrate_spinor_frames, kappa_mn)


@pytest.fixture(scope="session")
def curve73():
    """Constant-bending closed curve (m, n) = (7, 3) over one period."""
    k0 = kappa_mn(7, 3)
    length, _ = closure_period(k0)
    grid = SGrid.over_length(0.0, length, 1e-3)
    return integrate_spinor_frames(BendingProfile.constant(k0), grid)


@pytest.fixture(scope="session")
def sin_curve():
    """kappa(s) = sin s on [0, 2 pi], frames based mid-interval."""
    grid = SGrid.over_length(0.0, 2.0 * math.pi, 1e-3)
    profile = BendingProfile.from_callable(np.sin, np.cos,
                                           lambda s: -np.sin(s))
    return integrate_spinor_frames(profile, grid, base=math.pi)
