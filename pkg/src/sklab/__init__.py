"""Ground-state laboratory for the spiked spherical SK model.

Exact finite-n solvers built on the Lagrange-dual reduction, closed-form
limit theory with phase boundaries, and Monte Carlo machinery for checking
the law-of-large-numbers and Gaussian-fluctuation predictions.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    experiment_harness,
    fluctuation_lab,
    reduction_solver,
    rmt_core,
    theory_engine,
)
