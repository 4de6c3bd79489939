"""Dense CP decomposition toolkit: ALS, AMDM, and General-AMDM solvers.

The compiled extension module carries the full API; this package re-exports
it and adds a couple of numpy-friendly helpers.
"""

from ._cpdkit import *  # noqa: F401,F403
from ._cpdkit import DenseTensor, KruskalModel, SolverConfig, run

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]


def decompose(array, rank, algorithm=None, seed=0, max_sweeps=100, **kwargs):
    """Convenience wrapper: run a solver on a numpy array and return the result.

    Extra keyword arguments are set on the SolverConfig (tol_change,
    tol_resid, schedule, granularity, trace_condition, ...).
    """
    from ._cpdkit import Algorithm

    cfg = SolverConfig()
    cfg.rank = rank
    cfg.seed = seed
    cfg.max_sweeps = max_sweeps
    if algorithm is not None:
        cfg.algorithm = Algorithm.__members__[algorithm] if isinstance(algorithm, str) else algorithm
    for key, value in kwargs.items():
        setattr(cfg, key, value)
    return run(DenseTensor(array), cfg)
