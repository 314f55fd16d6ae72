"""Shared factories for hand-built samples."""
import numpy as np

from rdsma.netcore import cross_alters_all
from rdsma.rdssim import RdsSample


def make_sample(degrees, infected, x=None, recruiters=None, waves=None, nodes=None):
    n = len(degrees)
    if x is None:
        x = [0.0] * n
    if recruiters is None:
        recruiters = [-1] * n
    if waves is None:
        waves = [0 if r < 0 else 1 for r in recruiters]
    if nodes is None:
        nodes = list(range(n))
    return RdsSample(
        nodes=np.array(nodes, dtype=np.int64),
        degrees=np.array(degrees, dtype=np.int64),
        infected=np.array(infected, dtype=np.int64),
        cross_alters=np.array(x, dtype=np.float64),
        waves=np.array(waves, dtype=np.int64),
        recruiters=np.array(recruiters, dtype=np.int64),
    )


def census_sample(net):
    """Whole population enrolled as seeds: a valid census 'sample'."""
    return make_sample(net.degrees.tolist(),
                       net.infection.astype(np.int64).tolist(),
                       x=cross_alters_all(net).astype(float).tolist(),
                       nodes=list(range(net.n)))
