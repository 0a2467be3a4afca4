"""Session-level test setup.

The JIT backend compiles its kernels on first use; warming them here keeps
per-test runtimes meaningful (compilation is cached on disk afterwards).
"""

import numpy as np
import pytest

import calabiflow as cf


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    t = cf.parse_mesh(cf.mesh_text("tetrahedron"))
    w = cf.Weight(np.zeros(t.n_edges))
    m = cf.PackingMetric.from_radii([2.0, 1.0, 1.0, 1.0])
    cf.integrate(cf.FlowKind.calabi(), t, w, m)
    cf.integrate(cf.FlowKind.ricci_normalized(), t, w, m)
    cf.check_admissible(t, w, np.full(4, np.pi))
    cf.ricci_potential(t, w, np.zeros(4), np.log(m.r))
    yield
