import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from resmute.estimators import (FlexDuplexAllocator, MaxMinAllocator,
                                PartialMutingAllocator)
from resmute.netmodel import GeneratorParams, generate_scenario


def test_maxmin_allocator(symmetric_pair):
    est = MaxMinAllocator(tol=1e-11)
    with pytest.raises(NotFittedError):
        est.score(symmetric_pair)
    est.fit(symmetric_pair)
    assert est.converged_
    assert est.utility_ == pytest.approx(0.932885804141463, abs=1e-9)
    assert est.score(symmetric_pair) == est.utility_
    assert est.report_.theta_trans < 1.0
    np.testing.assert_allclose(est.allocation_, [1.0, 1.0], atol=1e-8)


def test_params_roundtrip_and_clone():
    est = MaxMinAllocator(theta=2.0, tol=1e-7)
    params = est.get_params()
    assert params["theta"] == 2.0
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(theta=0.5)
    assert est.theta == 0.5


def test_partial_muting_allocator(symmetric_pair):
    est = PartialMutingAllocator(tol=1e-10).fit(symmetric_pair)
    assert est.triggered_
    assert est.utility_ >= est.plan_.baseline.c_star
    assert len(est.bottleneck_set_) >= 1
    exh = PartialMutingAllocator(strategy="exhaustive", candidate_count=2,
                                 tol=1e-10).fit(symmetric_pair)
    assert exh.utility_ >= est.utility_ - 1e-9


def test_flexduplex_allocator():
    scn = generate_scenario(GeneratorParams(n_cells=2, services_per_cell=(1, 2),
                                            seed=2, uplink_fraction=0.5))
    est = FlexDuplexAllocator(restarts=2, seed=0, tol=1e-9).fit(scn)
    assert np.isfinite(est.utility_)
    assert est.result_.best.converged
    muted = FlexDuplexAllocator(restarts=2, seed=0, tol=1e-9,
                                muting=True).fit(scn)
    assert muted.utility_ >= est.utility_ - 1e-12
    assert muted.plan_ is not None
