import dataclasses
import math

import numpy as np
import pytest

from resmute.asymptotics import asymptotic_report, solve_downlink
from resmute.flexduplex import (SafpConfig, TrafficProfile, fixed_split_solve,
                                frozen_c_asymptotics, frozen_sif, imi_sinr,
                                loads, mean_traffic_distance, model_utility,
                                overlap_matrix, run_flexduplex_muting, safp,
                                traffic_distance)
from resmute.muting import SelectionStrategy
from resmute.netmodel import (GeneratorParams, build_coupling, downlink_sif,
                              generate_scenario, per_bs_norm, sinr)
from resmute.sif import FixedPointConfig, check_sif_axioms


def test_loads_split_by_mode(mixed_pair):
    lv = loads(np.array([0.1, 0.2, 0.3, 0.4]), mixed_pair)
    np.testing.assert_allclose(lv.downlink, [0.1, 0.3])
    np.testing.assert_allclose(lv.uplink, [0.2, 0.4])
    assert lv.for_service(mixed_pair, 0) == pytest.approx(0.1)
    assert lv.for_service(mixed_pair, 3) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        loads(np.array([-0.1, 0.2, 0.3, 0.4]), mixed_pair)


def test_overlap_matrix_values(mixed_pair):
    # loads: cell0 d=0.6, u=0.5; cell1 d=0.8, u=0.7
    w = np.array([0.6, 0.5, 0.8, 0.7])
    C = overlap_matrix(w, mixed_pair)
    assert np.all(np.diag(C) == 1.0)
    assert np.all((C >= 0.0) & (C <= 1.0))
    # same mode: min(1, nu_l/nu_k); receiver is service 0 (d, load 0.6)
    assert C[0, 2] == pytest.approx(1.0)          # 0.8/0.6 capped at 1
    assert C[2, 0] == pytest.approx(0.6 / 0.8)
    # cross mode: [(nu_l + nu_k - 1)/nu_k]^+
    assert C[0, 3] == pytest.approx((0.7 + 0.6 - 1.0) / 0.6)
    assert C[1, 2] == pytest.approx((0.8 + 0.5 - 1.0) / 0.5)


def test_overlap_matrix_light_load_is_disjoint(mixed_pair):
    # cross-mode transmissions with jointly light loads never collide
    w = np.full(4, 0.2)
    C = overlap_matrix(w, mixed_pair)
    assert C[0, 1] == 0.0 and C[1, 0] == 0.0
    assert C[0, 3] == 0.0 and C[3, 0] == 0.0


def test_overlap_matrix_zero_load_row(mixed_pair):
    C = overlap_matrix(np.array([0.0, 0.3, 0.4, 0.2]), mixed_pair)
    assert C[0, 0] == 1.0  # diagonal pinned
    assert np.all(C[0, 1:] == 0.0)


def test_imi_sinr_reduces_to_plain(symmetric_pair):
    coupling = build_coupling(symmetric_pair)
    w = np.array([0.5, 0.7])
    full = imi_sinr(w, symmetric_pair, np.ones((2, 2)), coupling)
    np.testing.assert_allclose(
        full, sinr(w, coupling, symmetric_pair.power_density))
    none = imi_sinr(w, symmetric_pair, np.eye(2), coupling)
    np.testing.assert_allclose(none, symmetric_pair.power_density / 0.1)


def test_frozen_sif_is_interference_function(mixed_pair):
    C = overlap_matrix(np.array([0.6, 0.5, 0.8, 0.7]), mixed_pair)
    report = check_sif_axioms(frozen_sif(mixed_pair, C), sample_count=400, seed=5)
    assert report.ok


def test_safp_deterministic_and_consistent(mixed_pair):
    cfg = SafpConfig(restarts=4, eps=1e-7, seed=0,
                     inner=FixedPointConfig(theta=1.0, tol=1e-10))
    a = safp(mixed_pair, cfg)
    b = safp(mixed_pair, cfg)
    assert a.utility == b.utility
    np.testing.assert_array_equal(a.w_star, b.w_star)
    assert a.best.converged
    # the self-consistent overlap model scores the converged point equally
    assert model_utility(a.w_star, mixed_pair) == pytest.approx(a.utility, abs=1e-4)


def test_safp_all_downlink_matches_plain_solve(symmetric_pair):
    cfg = SafpConfig(restarts=3, eps=1e-9, seed=1,
                     inner=FixedPointConfig(theta=1.0, tol=1e-11))
    res = safp(symmetric_pair, cfg)
    plain = solve_downlink(symmetric_pair, theta=1.0, tol=1e-11)
    assert res.utility == pytest.approx(plain.c_star, abs=1e-7)


def test_fixed_split_respects_shares():
    scn = generate_scenario(GeneratorParams(n_cells=3, services_per_cell=(2, 4),
                                            seed=11, uplink_fraction=0.5))
    w, utility = fixed_split_solve(scn, theta=1.0, uplink_share=0.3)
    assert np.isfinite(utility) and utility > 0
    lv = loads(w, scn)
    assert np.max(lv.uplink) <= 0.3 + 1e-9
    assert np.max(lv.downlink) <= 0.7 + 1e-9
    with pytest.raises(ValueError):
        fixed_split_solve(scn, uplink_share=1.0)


def test_frozen_c_report_reduces_to_downlink(symmetric_pair):
    T = downlink_sif(symmetric_pair)
    plain = asymptotic_report(symmetric_pair, T, per_bs_norm(symmetric_pair))
    frozen = frozen_c_asymptotics(symmetric_pair, np.ones((2, 2)))
    assert frozen.lambda_inf == pytest.approx(plain.lambda_inf, rel=1e-10)
    assert frozen.theta_trans == pytest.approx(plain.theta_trans, rel=1e-10)


def test_flexduplex_muting_never_below_safp():
    cfg = SafpConfig(restarts=3, eps=1e-6, seed=0,
                     inner=FixedPointConfig(theta=1.0, tol=1e-9))
    params = GeneratorParams(n_cells=3, services_per_cell=(2, 3),
                             uplink_fraction=(0.1, 0.9, 0.5))
    for seed in range(4):
        scn = generate_scenario(dataclasses.replace(params, seed=seed))
        base = safp(scn, cfg)
        plan = run_flexduplex_muting(scn, SelectionStrategy("successive"), cfg)
        assert plan.utility >= base.utility - 1e-12


def test_traffic_profile_and_distance(mixed_pair):
    profile = TrafficProfile.from_scenario(mixed_pair)
    # cell0: demand 1.0 downlink, 0.5 uplink; same for cell1
    np.testing.assert_allclose(profile.shares,
                               [[1 / 3, 2 / 3], [1 / 3, 2 / 3]])
    D = traffic_distance(profile)
    assert D[0, 1] == pytest.approx(0.0)
    assert mean_traffic_distance(mixed_pair) == pytest.approx(0.0)


def test_traffic_distance_opposed_cells():
    scn = generate_scenario(GeneratorParams(n_cells=2, services_per_cell=(2, 3),
                                            seed=3, uplink_fraction=(0.0, 1.0)))
    profile = TrafficProfile.from_scenario(scn)
    np.testing.assert_allclose(profile.shares, [[0.0, 1.0], [1.0, 0.0]])
    assert mean_traffic_distance(scn) == pytest.approx(math.sqrt(2.0))
