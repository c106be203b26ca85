import dataclasses
import json

import numpy as np
import pytest

from resmute.netmodel import (DOWNLINK, UPLINK, GeneratorParams, Scenario,
                              ScenarioError, build_coupling, downlink_sif,
                              generate_scenario, load_scenario, per_bs_norm,
                              rate, save_scenario, sinr)


def test_coupling_normalization(symmetric_pair):
    c = build_coupling(symmetric_pair)
    np.testing.assert_allclose(c.v_tilde, [[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(c.sigma_tilde, [0.1, 0.1])


def test_sinr_and_rate_values(symmetric_pair):
    c = build_coupling(symmetric_pair)
    p = symmetric_pair.power_density
    w = np.array([1.0, 1.0])
    np.testing.assert_allclose(sinr(w, c, p), [1.0 / 1.1, 1.0 / 1.1])
    np.testing.assert_allclose(rate(w, c, p, 1.0),
                               np.log2(1.0 + 1.0 / 1.1) * np.ones(2))


def test_rate_demand_mapping_matches_rate(symmetric_pair):
    T = downlink_sif(symmetric_pair)
    w = np.array([0.4, 0.7])
    c = build_coupling(symmetric_pair)
    r = rate(w, c, symmetric_pair.power_density, symmetric_pair.bandwidth_hz)
    # utility w_k / T_k(w) must equal the satisfaction ratio r_k / demand_k
    np.testing.assert_allclose(w / T(w), r / symmetric_pair.demand_bps)


def test_per_bs_norm_groups_by_cell():
    scn = Scenario(n_cells=2, serving_cell=[0, 0, 1], bandwidth_hz=1.0,
                   power_density=[1.0] * 3, demand_bps=[1.0] * 3,
                   gains=np.eye(3) + 0.1, noise_density=[0.1] * 3,
                   neighbors=({1}, {0}), duplex_mode=("d", "d", "d"))
    norm = per_bs_norm(scn)
    assert norm(np.array([0.2, 0.3, 0.4])) == pytest.approx(0.5)


@pytest.mark.parametrize("patch,fragment", [
    (dict(serving_cell=[0, 0]), "without services"),
    (dict(bandwidth_hz=0.0), "bandwidth"),
    (dict(power_density=[1.0, -1.0]), "powers"),
    (dict(demand_bps=[1.0]), "demands"),
    (dict(noise_density=[0.1, 0.0]), "noise"),
    (dict(gains=[[0.0, 1.0], [1.0, 1.0]]), "direct-link"),
    (dict(neighbors=({0, 1}, {0})), "lists itself"),
    (dict(neighbors=({1}, frozenset())), "not symmetric"),
    (dict(duplex_mode=("d", "x")), "modes"),
])
def test_validation_messages(symmetric_pair, patch, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        dataclasses.replace(symmetric_pair, **patch)


def test_generator_reproducible():
    params = GeneratorParams(n_cells=4, services_per_cell=(2, 3), seed=5)
    a = generate_scenario(params)
    b = generate_scenario(params)
    assert a.equals(b)
    c = generate_scenario(dataclasses.replace(params, seed=6))
    assert not a.equals(c)


def test_generator_structure():
    params = GeneratorParams(n_cells=7, services_per_cell=(2, 4), seed=1)
    scn = generate_scenario(params)
    assert scn.n_cells == 7
    assert set(scn.serving_cell.tolist()) == set(range(7))
    assert 14 <= scn.n_services <= 28
    # dense hex layout: the center cell is adjacent to the whole first ring
    assert scn.neighbors[0] == frozenset(range(1, 7))
    # intra-cell same-mode links are orthogonal
    same_cell = scn.serving_cell[:, None] == scn.serving_cell[None, :]
    off = same_cell & ~np.eye(scn.n_services, dtype=bool)
    assert np.all(scn.gains[off] == 0.0)


def test_generator_edge_snr_calibration():
    params = GeneratorParams(n_cells=1, services_per_cell=(1, 1), seed=0)
    scn = generate_scenario(params)
    g_edge = (params.resolved_reference_gain()
              * params.cell_radius_m ** (-params.pathloss_exponent))
    snr_edge = g_edge * params.power_density / params.noise_density
    assert snr_edge == pytest.approx(10.0)


def test_generator_uplink_fraction():
    params = GeneratorParams(n_cells=3, services_per_cell=(3, 5), seed=2,
                             uplink_fraction=1.0)
    scn = generate_scenario(params)
    assert all(m == UPLINK for m in scn.duplex_mode)
    assert np.all(scn.power_density == params.uplink_power_density)
    params = dataclasses.replace(params, uplink_fraction=0.0)
    scn = generate_scenario(params)
    assert all(m == DOWNLINK for m in scn.duplex_mode)


def test_generator_serving_fade():
    base = GeneratorParams(n_cells=4, services_per_cell=(3, 5), seed=9)
    faded = dataclasses.replace(base, serving_fade_fraction=0.5,
                                serving_fade_db=20.0)
    a = generate_scenario(base)
    b = generate_scenario(faded)
    ratio = np.diag(b.gains) / np.diag(a.gains)
    assert set(np.round(ratio, 6).tolist()) <= {0.01, 1.0}
    assert np.any(ratio < 1.0)


def test_generator_power_factors():
    params = GeneratorParams(n_cells=3, services_per_cell=(2, 3), seed=4,
                             cell_power_factors=(1.0, 0.25, 1.0))
    scn = generate_scenario(params)
    expected = params.power_density * np.where(scn.serving_cell == 1, 0.25, 1.0)
    np.testing.assert_allclose(scn.power_density, expected)
    with pytest.raises(ValueError):
        GeneratorParams(n_cells=3, cell_power_factors=(1.0, 0.5))


def test_generator_param_validation():
    with pytest.raises(ValueError):
        GeneratorParams(services_per_cell=(0, 2))
    with pytest.raises(ValueError):
        GeneratorParams(n_cells=0)
    with pytest.raises(ValueError):
        GeneratorParams(demand_range_bps=(5.0, 5.0))
    with pytest.raises(ValueError):
        GeneratorParams(serving_fade_fraction=1.5)


def test_scenario_roundtrip(tmp_path):
    scn = generate_scenario(GeneratorParams(n_cells=3, services_per_cell=(2, 3),
                                            seed=8, uplink_fraction=0.5))
    path = tmp_path / "scn.json"
    save_scenario(scn, path)
    again = load_scenario(path)
    assert scn.equals(again)


def test_load_rejects_missing_field(tmp_path, symmetric_pair):
    path = tmp_path / "scn.json"
    save_scenario(symmetric_pair, path)
    doc = json.loads(path.read_text())
    del doc["gains"]
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_load_rejects_broken_invariants(tmp_path, symmetric_pair):
    path = tmp_path / "scn.json"
    save_scenario(symmetric_pair, path)
    doc = json.loads(path.read_text())
    doc["noise"] = [0.1, -0.1]
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError):
        load_scenario(path)
