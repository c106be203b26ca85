import numpy as np
import pytest

from resmute.montecarlo import (DOWNLINK_PROTOCOLS, FLEX_PROTOCOLS,
                                MonteCarloConfig, montecarlo, write_csv,
                                write_manifest, write_summary)
from resmute.netmodel import GeneratorParams


def _small_config(**kw):
    defaults = dict(
        trials=3, seed=0, theta=1.0, tol=1e-7,
        generator=GeneratorParams(n_cells=2, services_per_cell=(1, 2)))
    defaults.update(kw)
    return MonteCarloConfig(**defaults)


def test_config_validation():
    with pytest.raises(ValueError):
        _small_config(trials=0)
    with pytest.raises(ValueError):
        _small_config(protocols=("nonmuting", "bogus"))
    with pytest.raises(ValueError):
        # flex batches only know the duplex protocols
        _small_config(flex=True, protocols=("successive",))


def test_downlink_batch():
    summary = montecarlo(_small_config())
    assert summary.failed_trials == []
    assert set(summary.utilities) == set(DOWNLINK_PROTOCOLS)
    for proto in DOWNLINK_PROTOCOLS:
        assert np.all(np.isfinite(summary.utilities[proto]))
    gap = summary.utilities["successive"] - summary.utilities["nonmuting"]
    assert np.all(gap >= -1e-12)
    np.testing.assert_array_equal(summary.trial_seeds, [0, 1, 2])


def test_flex_batch_and_binning():
    cfg = _small_config(
        flex=True, protocols=FLEX_PROTOCOLS, restarts=2, eps=1e-5,
        distance_bins=2,
        generator=GeneratorParams(n_cells=2, services_per_cell=(1, 2),
                                  uplink_fraction=0.5))
    summary = montecarlo(cfg)
    assert summary.failed_trials == []
    assert np.all(np.isfinite(summary.traffic_distances))
    gap = summary.utilities["winf-muting"] - summary.utilities["safp"]
    assert np.all(gap >= -1e-12)
    rows = summary.binned_means()
    assert len(rows) == 2
    assert sum(r["count"] for r in rows) == cfg.trials


def test_batch_reproducible():
    a = montecarlo(_small_config())
    b = montecarlo(_small_config())
    for proto in DOWNLINK_PROTOCOLS:
        np.testing.assert_array_equal(a.utilities[proto], b.utilities[proto])


def test_cdf_levels():
    summary = montecarlo(_small_config(trials=4))
    u, levels = summary.cdf("nonmuting")
    assert u.shape == (4,)
    assert np.all(np.diff(u) >= 0)
    np.testing.assert_allclose(levels, [0.25, 0.5, 0.75, 1.0])


def test_write_summary_files(tmp_path):
    summary = montecarlo(_small_config())
    written = write_summary(summary, tmp_path / "out")
    names = sorted(p.name for p in written)
    assert "trials.csv" in names
    for proto in DOWNLINK_PROTOCOLS:
        assert f"cdf_{proto}.csv" in names
    header = (tmp_path / "out" / "trials.csv").read_text().splitlines()[0]
    assert header.split(",")[:2] == ["trial", "seed"]


def test_csv_and_manifest_format(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ["a", "b"], [[1, 0.5], [2, 1.0 / 3.0]])
    text = path.read_text()
    assert text.startswith("a,b\n1,0.5\n")
    assert "\r" not in text
    mpath = write_manifest(tmp_path, "demo", {"seed": 3}, ["status: done"])
    body = mpath.read_text()
    assert "command: demo" in body
    assert "seed: 3" in body
    assert body.endswith("status: done\n")
