import numpy as np
import pytest

import proxi


def test_version_and_methods():
    assert proxi.__version__ == "0.1.0"
    assert "kpv" in proxi.methods()
    assert "pmmr-nystrom" in proxi.methods()


def test_gen_main_shapes_and_determinism():
    d = proxi.gen_main(50, seed=3)
    assert d["a"].shape == (50, 1)
    assert d["z"].shape == (50, 2)
    assert d["w"].shape == (50, 2)
    assert d["x"].shape == (50, 0)
    np.testing.assert_array_equal(d["y"], proxi.gen_main(50, seed=3)["y"])


def test_estimate_kpv_and_pmmr():
    d = proxi.gen_main(200, seed=1)
    grid = proxi.default_a_grid()
    truth = proxi.true_ate(grid, samples=100_000)
    for method in ("kpv", "pmmr", "ridge"):
        curve, hyper = proxi.estimate(method, d["a"], d["z"], d["w"], d["y"], grid)
        assert curve.shape == grid.shape
        assert np.all(np.isfinite(curve))
        assert hyper
        assert proxi.cmae(grid, curve, truth) < 1.5


def test_discrete_toy_identification():
    toy = proxi.gen_discrete_toy(2000, seed=6)
    curve, _ = proxi.estimate("pmmr", toy["a"], toy["z"], toy["w"], toy["y"], toy["levels"], seed=6)
    assert np.max(np.abs(curve - toy["do_mean"])) < 0.2


def test_errors_map_to_python():
    d = proxi.gen_main(20, seed=0)
    with pytest.raises(proxi.ProxiError):
        proxi.estimate("nope", d["a"], d["z"], d["w"], d["y"], proxi.default_a_grid())
    with pytest.raises(proxi.ProxiError):
        proxi.estimate("kpv", d["a"][:10], d["z"], d["w"], d["y"], proxi.default_a_grid())
