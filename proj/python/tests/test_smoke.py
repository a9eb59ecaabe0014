"""Smoke tests for the python bindings."""

import math

import pytest

import conformal_ood as co


def test_numerics_known_values():
    assert co.reg_inc_beta(0.3, 1, 1) == pytest.approx(0.3, abs=1e-12)
    assert co.reg_inc_beta(0.5, 2, 2) == pytest.approx(0.5, abs=1e-12)
    assert co.normal_sf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert co.normal_sf_inv(co.normal_sf(1.25)) == pytest.approx(1.25, abs=1e-8)
    with pytest.raises(ValueError):
        co.reg_inc_beta(1.5, 2, 2)
    with pytest.raises(ValueError):
        co.normal_sf_inv(0.0)


def test_conformal_p_values():
    assert co.conformal_p_value([0.1, 0.5, 0.9], 0.7) == pytest.approx(0.5)
    cal = co.CalibrationSet(["a", "b"], [[1, 2, 3], [10, 20, 30]])
    assert cal.k == 2
    assert cal.n_cal == 3
    assert cal.p_values([2.5, 5.0]) == pytest.approx([0.5, 1.0])
    assert co.oracle_p_value(0.0) == pytest.approx(0.5)
    assert co.oracle_p_value(2.0, mu=2.0, sigma=1.0) == pytest.approx(0.5)


def test_detectors():
    cfg = co.DetectorConfig(alpha=0.55, epsilon=0.0, k=3, method="bh")
    res = co.bh_detect([0.05, 0.25, 0.9], cfg)
    assert res.is_ood
    assert res.m == 1
    assert res.rejected_indices == [0]
    assert res.thresholds == pytest.approx([0.1, 0.2, 0.3])

    bf = co.DetectorConfig(alpha=0.3, epsilon=0.0, k=3, method="bonferroni")
    assert co.bonferroni_detect([0.05, 0.25, 0.9], bf).m == 1

    naive = co.naive_average_detect([2.0, 0.5, 3.0], [1.0, 1.0, 1.0])
    assert naive.is_ood
    assert naive.m == 2

    with pytest.raises(ValueError):
        co.DetectorConfig(alpha=2.0)


def test_calibration_size_solvers():
    assert co.required_cal_size(0.1, 1.0, 0.2, 5) == 2054
    assert co.required_cal_size_bonferroni(0.1, 1.0, 0.2, 5) == 499
    with pytest.raises(RuntimeError):
        co.required_cal_size(0.1, 1.0, 0.05, 5, scan_limit=10)


def test_simulation_and_bound():
    rep = co.simulate_test_t1((0.0, 0.0), 0.1, 20000, seed=5)
    assert rep.estimate == pytest.approx(0.1, abs=3 * rep.stderr + 1e-9)
    # Worker count must not change the result.
    rep4 = co.simulate_test_t1((0.0, 0.0), 0.1, 20000, seed=5, workers=4)
    assert rep.estimate == rep4.estimate

    assert co.power_bound((1.0, -1.0), 0.1) == pytest.approx(0.2595, abs=5e-4)

    model = co.SyntheticModel.iid_normal(3)
    cfg = co.DetectorConfig(alpha=0.1, epsilon=1.0, delta=0.1, k=3, method="bh")
    rep = co.verify_conditional_false_alarm(model, cfg, 300, 5, 500, seed=7)
    assert rep.n_trials == 5
    assert len(rep.per_calibration_estimates) == 5


def test_metrics_and_energy():
    assert co.auroc([1, 3], [2, 4]) == pytest.approx(0.75)
    pd, pf = co.power_at_false_alarm([0, 0, 1, 0], [1, 1, 1, 0], 0.25)
    assert pd == pytest.approx(0.75)
    assert pf == pytest.approx(0.25)
    assert co.empirical_fwer([[False, True], [False, False]]) == pytest.approx(0.5)
    assert co.energy_score([0.0, 0.0], temperature=1.0) == pytest.approx(
        -math.log(2.0), abs=1e-12
    )
    assert co.correction_constant(3, 1.0) == pytest.approx(11.0 / 3.0)
