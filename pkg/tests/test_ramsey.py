import math

import numpy as np
import pytest

from rydsense import ramsey as rm
from rydsense import spin_ladder as sl
from rydsense.config import ConfigError, ExperimentConfig
from rydsense.fieldgen import FieldTrace, TraceRangeError, constant, pulse_pair
from rydsense.sequence import default_sequence, pair_phase_coefficients


@pytest.fixture
def cfg():
    return ExperimentConfig()


@pytest.fixture
def timeline(cfg):
    return default_sequence(cfg)


def test_config_validation_names_fields():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig(alpha=-1.0, path="quantum", seed=-1)
    assert err.value.fields == ["alpha", "path", "seed"]
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"alpha": 0.02, "colour": "red"})


def test_analytic_kernel(cfg, timeline):
    k = rm.phase_kernel(cfg.replace(path="analytic"), timeline)
    assert k.times.tolist() == pytest.approx([cfg.t_plus, cfg.t_plus + cfg.tau])
    assert k.weights.tolist() == pytest.approx([cfg.alpha, -cfg.alpha])


def test_dipole_kernel_normalizations(cfg, timeline):
    k = rm.phase_kernel(cfg, timeline)
    sums = [k.pair_weights(i)[1].sum() for i in range(2)]
    assert sums == pytest.approx([cfg.alpha, -cfg.alpha], rel=1e-12)
    phys = rm.phase_kernel(cfg.replace(dipole_normalization="physical"), timeline)
    plus, minus = pair_phase_coefficients(cfg)
    d = sl.DipoleModel(cfg.n).d_max / sl.HBAR * 1e-3
    got = [phys.pair_weights(i)[1].sum() for i in range(2)]
    assert got[0] == pytest.approx(d * plus, rel=1e-4)
    assert got[1] == pytest.approx(-d * minus, rel=1e-4)
    # the dipole windows stay inside their pairs
    for i, ev in enumerate(timeline.rf_pairs()):
        t, _ = k.pair_weights(i)
        assert ev.start < t.min() and t.max() < ev.end


def test_physical_kernel_matches_ladder_evolution(cfg, timeline):
    full = cfg.replace(path="full")
    phys = cfg.replace(dipole_normalization="physical")
    plus_only = rm.calibration_timelines(cfg)[1]
    field = rm.FieldNoise(constant(37.6))
    phi_full = rm.shot_phases(full, plus_only, field.realize(None, 1, 0, plus_only), 1)[0]
    phi_lin = rm.shot_phases(phys, plus_only, field.realize(None, 1, 0, plus_only), 1)[0]
    assert phi_full == pytest.approx(phi_lin, rel=0.01)


def test_noise_free_fringe_has_full_contrast(cfg, timeline):
    for path in ("analytic", "dipole", "full"):
        c = cfg.replace(path=path)
        assert rm.expected_p49(c, timeline, constant(0.0), 0.0) == pytest.approx(cfg.P0 + cfg.C0 / 2)
        assert rm.expected_p49(c, timeline, constant(0.0), math.pi) == pytest.approx(cfg.P0 - cfg.C0 / 2)


def test_reference_transient_is_silent_without_field(cfg, timeline):
    c = cfg.replace(path="full", reference_transient=True)
    assert rm.expected_p49(c, timeline, constant(0.0), 0.0) == pytest.approx(cfg.P0 + cfg.C0 / 2)
    with_ref = rm.expected_p49(c, timeline, pulse_pair(37.6, cfg.t_plus - 0.75e-6), math.pi / 2)
    without = rm.expected_p49(c.replace(reference_transient=False), timeline,
                              pulse_pair(37.6, cfg.t_plus - 0.75e-6), math.pi / 2)
    assert with_ref != without
    assert abs(with_ref - without) < 0.05


def test_trace_must_cover_the_pairs(cfg, timeline):
    short = FieldTrace(lambda t: 0 * t, 0.0, 5e-6)
    with pytest.raises(TraceRangeError):
        rm.expected_p49(cfg, timeline, short, 0.0)


def test_run_shot_reports_pair_fields(cfg, timeline):
    tr = pulse_pair(37.6, cfg.t_plus - 0.75e-6)
    out = rm.run_shot(cfg.replace(path="analytic"), timeline, tr, math.pi / 2,
                      rm.generator(1))
    assert out.f_plus == pytest.approx(37.6)
    assert out.f_minus == pytest.approx(0.0)
    assert out.phi_tot == pytest.approx(cfg.alpha * 37.6)
    assert out.p49 == pytest.approx(0.639, abs=5e-4)
    assert isinstance(out.detected_49, bool)


def test_calibrate_alpha_recovers_configured_alpha(cfg):
    a_p, a_m = rm.calibrate_alpha(cfg.replace(path="analytic"))
    assert a_p == pytest.approx(cfg.alpha, rel=1e-9)
    assert a_m == pytest.approx(-cfg.alpha, rel=1e-9)


def test_full_path_calibration_agrees_with_dipole_model(cfg):
    lin = rm.calibrate_alpha(cfg)
    full = rm.calibrate_alpha(cfg.replace(path="full"), phi_points=8)
    assert full[0] == pytest.approx(lin[0], rel=0.01)
    assert full[1] == pytest.approx(lin[1], rel=0.01)


# ---------------------------------------------------------------------------
# fringe fitting
# ---------------------------------------------------------------------------


def test_fit_recovers_exact_probabilities():
    phi = rm.default_phi_grid(8)
    p = 0.43 + 0.5 * 0.5 * np.cos(phi - 0.7)
    fit = rm.fit_fringe_probabilities(phi, p)
    assert (fit.offset, fit.contrast, fit.phase) == pytest.approx((0.43, 0.5, 0.7), abs=1e-12)
    with pytest.raises(rm.FitError):
        rm.fit_fringe_probabilities([0.0, 1.0], [0.5, 0.5])


def test_fit_is_unbiased():
    rng = np.random.default_rng(42)
    phi = rm.default_phi_grid(8)
    p = 0.43 + 0.315 * np.cos(phi - 0.3)
    fits = [rm.fit_fringe(phi, rng.binomial(1000, p), np.full(8, 1000)) for _ in range(100)]
    c = np.array([f.contrast for f in fits])
    ph = np.array([f.phase for f in fits])
    err = np.mean([f.contrast_err for f in fits])
    assert abs(c.mean() - 0.63) < 3 * err / 10
    assert abs(ph.mean() - 0.3) < 3 * np.mean([f.phase_err for f in fits]) / 10
    # the reported errors match the scatter
    assert np.std(c) == pytest.approx(err, rel=0.25)


def test_degenerate_fits():
    phi = rm.default_phi_grid(8)
    flat = rm.fit_fringe(phi, np.full(8, 50), np.full(8, 100))
    assert not flat.ok and flat.contrast == 0.0
    assert rm.fit_fringe(phi, np.zeros(8), np.full(8, 100)).ok is False
    two = rm.fit_fringe([0.0, math.pi, 2 * math.pi], [10, 90, 10], [100, 100, 100])
    assert not two.ok
    d = flat.to_dict()
    assert d["ok"] is False


def test_result_validation():
    with pytest.raises(ValueError):
        rm.RamseyResult([0.0], [10], [11])


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------


def test_seed_determinism(cfg, timeline):
    noise = rm.GaussianPairNoise(37.0)
    a = rm.scan_mw_phase(cfg, timeline, noise, shots=3000, seed=7)
    b = rm.scan_mw_phase(cfg, timeline, noise, shots=3000, seed=7)
    c = rm.scan_mw_phase(cfg, timeline, noise, shots=3000, seed=8)
    assert np.array_equal(a.successes, b.successes)
    assert not np.array_equal(a.successes, c.successes)


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_worker_count_independence(cfg, timeline, workers):
    from rydsense.fieldgen import gen_exp_correlated
    noise = rm.TableNoise(gen_exp_correlated(seed=0), sigma=37.0)
    shots = 2 * rm.BLOCK + 123  # several blocks per setting
    one = rm.scan_mw_phase(cfg, timeline, noise, shots=shots, workers=1)
    many = rm.scan_mw_phase(cfg, timeline, noise, shots=shots, workers=workers)
    assert np.array_equal(one.successes, many.successes)


def test_zero_shots_rejected(cfg, timeline):
    with pytest.raises(ValueError):
        rm.scan_mw_phase(cfg, timeline, shots=0)


def test_correlated_pair_noise_cancels(cfg, timeline):
    res = rm.scan_mw_phase(cfg, timeline, rm.GaussianPairNoise(60.0, g1=1.0), shots=4000)
    assert res.fit.contrast == pytest.approx(cfg.C0, abs=3 * res.fit.contrast_err)
    with pytest.raises(ValueError):
        rm.GaussianPairNoise(-1.0)


def test_pair_noise_is_constant_over_each_pair(cfg, timeline):
    f = rm.GaussianPairNoise(10.0).realize(rm.generator(0), 5, 0, timeline)
    k = rm.phase_kernel(cfg, timeline)
    vals = f(k.times)
    for i in range(2):
        seg = vals[:, k.pair_slices[i]]
        assert np.all(seg == seg[:, :1])


def test_pulse_start_scan_plateaus(cfg):
    res = rm.scan_pulse_start(cfg.replace(path="analytic"), 37.6, [-0.75e-6, -0.3e-6, 0.25e-6],
                              shots=2000)
    assert res.expected.tolist() == pytest.approx([0.639, 0.430, 0.221], abs=5e-4)


def test_frequency_scan_low_frequency_limit(cfg):
    scan = rm.scan_frequency_response(cfg, [0.1e6], amplitude=50.0, shots=4000)
    assert scan.gain_ratio[0] == pytest.approx(1.0, abs=3 * scan.gain_err[0])


def test_invert_j1():
    from scipy.special import j1
    for x in (0.0, 0.3, 1.2, 1.8):
        assert rm._invert_j1(j1(x)) == pytest.approx(x, abs=1e-9)
    assert rm._invert_j1(0.9) == pytest.approx(1.8411837813406593)


def test_full_dynamics_alias():
    assert ExperimentConfig(path="full_dynamics").path == "full"
    assert ExperimentConfig.from_dict({"path": "full_dynamics"}).path == "full"
