import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydsense import sequence as sq
from rydsense.config import ExperimentConfig


@pytest.fixture
def cfg():
    return ExperimentConfig()


def test_default_sequence_layout(cfg):
    tl = sq.default_sequence(cfg)
    kinds = [e.kind for e in tl.events]
    assert kinds == [sq.MW, sq.RF_PAIR, sq.RF_PAIR, sq.MW]
    plus, minus = tl.pair("sigma+"), tl.pair("sigma-")
    assert plus.center == pytest.approx(cfg.t_plus, abs=1e-15)
    assert minus.center - plus.center == pytest.approx(cfg.tau, abs=1e-15)
    assert plus.extent_ns == pytest.approx(204)
    assert minus.extent_ns == pytest.approx(206)


def test_min_tau_is_sum_of_half_extents(cfg):
    assert sq.min_tau(cfg) == pytest.approx(205e-9)
    sq.default_sequence(cfg, sq.min_tau(cfg))  # touching pairs are allowed
    with pytest.raises(sq.SequenceValidationError) as err:
        sq.default_sequence(cfg, 0.2e-6)
    assert err.value.events == [1, 2]
    assert "overlaps" in str(err.value)


def test_pairs_must_sit_inside_the_ramsey_window(cfg):
    with pytest.raises(sq.SequenceValidationError):
        sq.default_sequence(cfg, 30e-6)


def test_event_validation_names_the_event():
    bad = [sq.PulseSpec(sq.MW, 0, 500), sq.PulseSpec(sq.RF_PAIR, 1000, -5, "sigma+", 144)]
    with pytest.raises(sq.SequenceValidationError) as err:
        sq.Timeline(bad)
    assert err.value.events == [1]
    assert "duration" in str(err.value)
    with pytest.raises(sq.SequenceValidationError):
        sq.Timeline([sq.PulseSpec(sq.RF_PAIR, 0, 100, "none", 90)])
    with pytest.raises(sq.SequenceValidationError):
        sq.Timeline([sq.PulseSpec("pi_pulse", 0, 100)])


def test_events_are_sorted(cfg):
    tl = sq.default_sequence(cfg)
    shuffled = sq.Timeline(reversed(tl.events))
    assert shuffled == tl


def test_round_trip(cfg, tmp_path):
    tl = sq.default_sequence(cfg)
    path = tmp_path / "seq.json"
    sq.save_sequence(path, tl)
    assert sq.load_sequence(path) == tl
    assert sq.parse_sequence(sq.serialize_sequence(tl)) == tl


pair_st = st.builds(
    lambda start, dur, gap, rot, pol, ret: sq.PulseSpec(sq.RF_PAIR, start, dur, pol, rot, gap,
                                                        return_phase_rad=ret),
    st.floats(0, 1e5), st.floats(1, 500), st.floats(0, 50), st.floats(1, 179),
    st.sampled_from(["sigma+", "sigma-"]), st.floats(0, 2 * math.pi),
)


@given(st.lists(pair_st, min_size=1, max_size=4))
@settings(max_examples=100, deadline=None)
def test_round_trip_property(events):
    # lay events end to end so they never overlap
    laid, t = [], 0.0
    for ev in events:
        laid.append(sq.PulseSpec(ev.kind, t, ev.duration_ns, ev.polarization, ev.rotation_deg,
                                 ev.gap_ns, return_phase_rad=ev.return_phase_rad))
        t = laid[-1].end_ns + 1.0
    tl = sq.Timeline(laid)
    assert sq.parse_sequence(sq.serialize_sequence(tl)) == tl


def test_syntax_error_reports_position():
    text = '{\n  "version": 1,\n  "events": [\n    {"kind": "mw_pi_half",, }\n  ]\n}\n'
    with pytest.raises(sq.SequenceSyntaxError) as err:
        sq.parse_sequence(text)
    assert err.value.line == 4
    assert err.value.column is not None


def test_semantic_errors_in_files():
    doc = {"version": 1, "events": [
        {"kind": "mw_pi_half", "start_ns": 0, "duration_ns": 500, "polarization": "none",
         "rotation_deg": 90, "gap_ns": 3},
    ]}
    with pytest.raises(sq.SequenceValidationError):
        sq.parse_sequence(json.dumps(doc))
    doc["events"][0].pop("gap_ns")
    doc["events"][0]["start_ns"] = "zero"
    with pytest.raises(sq.SequenceValidationError):
        sq.parse_sequence(json.dumps(doc))
    with pytest.raises(sq.SequenceSyntaxError):
        sq.parse_sequence(json.dumps({"version": 2, "events": []}))


# ---------------------------------------------------------------------------
# dipole balance
# ---------------------------------------------------------------------------


def test_balanced_gap_equalizes_pair_phases(cfg):
    gap = sq.balance_delta_t_minus(cfg)
    plus, minus = sq.pair_phase_coefficients(cfg, gap)
    assert minus == pytest.approx(plus, rel=1e-3)
    # a few ns from the experimentally used 12 ns gap
    assert 5e-9 < gap < 15e-9


def test_balanced_gap_gives_opposite_alphas(cfg):
    from rydsense.ramsey import calibrate_alpha
    balanced = cfg.replace(delta_t_minus=sq.balance_delta_t_minus(cfg))
    a_plus, a_minus = calibrate_alpha(balanced)
    assert a_minus == pytest.approx(-a_plus, rel=1e-3)


def test_smaller_second_rotation_needs_a_longer_gap(cfg):
    base = sq.balance_delta_t_minus(cfg)
    smaller = sq.balance_delta_t_minus(cfg.replace(theta2_deg=cfg.theta2_deg / 2), upper=400e-9)
    assert smaller > base


def test_symmetric_pairs_need_no_gap(cfg):
    sym = cfg.replace(t_rf_minus=cfg.t_rf_plus, theta2_deg=cfg.theta1_deg)
    assert sq.balance_delta_t_minus(sym) == 0.0


def test_infeasible_balance(cfg):
    # sigma- pair already larger than sigma+ at zero gap
    big = cfg.replace(t_rf_minus=150e-9)
    with pytest.raises(sq.BalanceInfeasibleError):
        sq.balance_delta_t_minus(big)
