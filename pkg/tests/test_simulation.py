# -*- coding: utf-8 -*-

import numpy as np
import pytest
from argap.Filter import Filter
from argap import Simulation
from argap.GapStat import ReferenceCurve, reference_curve
from argap.Sampler import load_or_estimate_weights
from argap.Mixture import EMConfig
from argap.Simulation import (SwitchingSpec, ScenarioTruth, ExperimentTable, draw_mode_sequence, generate_tvar, make_scenario,
                              draw_replication, is_bounded, run_experiment, IID, SEGMENTED, OVERFLOW, SCENARIOS)
from argap.Errors import InputError, NumericalError
from tools.Tools import child_seed


def test_single_filter_recursion():
  truth = ScenarioTruth(1, 1, (Filter([0.5]),), SwitchingSpec(IID, (1.0,)), 0.0, 10)
  s = generate_tvar(truth, 0, presample=[1.0])
  assert s.observations.tolist() == pytest.approx((0.5**np.arange(1, 11)).tolist(), abs=1e-15)
  assert s.presample.tolist() == [1.0]


def test_segmented_switch():
  truth = ScenarioTruth(2, 1, (Filter([0.5]), Filter([-0.8])), SwitchingSpec(SEGMENTED, (), 2), 0.0, 10)
  s, modes = generate_tvar(truth, 0, presample=[1.0], return_modes=True)
  assert modes.tolist() == [0]*5 + [1]*5
  z = np.concatenate(([1.0], s.observations))
  ratios = z[1:] / z[:-1]
  assert ratios[:5] == pytest.approx([0.5]*5)
  assert ratios[5:] == pytest.approx([-0.8]*5)


def test_degenerate_probabilities_match_single_filter():
  one = ScenarioTruth(1, 2, (Filter([0.5, -0.2]),), SwitchingSpec(IID, (1.0,)), 1.0, 60)
  two = ScenarioTruth(2, 2, (Filter([0.5, -0.2]), Filter([-0.3, 0.1])), SwitchingSpec(IID, (1.0, 0.0)), 1.0, 60)
  a = generate_tvar(one, 12)
  b = generate_tvar(two, 12)
  assert np.array_equal(a.observations, b.observations)
  assert np.array_equal(a.presample, b.presample)


def test_generation_is_seeded():
  truth = ScenarioTruth(2, 1, (Filter([0.5]), Filter([-0.8])), SwitchingSpec(IID, (0.3, 0.7)), 1.0, 100)
  assert np.array_equal(generate_tvar(truth, 3).observations, generate_tvar(truth, 3).observations)
  assert not np.array_equal(generate_tvar(truth, 3).observations, generate_tvar(truth, 4).observations)


def test_segments_take_the_remainder():
  seq = draw_mode_sequence(SwitchingSpec(SEGMENTED, (), 3), 10, 3, np.random.default_rng(0))
  assert seq.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2, 2]


def test_iid_mode_frequencies():
  seq = draw_mode_sequence(SwitchingSpec(IID, (0.4, 0.6)), 20000, 2, np.random.default_rng(1))
  assert np.mean(seq == 1) == pytest.approx(0.6, abs=0.02)


def test_scenarios(weights):
  t = make_scenario(1, 0, weights(2))
  assert (t.true_m, t.lag, t.n) == (4, 2, 1400)
  assert t.switching.mode_probabilities == (0.25, 0.25, 0.25, 0.25)
  t = make_scenario(2, 0, weights(4))
  assert (t.true_m, t.lag) == (2, 4)
  assert t.switching.mode_probabilities == (0.4, 0.6)
  t = make_scenario(3, 0, weights(1))
  assert (t.true_m, t.lag, t.switching.kind, t.switching.n_segments) == (7, 1, SEGMENTED, 7)
  _, modes = generate_tvar(t, 0, return_modes=True)
  assert np.bincount(modes).tolist() == [200]*7
  assert t.sigma2 == 1.0
  with pytest.raises(InputError):
    make_scenario(4, 0)


def test_scenario_series_stay_bounded(weights):
  for scenario in (1, 2, 3):
    L = SCENARIOS[scenario][1]
    for seed in range(20):
      truth, s, redraws = draw_replication(scenario, seed, weights(L))
      assert np.max(np.abs(s.observations)) < OVERFLOW
      assert truth.true_m == SCENARIOS[scenario][0] and redraws >= 0


def test_unbounded_switching_is_redrawn():
  ### iid switching between stable order-4 filters can explode: these draws reach 3.7e6 and 4.1e18
  w = load_or_estimate_weights(4)
  unbounded = []
  for r in (0, 4):
    try:
      unbounded.append(not is_bounded(generate_tvar(make_scenario(2, child_seed(1, r, 0), w), child_seed(1, r, 1)).observations))
    except NumericalError:
      unbounded.append(True)
  assert unbounded == [True, True]
  for r in range(6):
    _, s, _ = draw_replication(2, child_seed(1, r), w)
    assert is_bounded(s.observations)


def test_redraws_are_seeded(weights, monkeypatch):
  a = draw_replication(2, 11, weights(4))
  b = draw_replication(2, 11, weights(4))
  assert np.array_equal(a[1].observations, b[1].observations) and a[2] == b[2]
  assert np.array_equal(a[0].filters[0].coefficients, b[0].filters[0].coefficients)
  monkeypatch.setattr(Simulation, 'OVERFLOW', 0.0)
  with pytest.raises(NumericalError):
    draw_replication(1, 0, weights(2), max_redraws=3)


def test_overflowing_series_raise():
  truth = ScenarioTruth(1, 2, (Filter([1.98, -0.9801]),), SwitchingSpec(IID, (1.0,)), 0.0, 5)
  with pytest.raises(NumericalError):
    generate_tvar(truth, 0, presample=[-1e308, 1e308])


def test_truth_validation():
  with pytest.raises(ValueError):
    ScenarioTruth(1, 1, (Filter([1.2]),), SwitchingSpec(IID, (1.0,)))
  with pytest.raises(ValueError):
    ScenarioTruth(2, 1, (Filter([0.2]), Filter([0.1, 0.1])), SwitchingSpec(IID, (0.5, 0.5)))
  with pytest.raises(ValueError):
    SwitchingSpec(IID, (0.5, 0.6))
  with pytest.raises(ValueError):
    SwitchingSpec('markov', (0.5, 0.5))


def test_experiment_table():
  t = ExperimentTable(3, 2, 3)
  t.add(2, 1, 1)
  t.add(2, 2, 1)
  t.add(3, 1, 1)
  assert t.counts('gap').tolist() == [0, 2, 1]
  assert t.accuracy('gap') == pytest.approx(2/3)
  assert t.modal('bic') == 1
  rows = t.to_rows()
  assert len(rows) == 3 * 4
  assert rows[3] == [3, 'gap', 'all', 3, repr(2/3)]
  assert t.to_dict()['methods']['aic']['counts'] == [2, 1, 0]
  assert t.to_dict()['replications'] == []


def test_run_experiment_bookkeeping(weights):
  ref = reference_curve(1, 7, 20, 1, rng_seed=0, weights=weights(1), n_restarts=2)
  table = run_experiment(3, 1, 2, 7, 0, ref, weights(1), em_config=EMConfig(max_iter=30))
  for method in ('gap', 'aic', 'bic'):
    assert int(table.counts(method).sum()) == 1
  again = run_experiment(3, 1, 2, 7, 0, ref, weights(1), em_config=EMConfig(max_iter=30))
  assert again.selections == table.selections
  assert len(table.replications) == 1
  truth = table.to_dict()['replications'][0]['truth']
  assert (truth['true_m'], truth['lag'], len(truth['filters'])) == (7, 1, 7)
  assert again.replications == table.replications


def test_run_experiment_checks_reference():
  ref = ReferenceCurve(2, 7, [1.0]*7, 10, 1, 0)
  with pytest.raises(InputError):
    run_experiment(3, 1, 2, 7, 0, ref)
  ref = ReferenceCurve(1, 7, [1.0]*7, 10, 1, 0)
  with pytest.raises(InputError):
    run_experiment(3, 1, 2, 5, 0, ref)


@pytest.fixture(scope='module')
def desk_scale(tmp_path_factory):
  ### every scenario with 20 replications, 10 EM restarts and a reference curve of 5 instances of 500 filters
  tables = {}
  cache = str(tmp_path_factory.getbasetemp() / 'argap_cache')
  for scenario, (true_m, L, _) in SCENARIOS.items():
    w = load_or_estimate_weights(L, directory=cache)
    ref = reference_curve(L, true_m + 3, 500, 5, rng_seed=child_seed(0, scenario, 0), weights=w)
    tables[scenario] = run_experiment(scenario, 20, 10, true_m + 3, child_seed(0, scenario, 1), ref, w)
  return tables


@pytest.mark.slow
def test_gap_beats_criteria_on_segmented_series(desk_scale):
  t = desk_scale[3]
  assert t.accuracy('gap') >= t.accuracy('bic')
  assert t.accuracy('gap') >= t.accuracy('aic')
  assert t.accuracy('gap') > 0.0
  assert t.modal('aic') < 7 and t.modal('bic') < 7


@pytest.mark.slow
@pytest.mark.parametrize('scenario', [1, 2])
def test_gap_finds_iid_modes(desk_scale, scenario):
  t = desk_scale[scenario]
  assert t.modal('gap') == t.true_m
  assert int(t.counts('gap').sum()) == 20
