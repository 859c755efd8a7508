# -*- coding: utf-8 -*-

import math
import warnings
import numpy as np
import pytest
from argap.Filter import Filter
from argap.Mixture import (TimeSeries, MixtureARModel, Responsibilities, FitResult, EMConfig, EMFitter, log_likelihood, e_step,
                           m_step, fit_em, empirical_mspe, weighted_mspe, least_squares_ar, aic, bic, n_parameters, read_time_series)
from argap.Simulation import ScenarioTruth, SwitchingSpec, generate_tvar, IID
from argap.Errors import InputError
from tools.Tools import child_rng


def ar1_series(coef, n, sigma=1.0, seed=0, x0=1.0):
  rng = np.random.default_rng(seed)
  x = np.empty(n)
  prev = x0
  for t in range(n):
    prev = coef*prev + sigma*rng.standard_normal()
    x[t] = prev
  return TimeSeries([x0], x, 1)

def two_mode_series(a=0.9, b=-0.9, n=1000, sigma2=0.01, seed=0):
  truth = ScenarioTruth(2, 1, (Filter([a]), Filter([b])), SwitchingSpec(IID, (0.5, 0.5)), sigma2, n)
  return generate_tvar(truth, seed)

def normal_pdf(x, mu, s2):
  return math.exp(-(x - mu)**2 / (2*s2)) / math.sqrt(2*math.pi*s2)


def test_design_matrix():
  s = TimeSeries([1.0, 2.0], [3.0, 4.0, 5.0], 2)
  X, y = s.design()
  assert X.tolist() == [[1.0, 2.0], [3.0, 1.0], [4.0, 3.0]]
  assert y.tolist() == [3.0, 4.0, 5.0]


def test_presample_defaults_to_first_values():
  s = TimeSeries.from_values([1.0, 2.0, 3.0, 4.0], 2)
  assert s.presample.tolist() == [2.0, 1.0]
  assert s.observations.tolist() == [3.0, 4.0]
  s = TimeSeries.from_values([3.0, 4.0], 2, presample=[1.0, 2.0])
  assert s.presample.tolist() == [2.0, 1.0]
  with pytest.raises(ValueError):
    TimeSeries.from_values([1.0, 2.0], 2)
  with pytest.raises(ValueError):
    TimeSeries([1.0], [np.nan], 1)


def test_loglik_at_zero_residuals():
  x = 0.5**np.arange(1, 11)
  s = TimeSeries([1.0], x, 1)
  model = MixtureARModel([1.0], [Filter([0.5])], 1.0)
  assert log_likelihood(model, s) == pytest.approx(-5.0 * math.log(2*math.pi), abs=1e-10)


def test_identical_modes_collapse():
  s = ar1_series(0.4, 50)
  one = MixtureARModel([1.0], [Filter([0.3])], 0.8)
  two = MixtureARModel([0.3, 0.7], [Filter([0.3]), Filter([0.3])], 0.8)
  assert log_likelihood(two, s) == pytest.approx(log_likelihood(one, s), abs=1e-10)
  half = MixtureARModel([0.5, 0.5], [Filter([0.3]), Filter([0.3])], 0.8)
  assert np.allclose(e_step(half, s).values, 0.5, atol=1e-15)


def test_loglik_and_responsibilities_match_direct_sums():
  s = ar1_series(0.5, 20, seed=3)
  model = MixtureARModel([0.35, 0.65], [Filter([0.6]), Filter([-0.4])], 0.7)
  X, y = s.design()
  ll = 0.0
  for n in range(20):
    p = [w * normal_pdf(y[n], g * X[n, 0], 0.7) for w, g in zip([0.35, 0.65], [0.6, -0.4])]
    ll += math.log(sum(p))
  assert log_likelihood(model, s) == pytest.approx(ll, abs=1e-10)
  W = e_step(model, s).values
  for n in range(5):
    p = [w * normal_pdf(y[n], g * X[n, 0], 0.7) for w, g in zip([0.35, 0.65], [0.6, -0.4])]
    assert W[n].tolist() == pytest.approx([p[0] / sum(p), p[1] / sum(p)], abs=1e-12)


def test_zero_weight_mode_gets_no_responsibility():
  s = ar1_series(0.5, 30)
  model = MixtureARModel([1.0, 0.0], [Filter([0.5]), Filter([-0.5])], 1.0)
  W = e_step(model, s).values
  assert np.all(W[:, 0] == 1.0)


def test_m_step_single_mode_is_least_squares():
  s = ar1_series(0.7, 80, seed=1)
  model = m_step(Responsibilities(np.ones((80, 1))), s)
  assert model.weights.tolist() == [1.0]
  assert model.modes[0].coefficients[0] == pytest.approx(least_squares_ar(s).coefficients[0], abs=1e-12)


def test_m_step_noiseless_ar1_is_exact():
  s = ar1_series(0.7, 30, sigma=0.0)
  model = m_step(Responsibilities(np.ones((30, 1))), s)
  assert abs(model.modes[0].coefficients[0] - 0.7) <= 1e-10
  assert model.sigma2 >= 1e-12


def test_m_step_empty_mode_is_regularised():
  s = ar1_series(0.7, 30)
  W = np.zeros((30, 2))
  W[:, 0] = 1.0
  model = m_step(Responsibilities(W), s)
  assert np.all(np.isfinite(model.gamma()))
  assert model.weights.tolist() == [1.0, 0.0]


def test_m_step_degenerate_series():
  s = TimeSeries([1.0, 0.5], np.zeros(40), 2)
  model = m_step(Responsibilities(np.ones((40, 1))), s)
  assert np.all(np.isfinite(model.gamma()))


def test_single_mode_fit_is_least_squares():
  s = ar1_series(0.6, 200, seed=7)
  ls = least_squares_ar(s).coefficients[0]
  for seed in (0, 5):
    fit = fit_em(s, 1, n_restarts=3, rng_seed=seed)
    assert fit.model.modes[0].coefficients[0] == pytest.approx(ls, abs=1e-9)


def test_two_mode_recovery():
  s = two_mode_series()
  fit = fit_em(s, 2, n_restarts=10, rng_seed=0)
  g = np.sort(fit.model.gamma()[:, 0])
  assert np.all(np.abs(g - np.array([-0.9, 0.9])) < 0.05)
  assert fit.log_likelihood == pytest.approx(log_likelihood(fit.model, s), abs=1e-8)


def test_em_is_monotone():
  fitter = EMFitter(EMConfig(max_iter=100))
  for i in range(50):
    rng = np.random.default_rng(i)
    s = two_mode_series(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), n=300, sigma2=1.0, seed=i)
    res = fitter.run(s, int(rng.integers(2, 4)), child_rng(i, 0))
    assert np.all(np.diff(res.trace) >= -1e-8)
    assert len(res.trace) == res.n_iterations + 1


def test_fit_is_seeded():
  s = two_mode_series(n=300, seed=2)
  a = fit_em(s, 2, n_restarts=3, rng_seed=9)
  b = fit_em(s, 2, n_restarts=3, rng_seed=9)
  assert a.log_likelihood == b.log_likelihood
  assert np.array_equal(a.model.gamma(), b.model.gamma())


def test_more_restarts_never_hurt():
  s = two_mode_series(n=300, seed=4)
  lls = [fit_em(s, 3, n_restarts=r, rng_seed=1, max_iter=50).log_likelihood for r in (1, 3, 6)]
  assert lls[0] <= lls[1] <= lls[2]


def test_empirical_mspe():
  x = 0.5**np.arange(1, 11)
  s = TimeSeries([1.0], x, 1)
  assert empirical_mspe(MixtureARModel([1.0], [Filter([0.5])], 1.0), s) == 0.0
  s = TimeSeries([1.0], [2.0, -1.0, 0.5, 0.5, 3.0, -2.0, 1.0, 0.0, 1.5, -0.5], 1)
  model = MixtureARModel([0.5, 0.5], [Filter([0.8]), Filter([-0.3])], 1.0)
  X, y = s.design()
  expected = np.mean([min((y[n] - 0.8*X[n, 0])**2, (y[n] + 0.3*X[n, 0])**2) for n in range(10)])
  assert empirical_mspe(model, s) == pytest.approx(expected, abs=1e-14)
  one = MixtureARModel([1.0], [Filter([0.8])], 1.0)
  assert empirical_mspe(one, s) == pytest.approx(np.mean((y - 0.8*X[:, 0])**2), abs=1e-14)
  assert empirical_mspe(model, s) <= empirical_mspe(one, s)


def test_weighted_mspe():
  s = TimeSeries([1.0], [2.0, -1.0, 0.5, 0.5, 3.0, -2.0, 1.0, 0.0, 1.5, -0.5], 1)
  X, y = s.design()
  one = MixtureARModel([1.0], [Filter([0.8])], 1.0)
  assert weighted_mspe(one, s) == pytest.approx(np.mean((y - 0.8*X[:, 0])**2), abs=1e-14)
  model = MixtureARModel([0.3, 0.7], [Filter([0.8]), Filter([-0.3])], 0.5)
  resid = y[:, None] - X @ model.gamma().T
  expected = np.sum(e_step(model, s).values * resid**2) / s.n
  assert weighted_mspe(model, s) == pytest.approx(expected, rel=1e-12)
  assert weighted_mspe(model, s) >= empirical_mspe(model, s)


def test_weighted_mspe_is_noise_variance_at_convergence():
  s = two_mode_series(n=500, sigma2=0.25, seed=3)
  fit = EMFitter(EMConfig(max_iter=2000, tol=1e-12, n_restarts=3)).fit(s, 2, 0)
  assert weighted_mspe(fit.model, s) == pytest.approx(fit.model.sigma2, rel=1e-4)

def test_information_criteria():
  model = MixtureARModel([1.0], [Filter([0.1])], 1.0)
  fit = FitResult(model, 0.0, 1, True, 0, 10)
  assert aic(fit) == 4.0
  assert bic(fit, N=math.e**2) == pytest.approx(4.0, abs=1e-12)
  model = MixtureARModel([0.5, 0.5], [Filter([0.1, 0.0]), Filter([0.2, 0.0])], 1.0)
  fit = FitResult(model, -100.0, 1, True, 0, 100)
  assert n_parameters(2, 2) == 6
  assert aic(fit) == 212.0
  assert bic(fit) == pytest.approx(200.0 + 6*math.log(100), abs=1e-12)
  assert bic(fit) == pytest.approx(227.631, abs=1e-3)


def test_criteria_grow_with_modes_at_fixed_likelihood():
  for L in (1, 2, 4):
    a = []
    b = []
    for M in range(1, 7):
      model = MixtureARModel(np.full(M, 1.0/M), [Filter(np.full(L, 0.1/L))]*M, 1.0)
      fit = FitResult(model, -250.0, 1, True, 0, 200)
      a.append(aic(fit))
      b.append(bic(fit))
    assert np.all(np.diff(a) > 0.0)
    assert np.all(np.diff(b) > 0.0)


def test_operations_accept_read_only_inputs():
  s = two_mode_series(n=100, seed=1)
  model = MixtureARModel([0.5, 0.5], [Filter([0.9]), Filter([-0.9])], 0.01)
  with warnings.catch_warnings():
    warnings.simplefilter('error', UserWarning)
    resp = e_step(model, s)
    m_step(resp, s)
    log_likelihood(model, s)
    empirical_mspe(model, s)
    weighted_mspe(model, s)

def test_model_json_round_trip():
  model = MixtureARModel([0.25, 0.75], [Filter([0.1, 0.2]), Filter([-0.3, 0.05])], 0.5)
  back = MixtureARModel.from_dict(model.to_dict())
  assert np.array_equal(back.gamma(), model.gamma()) and back.sigma2 == 0.5


def test_model_validation():
  with pytest.raises(ValueError):
    MixtureARModel([0.5, 0.6], [Filter([0.1]), Filter([0.2])], 1.0)
  with pytest.raises(ValueError):
    MixtureARModel([1.0], [Filter([0.1])], 0.0)
  with pytest.raises(ValueError):
    Responsibilities(np.array([[0.5, 0.6]]))


def test_read_time_series(tmp_path):
  f = tmp_path / 's.csv'
  f.write_text('x\n1.0\n2.0\n3.0\n')
  s = read_time_series(str(f), 2)
  assert s.n == 1 and s.presample.tolist() == [2.0, 1.0]
  with pytest.raises(InputError, match='series too short'):
    read_time_series(str(f), 3)
  p = tmp_path / 'p.csv'
  p.write_text('x\n0.5\n')
  assert read_time_series(str(f), 1, str(p)).n == 3
  bad = tmp_path / 'bad.csv'
  bad.write_text('x\n1.0\nabc\n')
  with pytest.raises(InputError, match='line 3'):
    read_time_series(str(bad), 1)
