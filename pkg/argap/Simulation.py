# -*- coding: utf-8 -*-

import time
import logging
import numpy as np
from dataclasses import dataclass, field, replace
from argap.Filter import Filter, stable_mask
from argap.Mixture import TimeSeries, EMConfig
from argap.Sampler import sample_uniform_stable_filters, load_or_estimate_weights
from argap.GapStat import ReferenceCurve, select_number_of_modes
from argap.Errors import InputError, NumericalError
from tools.Tools import child_seed, write_csv, write_json

IID = 'iid_multinomial'
SEGMENTED = 'segmented'
BURN_IN = 100
OVERFLOW = 1e6
MAX_REDRAWS = 100   ### scenario draws per replication before giving up on a bounded series
SERIES_LENGTH = 1400
METHODS = ('gap', 'aic', 'bic')

### scenario id -> (true M, lag, switching)
SCENARIOS = {
  1: (4, 2, (IID, (0.25, 0.25, 0.25, 0.25), 0)),
  2: (2, 4, (IID, (0.4, 0.6), 0)),
  3: (7, 1, (SEGMENTED, (), 7)),
}

##############################################################################################################
### types ####################################################################################################
##############################################################################################################
@dataclass(frozen=True)
class SwitchingSpec():
  kind: str
  mode_probabilities: tuple = ()
  n_segments: int = 0

  def __post_init__(self):
    if self.kind == IID:
      p = np.asarray(self.mode_probabilities, dtype=float)
      if p.size < 1 or np.any(p < 0.0) or abs(np.sum(p) - 1.0) > 1e-12:
        raise ValueError('mode probabilities must be >= 0 and sum to 1: {}'.format(self.mode_probabilities))
      object.__setattr__(self, 'mode_probabilities', tuple(float(v) for v in p))
    elif self.kind == SEGMENTED:
      if self.n_segments < 1:
        raise ValueError('n_segments must be >= 1 (found {})'.format(self.n_segments))
    else:
      raise ValueError('unknown switching kind {}'.format(self.kind))


@dataclass(frozen=True, eq=False)
class ScenarioTruth():
  true_m: int
  lag: int
  filters: tuple
  switching: SwitchingSpec
  sigma2: float = 1.0
  n: int = SERIES_LENGTH

  def __post_init__(self):
    filters = tuple(f if isinstance(f, Filter) else Filter(f) for f in self.filters)
    if len(filters) != self.true_m:
      raise ValueError('{} filters for true_m={}'.format(len(filters), self.true_m))
    if any(f.length != self.lag for f in filters):
      raise ValueError('all filters must have length {}'.format(self.lag))
    if not np.all(stable_mask(np.stack([f.coefficients for f in filters]))):
      raise ValueError('scenario filters must be stable')
    if self.switching.kind == IID and len(self.switching.mode_probabilities) != self.true_m:
      raise ValueError('{} mode probabilities for true_m={}'.format(len(self.switching.mode_probabilities), self.true_m))
    if self.sigma2 < 0.0 or self.n < 1:
      raise ValueError('need sigma2 >= 0 and n >= 1')
    object.__setattr__(self, 'filters', filters)

  def to_dict(self):
    return {'true_m': self.true_m, 'lag': self.lag, 'filters': [f.to_list() for f in self.filters], 'switching': {'kind': self.switching.kind, 'mode_probabilities': list(self.switching.mode_probabilities), 'n_segments': self.switching.n_segments}, 'sigma2': self.sigma2, 'n': self.n}


##############################################################################################################
### generation ###############################################################################################
##############################################################################################################
def draw_mode_sequence(switching, n, M, rng):
  ### mode index of every observation x_1..x_n
  if switching.kind == IID:
    cdf = np.cumsum(switching.mode_probabilities)
    return np.minimum(np.searchsorted(cdf, rng.random(n), side='right'), M-1)
  size = n // switching.n_segments
  seg = np.minimum(np.arange(n) // max(size, 1), switching.n_segments-1) ### remainder goes to the last segment
  return seg % M

def is_bounded(x):
  return bool(np.max(np.abs(x)) < OVERFLOW)

def generate_tvar(truth, rng_seed=None, presample=None, burn_in=None, return_modes=False):
  """x_n = phi_n^T (x_{n-1}..x_{n-L}) + e_n with phi_n picked by the switching rule.
  presample (chronological x_{1-L}..x_0) defaults to standard normals followed by burn_in steps
  (BURN_IN when drawn, 0 when given) under the mode of the first observation."""
  rng = np.random.default_rng(rng_seed)
  L, N = truth.lag, truth.n
  if presample is None:
    z0 = rng.standard_normal(L)
    burn_in = BURN_IN if burn_in is None else burn_in
  else:
    z0 = np.asarray(presample, dtype=float).reshape(-1)
    if z0.size != L:
      raise ValueError('presample needs {} values (found {})'.format(L, z0.size))
    burn_in = 0 if burn_in is None else burn_in
  modes = draw_mode_sequence(truth.switching, N, truth.true_m, rng)
  noise = rng.standard_normal(burn_in + N) * np.sqrt(truth.sigma2)
  G = np.stack([f.coefficients for f in truth.filters]) #[M,L]
  phi = np.concatenate((np.full(burn_in, modes[0]), modes))
  z = np.concatenate((z0, np.zeros(burn_in + N)))
  with np.errstate(over='ignore', invalid='ignore'):
    for t in range(burn_in + N):
      z[L+t] = G[phi[t]] @ z[t:t+L][::-1] + noise[t]
  x = z[L+burn_in:]
  if not np.all(np.isfinite(x)):
    raise NumericalError('generated series overflows (switching among the filters is unstable)')
  if not is_bounded(x):
    logging.warning('generated series reaches |x| = {:.3e}'.format(np.max(np.abs(x))))
  series = TimeSeries(z[burn_in:L+burn_in][::-1], x, L)
  return (series, modes) if return_modes else series

def make_scenario(scenario, rng_seed=0, weights=None, sigma2=1.0, n=SERIES_LENGTH):
  if scenario not in SCENARIOS:
    raise InputError('unknown scenario {} (use 1, 2 or 3)'.format(scenario))
  M, L, (kind, probs, segments) = SCENARIOS[scenario]
  weights = weights or load_or_estimate_weights(L)
  psi = sample_uniform_stable_filters(L, M, weights, rng_seed)
  return ScenarioTruth(M, L, tuple(Filter(p) for p in psi), SwitchingSpec(kind, probs, segments), sigma2, n)

def draw_replication(scenario, rng_seed, weights=None, sigma2=1.0, n=SERIES_LENGTH, max_redraws=MAX_REDRAWS):
  """Scenario truth and series of one replication, returned with the number of discarded draws.
  Draw k takes its filters from sub-stream (0, k) and its series from (1, k) of rng_seed. A draw whose
  series reaches OVERFLOW is discarded: each filter is stable but switching among them need not be."""
  for k in range(max_redraws):
    truth = make_scenario(scenario, child_seed(rng_seed, 0, k), weights, sigma2, n)
    try:
      series = generate_tvar(truth, child_seed(rng_seed, 1, k))
    except NumericalError:
      series = None
    if series is not None and is_bounded(series.observations):
      return truth, series, k
    logging.info('Scenario {} draw {} is unbounded: redrawing'.format(scenario, k))
  raise NumericalError('no bounded series for scenario {} after {} draws'.format(scenario, max_redraws))


##############################################################################################################
### experiment ###############################################################################################
##############################################################################################################
@dataclass
class ExperimentTable():
  scenario: int
  true_m: int
  m_max: int
  selections: dict = field(default_factory=lambda: {m: [] for m in METHODS})
  replications: list = field(default_factory=list) ### scenario truth and discarded draws per replication

  @property
  def n_replications(self):
    return len(self.selections['gap'])

  def add(self, gap_m, aic_m, bic_m, truth=None, redraws=0):
    for m, v in zip(METHODS, (gap_m, aic_m, bic_m)):
      self.selections[m].append(int(v))
    if truth is not None:
      self.replications.append({'truth': truth.to_dict(), 'redraws': int(redraws)})

  def counts(self, method):
    ### histogram over M = 1..m_max
    return np.bincount(np.asarray(self.selections[method], dtype=int) - 1, minlength=self.m_max)[:self.m_max]

  def accuracy(self, method):
    if self.n_replications == 0:
      return 0.0
    return float(np.mean(np.asarray(self.selections[method]) == self.true_m))

  def modal(self, method):
    return int(np.argmax(self.counts(method))) + 1

  def to_rows(self):
    rows = []
    for method in METHODS:
      for M, c in enumerate(self.counts(method), start=1):
        rows.append([self.scenario, method, M, int(c), ''])
      rows.append([self.scenario, method, 'all', self.n_replications, repr(self.accuracy(method))])
    return rows

  def to_dict(self):
    return {'scenario': self.scenario, 'true_m': self.true_m, 'm_max': self.m_max, 'n_replications': self.n_replications,
            'methods': {m: {'counts': self.counts(m).tolist(), 'accuracy': self.accuracy(m), 'modal': self.modal(m), 'selections': list(self.selections[m])} for m in METHODS},
            'replications': list(self.replications)}

  def write(self, fname, format='csv'):
    if format == 'json':
      write_json(fname, self.to_dict())
    else:
      write_csv(fname, ['scenario', 'method', 'selected_m', 'count', 'accuracy'], self.to_rows(), {'true_m': self.true_m, 'm_max': self.m_max})


def run_experiment(scenario, n_replications, em_restarts, m_max, rng_seed, reference, weights=None, sigma2=1.0, em_config=None, device='cpu', mspe='weighted'):
  if scenario not in SCENARIOS:
    raise InputError('unknown scenario {} (use 1, 2 or 3)'.format(scenario))
  true_m, L, _ = SCENARIOS[scenario]
  m_max = m_max or reference.m_max
  if reference.lag != L:
    raise InputError('scenario {} needs a reference curve for lag {} (found lag {})'.format(scenario, L, reference.lag))
  if m_max < true_m:
    raise InputError('m_max={} is below the true number of modes {}'.format(m_max, true_m))
  if reference.m_max < m_max:
    raise InputError('reference curve has {} points, m_max={}'.format(reference.m_max, m_max))
  if reference.m_max > m_max:
    reference = ReferenceCurve(reference.lag, m_max, reference.values[:m_max], reference.n_filters, reference.n_instances, reference.seed, None, reference.std[:m_max])
  cfg = replace(em_config or EMConfig(), n_restarts=em_restarts)
  weights = weights or load_or_estimate_weights(L)
  table = ExperimentTable(scenario, true_m, m_max)
  tic = time.time()
  for r in range(n_replications):
    truth, series, redraws = draw_replication(scenario, child_seed(rng_seed, r), weights, sigma2)
    res = select_number_of_modes(series, reference, cfg, child_seed(rng_seed, r, 2), device, mspe=mspe)
    table.add(res.selected_m, res.aic_m, res.bic_m, truth, redraws)
    logging.info('Scenario {} replication {}/{}: gap={} aic={} bic={} (true {})'.format(scenario, r+1, n_replications, res.selected_m, res.aic_m, res.bic_m, true_m))
  logging.info('Scenario {} accuracy gap={:.3f} aic={:.3f} bic={:.3f} sec: {:.2f}'.format(scenario, table.accuracy('gap'), table.accuracy('aic'), table.accuracy('bic'), time.time()-tic))
  return table
