# -*- coding: utf-8 -*-

import json
import math
import time
import logging
import numpy as np
from dataclasses import dataclass
from argap.Errors import InvalidM, LengthMismatch, InputError
from argap.Sampler import sample_uniform_stable_filters, load_or_estimate_weights
from argap.Clustering import pairwise_distances, k_medoids
from argap.Mixture import EMConfig, EMFitter, empirical_mspe, weighted_mspe, aic, bic
from tools.Tools import child_seed, fmt, read_table_csv, write_csv, write_json

MSPE_FLOOR = 1e-300
MONOTONE_TOL = 1e-9
TIE_TOL = 1e-12     ### gaps (or criteria) this close to the best count as tied
### prediction error of a fitted mixture: responsibility-weighted, or the best mode per sample
MSPE_MEASURES = {'weighted': weighted_mspe, 'min': empirical_mspe}

##############################################################################################################
### curves ###################################################################################################
##############################################################################################################
@dataclass(frozen=True, eq=False)
class ReferenceCurve():
  lag: int
  m_max: int
  values: np.ndarray        ### mean over instances of log W_M, M=1..m_max
  n_filters: int
  n_instances: int
  seed: int
  instance_values: np.ndarray = None ### [n_instances, m_max] when built here (not kept in files)
  std: np.ndarray = None
  centres: tuple = None              ### per instance, per M the [M,L] medoid coefficient vectors (built here only)

  def __post_init__(self):
    v = np.array(self.values, dtype=float).reshape(-1)
    if v.size != self.m_max or self.m_max < 1:
      raise ValueError('reference curve needs {} values (found {})'.format(self.m_max, v.size))
    if not np.all(np.isfinite(v)) or np.any(v < 0.0):
      raise ValueError('reference curve values must be finite and >= 0 (log W_M with W_M >= 1)')
    if np.any(np.diff(v) > MONOTONE_TOL):
      logging.warning('reference curve is not monotone non-increasing: {}'.format(v.tolist()))
    v.setflags(write=False)
    object.__setattr__(self, 'values', v)
    if self.std is None:
      object.__setattr__(self, 'std', np.zeros_like(v))
    else:
      object.__setattr__(self, 'std', np.array(self.std, dtype=float).reshape(-1))

  def to_dict(self):
    d = {'lag': self.lag, 'm_max': self.m_max, 'n_filters': self.n_filters, 'n_instances': self.n_instances, 'seed': self.seed, 'log_w_ref': self.values.tolist(), 'std': self.std.tolist()}
    if self.instance_values is not None:
      d['instances'] = np.asarray(self.instance_values).tolist()
    return d

  @classmethod
  def from_dict(cls, d):
    inst = d.get('instances')
    return cls(int(d['lag']), int(d['m_max']), d['log_w_ref'], int(d['n_filters']), int(d['n_instances']), int(d['seed']), None if inst is None else np.array(inst, dtype=float), d.get('std'))


@dataclass(frozen=True, eq=False)
class EmpiricalCurve():
  values: np.ndarray ### log(max(mspe, 1e-300)) per M
  mspe: np.ndarray
  sigma2: np.ndarray ### fitted sigma2 per M
  fits: tuple
  measure: str = 'weighted'

  @property
  def m_max(self):
    return self.values.size


@dataclass(frozen=True, eq=False)
class GapResult():
  log_w_ref: np.ndarray
  empirical: np.ndarray
  gaps: np.ndarray
  selected_m: int
  aic_m: int = None
  bic_m: int = None
  reference: ReferenceCurve = None
  curve: EmpiricalCurve = None
  aic_values: np.ndarray = None
  bic_values: np.ndarray = None

  @property
  def lag(self):
    return None if self.reference is None else self.reference.lag

  def rows(self):
    M = np.arange(1, self.gaps.size+1)
    header = ['M', 'log_w_ref', 'log_mspe_emp', 'gap']
    cols = [M.tolist(), [fmt(v) for v in self.log_w_ref], [fmt(v) for v in self.empirical], [fmt(v) for v in self.gaps]]
    if self.curve is not None:
      header += ['mspe', 'sigma2']
      cols += [[fmt(v) for v in self.curve.mspe], [fmt(v) for v in self.curve.sigma2]]
    if self.aic_values is not None:
      header += ['aic', 'bic']
      cols += [[fmt(v) for v in self.aic_values], [fmt(v) for v in self.bic_values]]
    return header, [list(r) for r in zip(*cols)]

  def to_dict(self):
    d = {'selected_m': self.selected_m, 'aic_m': self.aic_m, 'bic_m': self.bic_m, 'lag': self.lag, 'log_w_ref': self.log_w_ref.tolist(), 'log_mspe_emp': self.empirical.tolist(), 'gap': self.gaps.tolist()}
    if self.curve is not None:
      d['mspe'] = self.curve.mspe.tolist()
      d['mspe_measure'] = self.curve.measure
      d['sigma2'] = self.curve.sigma2.tolist()
      d['models'] = [f.model.to_dict() for f in self.curve.fits]
    if self.aic_values is not None:
      d['aic'] = self.aic_values.tolist()
      d['bic'] = self.bic_values.tolist()
    return d


##############################################################################################################
### reference curve ##########################################################################################
##############################################################################################################
def reference_instance(L, m_max, F, rng_seed, weights, n_restarts=20, sigma2=1.0, return_centres=False):
  ### log W_M for M=1..m_max on one draw of F uniform stable filters (and the medoid filters of every M)
  psi = sample_uniform_stable_filters(L, F, weights, child_seed(rng_seed, 0))
  table = pairwise_distances(psi, sigma2)
  values = np.empty(m_max)
  centres = []
  prev = None
  for M in range(1, m_max+1):
    res = k_medoids(table, M, child_seed(rng_seed, 1, M), n_restarts, init_medoids=prev)
    values[M-1] = math.log(res.wcsd / F + 1.0)
    centres.append(psi[list(res.medoid_indices)])
    prev = res.medoid_indices
  return (values, tuple(centres)) if return_centres else values

def reference_curve(L, m_max, F, n_instances, rng_seed=0, weights=None, n_restarts=20, sigma2=1.0):
  if m_max < 1:
    raise InvalidM('m_max must be >= 1 (found {})'.format(m_max))
  if F < m_max:
    raise InvalidM('need at least m_max={} filters (found {})'.format(m_max, F))
  if n_instances < 1:
    raise ValueError('n_instances must be >= 1 (found {})'.format(n_instances))
  weights = weights or load_or_estimate_weights(L)
  tic = time.time()
  inst = np.empty((n_instances, m_max))
  centres = []
  for i in range(n_instances):
    inst[i], c = reference_instance(L, m_max, F, child_seed(rng_seed, i), weights, n_restarts, sigma2, return_centres=True)
    centres.append(c)
    logging.info('Reference instance {}/{} L={} F={}: {}'.format(i+1, n_instances, L, F, ' '.join('{:.4f}'.format(v) for v in inst[i])))
  values = inst.mean(axis=0)
  std = inst.std(axis=0, ddof=1) if n_instances > 1 else np.zeros(m_max)
  logging.info('Reference curve L={} m_max={} F={} instances={} sec: {:.2f}'.format(L, m_max, F, n_instances, time.time()-tic))
  return ReferenceCurve(L, m_max, values, F, n_instances, int(rng_seed), inst, std, tuple(centres))


##############################################################################################################
### empirical curve ##########################################################################################
##############################################################################################################
def empirical_curve(series, m_max, em_config=None, rng_seed=0, device='cpu', log_dir=None, mspe='weighted'):
  if m_max < 1:
    raise InvalidM('m_max must be >= 1 (found {})'.format(m_max))
  if mspe not in MSPE_MEASURES:
    raise InputError('unknown mspe measure {} (use {})'.format(mspe, ' or '.join(MSPE_MEASURES)))
  fitter = EMFitter(em_config or EMConfig(), device, log_dir)
  fits = []
  err = np.empty(m_max)
  for M in range(1, m_max+1):
    fit = fitter.fit(series, M, child_seed(rng_seed, M))
    fits.append(fit)
    err[M-1] = MSPE_MEASURES[mspe](fit.model, series, device)
    logging.info('Empirical M={} mspe({})={:.6g} sigma2={:.6g} loglik={:.4f}'.format(M, mspe, err[M-1], fit.model.sigma2, fit.log_likelihood))
  values = np.log(np.maximum(err, MSPE_FLOOR))
  sigma2 = np.array([f.model.sigma2 for f in fits])
  return EmpiricalCurve(values, err, sigma2, tuple(fits), mspe)


##############################################################################################################
### selection ################################################################################################
##############################################################################################################
def select_m_gap(reference, empirical):
  ### gap(M) = log W_M - log MSPE_M, argmax with ties to the smallest M
  ref = reference.values if isinstance(reference, ReferenceCurve) else np.asarray(reference, dtype=float)
  emp = empirical.values if isinstance(empirical, EmpiricalCurve) else np.asarray(empirical, dtype=float)
  if ref.size != emp.size:
    raise LengthMismatch('reference curve has {} points, empirical curve {}'.format(ref.size, emp.size))
  gaps = ref - emp
  return GapResult(ref.copy(), emp.copy(), gaps, first_max(gaps),
                   reference=reference if isinstance(reference, ReferenceCurve) else None,
                   curve=empirical if isinstance(empirical, EmpiricalCurve) else None)

def first_max(values):
  ### 1-based index of the first value within TIE_TOL (relative) of the maximum
  v = np.asarray(values, dtype=float)
  top = np.max(v)
  return int(np.flatnonzero(v >= top - TIE_TOL*max(1.0, abs(top)))[0]) + 1

def select_m_by_criterion(values):
  return first_max(-np.asarray(values, dtype=float))

def select_m_aic(fits):
  return select_m_by_criterion([aic(f) for f in fits])

def select_m_bic(fits):
  return select_m_by_criterion([bic(f) for f in fits])

def select_number_of_modes(series, reference, em_config=None, rng_seed=0, device='cpu', log_dir=None, mspe='weighted'):
  if reference.lag != series.lag:
    raise InputError('reference curve lag {} does not match series lag {}'.format(reference.lag, series.lag))
  curve = empirical_curve(series, reference.m_max, em_config, rng_seed, device, log_dir, mspe)
  res = select_m_gap(reference, curve)
  a = np.array([aic(f) for f in curve.fits])
  b = np.array([bic(f) for f in curve.fits])
  res = GapResult(res.log_w_ref, res.empirical, res.gaps, res.selected_m, select_m_by_criterion(a), select_m_by_criterion(b), reference, curve, a, b)
  logging.info('Selected M: gap={} aic={} bic={}'.format(res.selected_m, res.aic_m, res.bic_m))
  return res


##############################################################################################################
### files ####################################################################################################
##############################################################################################################
def write_reference_curve(fname, ref, format='csv'):
  if format == 'json':
    write_json(fname, ref.to_dict())
    return
  meta = {'lag': ref.lag, 'filters': ref.n_filters, 'instances': ref.n_instances, 'seed': ref.seed}
  rows = [[M, fmt(v), fmt(s)] for M, v, s in zip(range(1, ref.m_max+1), ref.values, ref.std)]
  write_csv(fname, ['M', 'log_w_ref', 'std'], rows, meta)

def write_reference_centres(fname, ref):
  ### one row per medoid filter: instance, M, psi_1..psi_L
  if ref.centres is None:
    raise ValueError('reference curve carries no cluster centres (only curves built by reference_curve do)')
  rows = []
  for i, per_m in enumerate(ref.centres):
    for M, psi in enumerate(per_m, start=1):
      rows.extend([i, M] + [fmt(v) for v in p] for p in psi)
  write_csv(fname, ['instance', 'M'] + ['psi_{}'.format(l) for l in range(1, ref.lag+1)], rows, {'lag': ref.lag, 'filters': ref.n_filters, 'instances': ref.n_instances, 'seed': ref.seed})

def read_reference_curve(fname):
  if fname.endswith('.json'):
    try:
      with open(fname, 'r') as f:
        return ReferenceCurve.from_dict(json.load(f))
    except (OSError, ValueError, KeyError) as e:
      raise InputError('cannot read reference curve {}: {}'.format(fname, e))
  meta, header, rows = read_table_csv(fname)
  for col in ('M', 'log_w_ref'):
    if col not in header:
      raise InputError('missing column "{}" in header of {}'.format(col, fname))
  if 'lag' not in meta:
    raise InputError('missing "# lag=..." line in {}'.format(fname))
  iM, iv = header.index('M'), header.index('log_w_ref')
  istd = header.index('std') if 'std' in header else None
  values = []
  std = []
  for nline, fields in rows:
    try:
      M = int(fields[iM])
      values.append(float(fields[iv]))
      std.append(float(fields[istd]) if istd is not None else 0.0)
    except ValueError:
      raise InputError('not a number in {}'.format(fname), nline)
    if M != len(values):
      raise InputError('expected M={} found {} in {}'.format(len(values), M, fname), nline)
  if not values:
    raise InputError('empty reference curve {}'.format(fname))
  try:
    return ReferenceCurve(int(meta['lag']), len(values), values, int(meta.get('filters', 0)), int(meta.get('instances', 0)), int(meta.get('seed', 0)), None, std)
  except ValueError as e:
    raise InputError('bad reference curve {}: {}'.format(fname, e))

def write_gap_result(fname, res, format='json', meta=None):
  meta = dict(meta or {})
  if format == 'json':
    d = res.to_dict()
    d.update(meta)
    write_json(fname, d)
    return
  header, rows = res.rows()
  meta.update({'lag': res.lag, 'selected_m': res.selected_m, 'aic_m': res.aic_m, 'bic_m': res.bic_m})
  write_csv(fname, header, rows, meta)
