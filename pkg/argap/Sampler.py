# -*- coding: utf-8 -*-

import os
import json
import math
import logging
import numpy as np
from dataclasses import dataclass
from scipy.special import comb
from argap.Filter import Filter, RootSet, stable_mask
from argap.Errors import RejectionBudgetExceeded

MAX_PROPOSALS = 10**7   ### proposals without a single acceptance before giving up
PROPOSAL_BATCH = 20000
VOLUME_CHUNK = 100000
MAX_ORDER = 8
MAX_MODULUS = 1.0 - 1e-12

##############################################################################################################
### ConfigurationWeights #####################################################################################
##############################################################################################################
@dataclass(frozen=True, eq=False)
class ConfigurationWeights():
  order: int
  volumes: np.ndarray          ### Vol(R_L^(c)) for c = 0..L//2
  standard_errors: np.ndarray
  n_samples: int
  seed: int = 0

  def __post_init__(self):
    v = np.array(self.volumes, dtype=float).reshape(-1)
    se = np.array(self.standard_errors, dtype=float).reshape(-1)
    if v.size != self.order//2 + 1 or se.size != v.size:
      raise ValueError('order {} needs {} configuration volumes (found {})'.format(self.order, self.order//2 + 1, v.size))
    if np.any(v < 0.0) or not np.any(v > 0.0):
      raise ValueError('configuration volumes must be >= 0 with one > 0: {}'.format(v))
    v.setflags(write=False)
    se.setflags(write=False)
    object.__setattr__(self, 'volumes', v)
    object.__setattr__(self, 'standard_errors', se)

  @property
  def weights(self):
    return self.volumes / np.sum(self.volumes)

  @property
  def total_volume(self):
    return float(np.sum(self.volumes))

  def to_dict(self):
    return {'order': self.order, 'n_samples': self.n_samples, 'seed': self.seed, 'volumes': self.volumes.tolist(), 'standard_errors': self.standard_errors.tolist()}

  @classmethod
  def from_dict(cls, d):
    return cls(int(d['order']), d['volumes'], d['standard_errors'], int(d['n_samples']), int(d['seed']))


##############################################################################################################
### root-domain draws ########################################################################################
##############################################################################################################
def _propose(L, c, size, rng):
  ### uniform on C_1^c x S_1^(L-2c); returns (x,y) pairs [size,c,2] and reals [size,L-2c]
  r = np.sqrt(rng.random((size, c)))
  theta = 2.0 * np.pi * rng.random((size, c))
  pairs = np.stack((r*np.cos(theta), r*np.sin(theta)), axis=-1)
  reals = rng.uniform(-1.0, 1.0, size=(size, L - 2*c))
  return pairs, reals

def _expand(pairs, reals):
  ### [size,L] complex roots: (x-jy, x+jy) per pair then the reals
  size, c = pairs.shape[0], pairs.shape[1]
  z = pairs[..., 0] + 1j*pairs[..., 1] #[size,c]
  conj = np.stack((np.conj(z), z), axis=-1).reshape(size, 2*c)
  return np.concatenate((conj, reals.astype(complex)), axis=1)

def vandermonde_abs(a):
  ### |prod_{u<v} (a_v - a_u)| for a batch of root lists [size,L]
  L = a.shape[1]
  if L < 2:
    return np.ones(a.shape[0])
  iu, iv = np.triu_indices(L, 1)
  return np.prod(np.abs(a[:, iv] - a[:, iu]), axis=1)

def poly_coefficients(a):
  ### psi [size,L] of z^L - sum psi_l z^{L-l} = prod_l (z - a_l)
  size, L = a.shape
  p = np.zeros((size, L+1), dtype=complex)
  p[:, 0] = 1.0
  for l in range(L):
    p[:, 1:l+2] = p[:, 1:l+2] - a[:, l:l+1] * p[:, 0:l+1]
  return -p[:, 1:].real

def estimate_configuration_volumes(L, n_samples, rng_seed=0):
  if L < 1:
    raise ValueError('L must be >= 1 (found {})'.format(L))
  if n_samples < 1000:
    raise ValueError('n_samples must be >= 1000 (found {})'.format(n_samples))
  rng = np.random.default_rng(rng_seed)
  volumes = []
  errors = []
  for c in range(L//2 + 1):
    scale = math.pi**c * 2.0**(L - 2*c) / (math.factorial(c) * math.factorial(L - 2*c))
    s1 = 0.0
    s2 = 0.0
    for s in range(0, n_samples, VOLUME_CHUNK):
      size = min(VOLUME_CHUNK, n_samples - s)
      v = vandermonde_abs(_expand(*_propose(L, c, size, rng)))
      s1 += np.sum(v)
      s2 += np.sum(v*v)
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean*mean, 0.0) * n_samples / (n_samples - 1)
    volumes.append(scale * mean)
    errors.append(scale * math.sqrt(var / n_samples))
    logging.debug('Vol(R_{}^({})) ~ {:.6f} +- {:.6f}'.format(L, c, volumes[-1], errors[-1]))
  logging.info('Estimated configuration volumes L={} n_samples={}: {}'.format(L, n_samples, ' '.join('{:.5f}'.format(v) for v in volumes)))
  return ConfigurationWeights(L, volumes, errors, n_samples, int(rng_seed) if isinstance(rng_seed, (int, np.integer)) else 0)

def _sample_root_arrays(L, c, count, rng, max_proposals=MAX_PROPOSALS):
  ### joint rejection with density ~ |Vandermonde| <= 2^(L(L-1)/2); returns pairs [count,c,2] (y>0), reals [count,L-2c]
  bound = 2.0**(L*(L-1)/2)
  got_pairs = []
  got_reals = []
  n_got = 0
  dry = 0
  while n_got < count:
    pairs, reals = _propose(L, c, PROPOSAL_BATCH, rng)
    a = _expand(pairs, reals)
    ok = (rng.random(PROPOSAL_BATCH) * bound < vandermonde_abs(a)) & np.all(np.abs(a) < MAX_MODULUS, axis=1)
    if c:
      ok &= np.all(pairs[..., 1] != 0.0, axis=1)
    if not np.any(ok):
      dry += PROPOSAL_BATCH
      if dry >= max_proposals:
        raise RejectionBudgetExceeded('no root set accepted for L={} c={} after {} proposals'.format(L, c, dry))
      continue
    dry = 0
    got_pairs.append(pairs[ok])
    got_reals.append(reals[ok])
    n_got += int(np.sum(ok))
  pairs = np.concatenate(got_pairs)[:count]
  pairs[..., 1] = np.abs(pairs[..., 1])
  return pairs, np.concatenate(got_reals)[:count]

def sample_roots(L, c, rng_seed=None, max_proposals=MAX_PROPOSALS):
  if not 0 <= c <= L//2:
    raise ValueError('c must lie in [0, {}] (found {})'.format(L//2, c))
  rng = np.random.default_rng(rng_seed)
  pairs, reals = _sample_root_arrays(L, c, 1, rng, max_proposals)
  return RootSet([tuple(p) for p in pairs[0]], reals[0].tolist(), L)

def sample_uniform_stable_filters(L, count, weights, rng_seed=None, max_proposals=MAX_PROPOSALS):
  ### count filters uniform on R_L: c ~ multinomial(weights), roots ~ |Vandermonde|, coefficients from roots
  if weights.order != L:
    raise ValueError('configuration weights are for L={} not L={}'.format(weights.order, L))
  rng = np.random.default_rng(rng_seed)
  psi = np.zeros((count, L))
  if count == 0:
    return psi
  w = weights.weights
  configs = np.flatnonzero(w > 0.0)
  cs = configs[rng.choice(configs.size, size=count, p=w[configs] / np.sum(w[configs]))]
  for c in configs:
    idx = np.flatnonzero(cs == c)
    if idx.size == 0:
      continue
    pairs, reals = _sample_root_arrays(L, int(c), idx.size, rng, max_proposals)
    psi[idx] = poly_coefficients(_expand(pairs, reals))
  if not np.all(stable_mask(psi)):
    raise RejectionBudgetExceeded('sampled roots produced {} unstable coefficient vectors'.format(int(np.sum(~stable_mask(psi)))))
  return psi

def sample_uniform_stable_filter(L, weights, rng_seed=None, max_proposals=MAX_PROPOSALS):
  return Filter(sample_uniform_stable_filters(L, 1, weights, rng_seed, max_proposals)[0])


##############################################################################################################
### coefficient-domain rejection #############################################################################
##############################################################################################################
def coefficient_box(L):
  ### |lambda_k| <= C(L,k) for monic degree-L polynomials with roots in the unit disk
  return np.array([comb(L, k, exact=True) for k in range(1, L+1)], dtype=float)

def sample_coefficient_rejection_batch(L, count, rng_seed=None, max_proposals=MAX_PROPOSALS):
  ### returns (psi [count,L], number of proposals)
  if not 1 <= L <= MAX_ORDER:
    raise ValueError('coefficient rejection needs 1 <= L <= {} (found {})'.format(MAX_ORDER, L))
  rng = np.random.default_rng(rng_seed)
  box = coefficient_box(L)
  got = []
  n_got = 0
  n_proposed = 0
  dry = 0
  while n_got < count:
    lam = rng.uniform(-1.0, 1.0, size=(PROPOSAL_BATCH, L)) * box[None, :]
    keep = np.flatnonzero(stable_mask(-lam))
    if keep.size == 0:
      n_proposed += PROPOSAL_BATCH
      dry += PROPOSAL_BATCH
      if dry >= max_proposals:
        raise RejectionBudgetExceeded('no stable coefficient vector for L={} after {} proposals'.format(L, dry))
      continue
    dry = 0
    keep = keep[:count - n_got]
    n_proposed += int(keep[-1]) + 1 if n_got + keep.size == count else PROPOSAL_BATCH ### up to the last kept sample
    got.append(-lam[keep])
    n_got += keep.size
  psi = np.concatenate(got) if got else np.zeros((0, L))
  return psi, n_proposed

def sample_coefficient_rejection(L, rng_seed=None, max_proposals=MAX_PROPOSALS):
  psi, _ = sample_coefficient_rejection_batch(L, 1, rng_seed, max_proposals)
  return Filter(psi[0])


##############################################################################################################
### volume cache #############################################################################################
##############################################################################################################
def default_volume_samples(L):
  return 10**6 if L <= 4 else 10**7

def cache_dir():
  return os.environ.get('ARGAP_CACHE_DIR', os.path.join(os.path.expanduser('~'), '.cache', 'argap'))

def load_or_estimate_weights(L, n_samples=None, seed=0, directory=None):
  n_samples = n_samples or default_volume_samples(L)
  directory = directory or cache_dir()
  fname = os.path.join(directory, 'volumes_L{}_n{}_s{}.json'.format(L, n_samples, seed))
  if os.path.isfile(fname):
    with open(fname, 'r') as f:
      weights = ConfigurationWeights.from_dict(json.load(f))
    logging.info('Read configuration volumes from {}'.format(fname))
    return weights
  weights = estimate_configuration_volumes(L, n_samples, seed)
  try:
    os.makedirs(directory, exist_ok=True)
    with open(fname, 'w') as f:
      json.dump(weights.to_dict(), f)
    logging.info('Cached configuration volumes in {}'.format(fname))
  except OSError as e:
    logging.warning('cannot write volume cache {}: {}'.format(fname, e))
  return weights
