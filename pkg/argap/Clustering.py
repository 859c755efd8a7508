# -*- coding: utf-8 -*-

import logging
import itertools
import numpy as np
from scipy.special import comb
from dataclasses import dataclass
from argap.Filter import Filter, distance_matrix
from argap.Errors import InvalidM
from tools.Tools import child_rng, fmt, write_csv

IMPROVE_TOL = 1e-12
EXHAUSTIVE_LIMIT = 5000 ### subsets enumerated exactly below this many

##############################################################################################################
### DistanceTable ############################################################################################
##############################################################################################################
@dataclass(frozen=True, eq=False)
class DistanceTable():
  """entries[i][j] = D(filter_i, filter_j); row i holds filter i as the generator. Not symmetric."""
  entries: np.ndarray

  def __post_init__(self):
    e = np.array(self.entries, dtype=float)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
      raise ValueError('distance table must be square (found shape {})'.format(e.shape))
    if not np.all(np.isfinite(e)) or np.any(e < 0.0):
      raise ValueError('distance table entries must be finite and >= 0')
    if np.any(np.diag(e) != 0.0):
      raise ValueError('distance table diagonal must be exactly zero')
    e.setflags(write=False)
    object.__setattr__(self, 'entries', e)

  @property
  def n(self):
    return self.entries.shape[0]

  def write(self, fname):
    ### dense CSV, row i = distances from filter i
    write_csv(fname, ['d_{}'.format(j) for j in range(self.n)], [[fmt(v) for v in row] for row in self.entries])


@dataclass(frozen=True, eq=False)
class ClusteringResult():
  medoid_indices: tuple   ### ascending
  assignments: np.ndarray ### position in medoid_indices for every point
  wcsd: float
  restart_index: int = 0

  @property
  def M(self):
    return len(self.medoid_indices)


##############################################################################################################
### distances ################################################################################################
##############################################################################################################
def pairwise_distances(filters, sigma2=1.0):
  if len(filters) and isinstance(filters[0], Filter):
    lengths = set(f.length for f in filters)
    if len(lengths) > 1:
      raise ValueError('filters of different lengths: {}'.format(sorted(lengths)))
    psi = np.stack([f.coefficients for f in filters])
  else:
    psi = np.atleast_2d(np.asarray(filters, dtype=float))
  logging.debug('Computing {}x{} distance table'.format(psi.shape[0], psi.shape[0]))
  return DistanceTable(distance_matrix(psi, sigma2))


##############################################################################################################
### k-medoids (build + swap) #################################################################################
##############################################################################################################
def assign(entries, medoids):
  ### nearest medoid with the medoid as generator: argmin_m D(medoid_m, point), ties to the lowest medoid index
  medoids = np.sort(np.asarray(medoids, dtype=int))
  sub = entries[medoids] #[M,n]
  labels = np.argmin(sub, axis=0)
  labels[medoids] = np.arange(medoids.size)
  cost = sub[labels, np.arange(entries.shape[1])]
  return medoids, labels, float(np.sum(cost))

def _build(entries, M, first, init=None):
  ### greedy farthest-point completion of the initial medoids
  medoids = list(init) if init is not None else [first]
  cost = np.min(entries[medoids], axis=0)
  while len(medoids) < M:
    sel = cost.copy()
    sel[medoids] = -np.inf
    nxt = int(np.argmax(sel))
    medoids.append(nxt)
    cost = np.minimum(cost, entries[nxt])
  return np.sort(np.array(medoids, dtype=int))

def _swap(entries, medoids):
  medoids = medoids.copy()
  n = entries.shape[0]
  M = medoids.size
  ar = np.arange(n)
  n_swaps = 0
  while True:
    sub = entries[medoids] #[M,n]
    order = np.argsort(sub, axis=0, kind='stable')
    nearest = order[0]
    d1 = sub[nearest, ar]
    d2 = sub[order[1], ar] if M > 1 else np.full(n, np.inf)
    current = float(np.sum(d1))
    best = current
    best_swap = None
    for i in range(M):
      base = np.where(nearest == i, d2, d1) #[n] cost of every point once medoid i leaves
      totals = np.sum(np.minimum(entries, base[None, :]), axis=1) #[n] objective after bringing in candidate h
      totals[medoids] = np.inf
      h = int(np.argmin(totals))
      if totals[h] < best - IMPROVE_TOL*(1.0 + abs(best)):
        best = float(totals[h])
        best_swap = (i, h)
    if best_swap is None:
      break
    medoids[best_swap[0]] = best_swap[1]
    medoids = np.sort(medoids)
    n_swaps += 1
  logging.debug('PAM swap converged after {} swaps (wcsd={:.6f})'.format(n_swaps, current))
  return medoids

def exhaustive(entries, M):
  ### every subset of M medoids; lexicographic order so ties keep the first subset
  n = entries.shape[0]
  best = None
  for combo in itertools.combinations(range(n), M):
    cost = float(np.sum(np.min(entries[list(combo)], axis=0)))
    if best is None or cost < best[1]:
      best = (combo, cost)
  return assign(entries, np.array(best[0], dtype=int))

def k_medoids(table, M, rng_seed=0, n_restarts=20, init_medoids=None, exhaustive_limit=EXHAUSTIVE_LIMIT):
  """PAM build+swap minimising sum_m sum_{y in C_m} D(medoid_m, y), best of n_restarts random starts.
  init_medoids (fewer than M indices) adds one warm start, evaluated first so it wins ties.
  Problems with at most exhaustive_limit medoid subsets are solved exactly (restart_index -2)."""
  entries = table.entries
  n = entries.shape[0]
  if not 1 <= M <= n:
    raise InvalidM('M must lie in [1, {}] (found {})'.format(n, M))
  if n_restarts < 1:
    raise ValueError('n_restarts must be >= 1 (found {})'.format(n_restarts))
  if M == n:
    medoids, labels, wcsd = assign(entries, np.arange(n))
    return ClusteringResult(tuple(medoids.tolist()), labels, wcsd, 0)
  if comb(n, M, exact=True) <= exhaustive_limit:
    medoids, labels, wcsd = exhaustive(entries, M)
    logging.debug('k-medoids M={} wcsd={} (exhaustive)'.format(M, wcsd))
    return ClusteringResult(tuple(medoids.tolist()), labels, wcsd, -2)

  starts = []
  if init_medoids is not None and 0 < len(init_medoids) <= M:
    starts.append((-1, _build(entries, M, None, init=init_medoids)))
  for r in range(n_restarts):
    first = int(child_rng(rng_seed, r).integers(n))
    starts.append((r, _build(entries, M, first)))

  best = None
  for r, start in starts:
    medoids, labels, wcsd = assign(entries, _swap(entries, start))
    if best is None or wcsd < best.wcsd:
      best = ClusteringResult(tuple(medoids.tolist()), labels, wcsd, r)
  logging.debug('k-medoids M={} wcsd={} (restart {})'.format(M, best.wcsd, best.restart_index))
  return best
