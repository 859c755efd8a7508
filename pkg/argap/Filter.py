# -*- coding: utf-8 -*-

import json
import logging
import numpy as np
from dataclasses import dataclass
from scipy.integrate import trapezoid
from scipy.linalg import toeplitz
from argap.Errors import NotStable, RootFindingFailure, UnstableGenerator

COEF_IMAG_TOL = 1e-12    ### imaginary leftovers of coefficients built from conjugate-closed roots
REAL_ROOT_TOL = 1e-9     ### |imag| below this means a real root
UNIT_CIRCLE_TOL = 1e-12  ### roots with modulus >= 1-tol are not stable
DEGENERATE_TOL = 1e-7    ### a_k ~ 0 or a_k ~ a_l
DEGENERATE_QUAD_POINTS = 16384
RESIDUE_IMAG_TOL = 1e-8
NEGATIVE_TOL = 1e-10
QUAD_CHUNK = 64          ### predictors per quadrature block (memory bound)

##############################################################################################################
### Filter ###################################################################################################
##############################################################################################################
@dataclass(frozen=True, eq=False)
class Filter():
  """AR filter psi_1..psi_L: x_n = sum_l psi_l x_{n-l} + e_n."""
  coefficients: np.ndarray

  def __post_init__(self):
    c = np.array(self.coefficients, dtype=float).reshape(-1)
    if c.size < 1:
      raise ValueError('a filter needs at least one coefficient')
    if not np.all(np.isfinite(c)):
      raise ValueError('non-finite filter coefficients: {}'.format(c))
    c.setflags(write=False)
    object.__setattr__(self, 'coefficients', c)

  @property
  def length(self):
    return self.coefficients.size

  def __len__(self):
    return self.coefficients.size

  def __eq__(self, other):
    return isinstance(other, Filter) and np.array_equal(self.coefficients, other.coefficients)

  def __hash__(self):
    return hash(tuple(self.coefficients.tolist()))

  def is_stable(self):
    return is_stable(self.coefficients)

  def roots(self):
    return coefficients_to_roots(self)

  @classmethod
  def from_roots(cls, roots):
    return roots_to_coefficients(roots)

  def to_list(self):
    return self.coefficients.tolist()

  def to_json(self):
    return json.dumps(self.to_list())

  @classmethod
  def from_json(cls, s):
    return cls(json.loads(s))


##############################################################################################################
### RootSet ##################################################################################################
##############################################################################################################
@dataclass(frozen=True, eq=False)
class RootSet():
  """Roots of z^L - sum_l psi_l z^{L-l}: c pairs x+-jy (stored with y>0) and L-2c reals.
  Pairs are kept sorted by (x,y) and reals ascending, so the representation is unique."""
  complex_pairs: tuple
  reals: tuple
  order: int

  def __post_init__(self):
    pairs = tuple(sorted((float(x), float(y)) for x, y in self.complex_pairs))
    reals = tuple(sorted(float(r) for r in self.reals))
    order = int(self.order)
    if order < 1:
      raise ValueError('root set order must be >= 1 (found {})'.format(order))
    if 2*len(pairs) + len(reals) != order:
      raise ValueError('root set with {} pairs and {} reals does not have order {}'.format(len(pairs), len(reals), order))
    for x, y in pairs:
      if not y > 0.0:
        raise ValueError('complex pair representative must have y > 0 (found {})'.format(y))
      if not x*x + y*y < 1.0:
        raise ValueError('complex root {}+-{}j is not inside the unit circle'.format(x, y))
    for r in reals:
      if not abs(r) < 1.0:
        raise ValueError('real root {} is not inside the unit circle'.format(r))
    object.__setattr__(self, 'complex_pairs', pairs)
    object.__setattr__(self, 'reals', reals)
    object.__setattr__(self, 'order', order)

  @property
  def n_pairs(self):
    return len(self.complex_pairs)

  def expanded(self):
    ### full root list in canonical order: (x-jy, x+jy) per pair, then reals
    a = []
    for x, y in self.complex_pairs:
      a.append(complex(x, -y))
      a.append(complex(x, y))
    a.extend(complex(r, 0.0) for r in self.reals)
    return np.array(a, dtype=complex)

  def to_dict(self):
    return {'complex_pairs': [[x, y] for x, y in self.complex_pairs], 'reals': list(self.reals)}

  def to_json(self):
    return json.dumps(self.to_dict())

  @classmethod
  def from_dict(cls, d):
    pairs = [tuple(p) for p in d['complex_pairs']]
    reals = list(d['reals'])
    return cls(pairs, reals, 2*len(pairs) + len(reals))

  @classmethod
  def from_json(cls, s):
    return cls.from_dict(json.loads(s))

  @classmethod
  def from_array(cls, roots):
    ### classify a conjugate-closed array of complex roots
    roots = np.asarray(roots, dtype=complex).reshape(-1)
    is_real = np.abs(roots.imag) < REAL_ROOT_TOL
    upper = roots[~is_real & (roots.imag > 0)]
    lower = roots[~is_real & (roots.imag < 0)]
    if len(upper) != len(lower):
      raise RootFindingFailure('roots are not conjugate-closed: {}'.format(roots))
    pairs = [(z.real, z.imag) for z in upper]
    return cls(pairs, roots[is_real].real.tolist(), roots.size)


##############################################################################################################
### root <-> coefficient maps ################################################################################
##############################################################################################################
def roots_to_coefficients(roots):
  a = roots.expanded()
  lam = np.atleast_1d(np.poly(a))[1:] #lambda_k = (-1)^k e_k(a_1..a_L)
  lam = np.asarray(lam)
  if np.iscomplexobj(lam):
    if np.max(np.abs(lam.imag), initial=0.0) > COEF_IMAG_TOL:
      raise RootFindingFailure('coefficients from roots keep an imaginary part {}'.format(np.max(np.abs(lam.imag))))
    lam = lam.real
  return Filter(-lam)

def companion_roots(coefficients):
  ### roots of z^L - sum psi_l z^{L-l} for a batch [K,L] as eigenvalues of companion matrices
  psi = np.atleast_2d(np.asarray(coefficients, dtype=float)) #[K,L]
  K, L = psi.shape
  C = np.zeros((K, L, L))
  C[:, 0, :] = psi
  if L > 1:
    C[:, np.arange(1, L), np.arange(0, L-1)] = 1.0
  try:
    a = np.linalg.eigvals(C) #[K,L]
  except np.linalg.LinAlgError as e:
    raise RootFindingFailure('companion eigenvalues did not converge: {}'.format(e))
  if not np.all(np.isfinite(a)):
    raise RootFindingFailure('non-finite roots found')
  return a

def coefficients_to_roots(filt):
  a = companion_roots(filt.coefficients)[0]
  rmax = np.max(np.abs(a))
  if rmax >= 1.0 - UNIT_CIRCLE_TOL:
    raise NotStable('filter {} has a root of modulus {}'.format(filt.to_list(), rmax))
  return RootSet.from_array(a)


##############################################################################################################
### stability (Schur-Cohn step-down) #########################################################################
##############################################################################################################
def stable_mask(coefficients):
  psi = np.atleast_2d(np.asarray(coefficients, dtype=float)) #[K,L]
  K, L = psi.shape
  a = np.concatenate((np.ones((K, 1)), -psi), axis=1) #[K,L+1] monic z^L + lambda_1 z^{L-1} + ...
  stable = np.all(np.isfinite(a), axis=1)
  a = np.where(stable[:, None], a, 0.0)
  for m in range(L, 0, -1):
    k = a[:, m].copy() ### reflection coefficient
    stable &= np.abs(k) < 1.0
    k = np.where(stable, k, 0.0)
    a = (a[:, :m] - k[:, None] * a[:, m:0:-1]) / (1.0 - k*k)[:, None]
  return stable

def is_stable(coefficients):
  return bool(stable_mask(np.asarray(coefficients, dtype=float).reshape(1, -1))[0])


##############################################################################################################
### distance #################################################################################################
##############################################################################################################
def is_degenerate(a):
  a = np.asarray(a, dtype=complex)
  if np.any(np.abs(a) < DEGENERATE_TOL):
    return True
  gaps = np.abs(a[:, None] - a[None, :])
  np.fill_diagonal(gaps, np.inf)
  return bool(np.min(gaps) < DEGENERATE_TOL)

def residue_distances(a, b):
  ### sum of residues at the generator roots a [L] for every predictor root set in b [K,L]
  b = np.atleast_2d(b)
  num = np.prod(a[None, :, None] - b[:, None, :], axis=2) #[K,L]
  gaps = a[:, None] - a[None, :]
  np.fill_diagonal(gaps, 1.0)
  den = a * np.prod(gaps, axis=1) #[L]
  ratio = np.prod(1.0 - a[None, :, None] * np.conj(b)[:, None, :], axis=2) / np.prod(1.0 - a[:, None] * np.conj(a)[None, :], axis=1)[None, :] #[K,L]
  return np.sum(num / den[None, :] * (ratio - 1.0), axis=1) #[K] complex

def quadrature_distances(psi_a, psi_b, n_points):
  ### (1/2pi) int |Psi_A - Psi_B|^2 / |1 - Psi_A|^2 dw over [-pi,pi] for every row of psi_b [K,L]
  psi_b = np.atleast_2d(psi_b)
  omega = np.linspace(-np.pi, np.pi, n_points)
  e = np.exp(1j * np.outer(omega, np.arange(1, psi_a.size+1))) #[n,L]
  Psi_a = e @ psi_a #[n]
  den = np.abs(1.0 - Psi_a)**2
  out = np.empty(psi_b.shape[0])
  for s in range(0, psi_b.shape[0], QUAD_CHUNK):
    Psi_b = psi_b[s:s+QUAD_CHUNK] @ e.T #[k,n]
    out[s:s+QUAD_CHUNK] = trapezoid(np.abs(Psi_a[None, :] - Psi_b)**2 / den[None, :], omega, axis=1) / (2.0*np.pi)
  return out

def distance_row(psi_a, a, psi_b, b):
  ### D(psi_A, psi_B_k) with sigma2=1 for K predictors; psi_a [L], a its roots [L], psi_b [K,L], b [K,L]
  psi_b = np.atleast_2d(psi_b)
  if is_degenerate(a):
    logging.debug('degenerate generator roots {} -> quadrature'.format(a))
    d = quadrature_distances(psi_a, psi_b, DEGENERATE_QUAD_POINTS)
  else:
    r = residue_distances(a, b)
    bad = (np.abs(r.imag) > RESIDUE_IMAG_TOL*np.abs(r.real) + 1e-12) | (r.real < -NEGATIVE_TOL) | ~np.isfinite(r)
    d = r.real.copy()
    if np.any(bad):
      logging.warning('residue sum lost precision for {} predictor(s) of generator {} -> quadrature'.format(int(np.sum(bad)), psi_a.tolist()))
      d[bad] = quadrature_distances(psi_a, psi_b[bad], DEGENERATE_QUAD_POINTS)
  d = np.maximum(d, 0.0)
  d[np.all(psi_b == psi_a[None, :], axis=1)] = 0.0
  return d

def _check_pair(psi_a, psi_b, sigma2):
  if psi_a.length != psi_b.length:
    raise ValueError('filters of different lengths ({} vs {})'.format(psi_a.length, psi_b.length))
  if not sigma2 > 0.0:
    raise ValueError('sigma2 must be positive (found {})'.format(sigma2))
  if not psi_a.is_stable():
    raise UnstableGenerator('generator filter {} is not stable'.format(psi_a.to_list()))

def filter_distance(psi_a, psi_b, sigma2=1.0):
  _check_pair(psi_a, psi_b, sigma2)
  if psi_a == psi_b:
    return 0.0
  a = companion_roots(psi_a.coefficients)[0]
  b = companion_roots(psi_b.coefficients)
  d = distance_row(psi_a.coefficients, a, psi_b.coefficients[None, :], b)[0]
  return sigma2 * float(d)

def filter_distance_quadrature(psi_a, psi_b, sigma2=1.0, n_points=8192):
  if n_points < 64:
    raise ValueError('n_points must be >= 64 (found {})'.format(n_points))
  _check_pair(psi_a, psi_b, sigma2)
  d = quadrature_distances(psi_a.coefficients, psi_b.coefficients[None, :], n_points)[0]
  return sigma2 * float(max(d, 0.0))

def distance_matrix(coefficients, sigma2=1.0):
  ### entries[i][j] = D(psi_i, psi_j) for a batch of filters [F,L]
  psi = np.atleast_2d(np.asarray(coefficients, dtype=float))
  stable = stable_mask(psi)
  if not np.all(stable):
    raise UnstableGenerator('filter {} is not stable'.format(int(np.argmin(stable))))
  roots = companion_roots(psi) #[F,L]
  F = psi.shape[0]
  D = np.empty((F, F))
  for i in range(F):
    D[i] = distance_row(psi[i], roots[i], psi, roots)
  np.fill_diagonal(D, 0.0)
  return sigma2 * D

def autocovariance_form(psi_a, sigma2=1.0):
  ### Gamma[i][j] = Cov(x_{n-i-1}, x_{n-j-1}) from the Yule-Walker system r(k) - sum_l psi_l r(|k-l|) = sigma2 delta_k
  if not sigma2 > 0.0:
    raise ValueError('sigma2 must be positive (found {})'.format(sigma2))
  if not psi_a.is_stable():
    raise UnstableGenerator('generator filter {} is not stable'.format(psi_a.to_list()))
  psi = psi_a.coefficients
  L = psi.size
  A = np.eye(L+1)
  for k in range(L+1):
    for l in range(1, L+1):
      A[k, abs(k-l)] -= psi[l-1]
  rhs = np.zeros(L+1)
  rhs[0] = sigma2
  r = np.linalg.solve(A, rhs)
  return toeplitz(r[:L])

def vandermonde(roots):
  a = roots.expanded()
  v = complex(1.0)
  for u in range(a.size):
    for w in range(u+1, a.size):
      v *= a[w] - a[u]
  return v
