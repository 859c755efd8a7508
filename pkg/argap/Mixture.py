# -*- coding: utf-8 -*-

import math
import time
import logging
import numpy as np
import torch
from dataclasses import dataclass
from argap.Filter import Filter
from argap.Errors import SingularSystem, InputError, InvalidM
from tools.Tools import child_rng, read_column_csv
try:
  from torch.utils.tensorboard import SummaryWriter
  tensorboard = True
except ImportError:
  tensorboard = False

DTYPE = torch.float64
LOG_2PI = math.log(2.0 * math.pi)

##############################################################################################################
### data / model types #######################################################################################
##############################################################################################################
@dataclass(frozen=True, eq=False)
class TimeSeries():
  presample: np.ndarray    ### x_0, x_{-1}, ..., x_{1-L}
  observations: np.ndarray ### x_1 .. x_N
  lag: int

  def __post_init__(self):
    p = np.array(self.presample, dtype=float).reshape(-1)
    x = np.array(self.observations, dtype=float).reshape(-1)
    if self.lag < 1:
      raise ValueError('lag must be >= 1 (found {})'.format(self.lag))
    if p.size != self.lag:
      raise ValueError('presample needs {} values (found {})'.format(self.lag, p.size))
    if x.size < 1:
      raise ValueError('a time series needs at least one observation')
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(x))):
      raise ValueError('time series values must be finite')
    p.setflags(write=False)
    x.setflags(write=False)
    object.__setattr__(self, 'presample', p)
    object.__setattr__(self, 'observations', x)

  @property
  def n(self):
    return self.observations.size

  @classmethod
  def from_values(cls, values, lag, presample=None):
    ### chronological values; without a (chronological) presample the first lag values are consumed as one
    values = np.asarray(values, dtype=float).reshape(-1)
    if presample is not None:
      return cls(np.asarray(presample, dtype=float).reshape(-1)[::-1], values, lag)
    if values.size < lag + 1:
      raise ValueError('series too short: {} values for lag {}'.format(values.size, lag))
    return cls(values[:lag][::-1], values[lag:], lag)

  def design(self):
    ### X[n-1] = (x_{n-1}, ..., x_{n-L}) and y[n-1] = x_n for n = 1..N
    L, N = self.lag, self.n
    z = np.concatenate((self.presample[::-1], self.observations)) #x_{1-L} .. x_N
    X = np.stack([z[L-l:L-l+N] for l in range(1, L+1)], axis=1) #[N,L]
    return X, self.observations.copy()


@dataclass(frozen=True, eq=False)
class MixtureARModel():
  weights: np.ndarray ### alpha_m
  modes: tuple        ### gamma_m (Filters of length L)
  sigma2: float

  def __post_init__(self):
    w = np.array(self.weights, dtype=float).reshape(-1)
    modes = tuple(m if isinstance(m, Filter) else Filter(m) for m in self.modes)
    if w.size != len(modes) or w.size < 1:
      raise ValueError('{} weights for {} modes'.format(w.size, len(modes)))
    if np.any(w < 0.0) or abs(np.sum(w) - 1.0) > 1e-12:
      raise ValueError('mixture weights must be >= 0 and sum to 1: {}'.format(w))
    if len(set(m.length for m in modes)) != 1:
      raise ValueError('modes of different lengths')
    if not self.sigma2 > 0.0:
      raise ValueError('sigma2 must be positive (found {})'.format(self.sigma2))
    w.setflags(write=False)
    object.__setattr__(self, 'weights', w)
    object.__setattr__(self, 'modes', modes)
    object.__setattr__(self, 'sigma2', float(self.sigma2))

  @property
  def M(self):
    return len(self.modes)

  @property
  def lag(self):
    return self.modes[0].length

  def gamma(self):
    return np.stack([m.coefficients for m in self.modes]) #[M,L]

  def to_dict(self):
    return {'weights': self.weights.tolist(), 'modes': [m.to_list() for m in self.modes], 'sigma2': self.sigma2}

  @classmethod
  def from_dict(cls, d):
    return cls(d['weights'], [Filter(m) for m in d['modes']], d['sigma2'])


@dataclass(frozen=True, eq=False)
class Responsibilities():
  values: np.ndarray ### w_nm [N,M]

  def __post_init__(self):
    v = np.array(self.values, dtype=float)
    if v.ndim != 2:
      raise ValueError('responsibilities must be a N x M matrix')
    if np.any(v < 0.0) or np.any(v > 1.0) or np.any(np.abs(v.sum(axis=1) - 1.0) > 1e-10):
      raise ValueError('responsibilities must be row-stochastic')
    v.setflags(write=False)
    object.__setattr__(self, 'values', v)


@dataclass(frozen=True, eq=False)
class FitResult():
  model: MixtureARModel
  log_likelihood: float
  n_iterations: int
  converged: bool
  restart_index: int
  n_obs: int
  trace: tuple = ()   ### log-likelihood before the first and after every iteration

  @property
  def M(self):
    return self.model.M


@dataclass
class EMConfig():
  max_iter: int = 500
  tol: float = 1e-6
  n_restarts: int = 50
  ridge: float = 1e-10
  cond_limit: float = 1e12
  sigma2_floor: float = 1e-12
  monotone_slack: float = 1e-8


##############################################################################################################
### tensor kernels ###########################################################################################
##############################################################################################################
def _tensors(series, device):
  X, y = series.design()
  return torch.tensor(X, dtype=DTYPE, device=device), torch.tensor(y, dtype=DTYPE, device=device)

def _log_joint(X, y, G, alpha, sigma2):
  ### log alpha_m + log N(x_n | gamma_m^T x_n, sigma2) [N,M]
  resid = y[:, None] - X @ G.T
  return torch.log(alpha)[None, :] - 0.5*(LOG_2PI + math.log(sigma2)) - resid**2 / (2.0*sigma2)

def _responsibilities(lj):
  mx = torch.max(lj, dim=1, keepdim=True).values
  finite = torch.isfinite(mx)
  lj = torch.where(finite, lj, torch.zeros_like(lj)) ### a row with no finite component becomes uniform
  return torch.softmax(lj, dim=1)

def _solve(A, b, cfg):
  L = A.shape[0]
  cond = torch.linalg.cond(A)
  if not torch.isfinite(cond) or cond > cfg.cond_limit:
    tr = float(torch.trace(A))
    ridge = cfg.ridge * (tr / L if tr > 0.0 else 1.0)
    logging.debug('weighted Gram matrix cond={:.3e}: adding ridge {:.3e}'.format(float(cond), ridge))
    A = A + ridge * torch.eye(L, dtype=A.dtype, device=A.device)
  try:
    g = torch.linalg.solve(A, b)
  except RuntimeError as e:
    raise SingularSystem('weighted Gram matrix is singular: {}'.format(e))
  if not torch.all(torch.isfinite(g)):
    raise SingularSystem('weighted least squares produced non-finite coefficients')
  return g

def _m_step(W, X, y, cfg):
  N = X.shape[0]
  alpha = W.sum(dim=0) / N
  alpha = alpha / alpha.sum()
  G = torch.stack([_solve((X * W[:, m:m+1]).T @ X, X.T @ (W[:, m] * y), cfg) for m in range(W.shape[1])]) #[M,L]
  resid = y[:, None] - X @ G.T
  sigma2 = max(float(torch.sum(W * resid**2)) / N, cfg.sigma2_floor)
  return G, alpha, sigma2

def _model(G, alpha, sigma2):
  return MixtureARModel(alpha.cpu().numpy(), [Filter(g) for g in G.cpu().numpy()], sigma2)

def _model_tensors(model, device):
  return torch.tensor(model.gamma(), dtype=DTYPE, device=device), torch.tensor(model.weights, dtype=DTYPE, device=device)


##############################################################################################################
### operations ###############################################################################################
##############################################################################################################
def _check(model, series):
  if model.lag != series.lag:
    raise ValueError('model lag {} does not match series lag {}'.format(model.lag, series.lag))

def log_likelihood(model, series, device='cpu'):
  _check(model, series)
  X, y = _tensors(series, device)
  G, alpha = _model_tensors(model, device)
  return float(torch.logsumexp(_log_joint(X, y, G, alpha, model.sigma2), dim=1).sum())

def e_step(model, series, device='cpu'):
  _check(model, series)
  X, y = _tensors(series, device)
  G, alpha = _model_tensors(model, device)
  return Responsibilities(_responsibilities(_log_joint(X, y, G, alpha, model.sigma2)).cpu().numpy())

def m_step(resp, series, config=None, device='cpu'):
  cfg = config or EMConfig()
  X, y = _tensors(series, device)
  W = torch.tensor(resp.values, dtype=DTYPE, device=device)
  if W.shape[0] != X.shape[0]:
    raise ValueError('{} responsibility rows for {} observations'.format(W.shape[0], X.shape[0]))
  return _model(*_m_step(W, X, y, cfg))

def empirical_mspe(model, series, device='cpu'):
  ### (1/N) sum_n min_m (x_n - gamma_m^T x_n)^2
  _check(model, series)
  X, y = _tensors(series, device)
  G, _ = _model_tensors(model, device)
  resid = y[:, None] - X @ G.T
  return float(torch.min(resid**2, dim=1).values.mean())

def weighted_mspe(model, series, device='cpu'):
  ### (1/N) sum_n sum_m w_nm (x_n - gamma_m^T x_n)^2 with w_nm the responsibilities under model (sigma2 at an EM fixed point)
  _check(model, series)
  X, y = _tensors(series, device)
  G, alpha = _model_tensors(model, device)
  resid = y[:, None] - X @ G.T
  W = _responsibilities(_log_joint(X, y, G, alpha, model.sigma2))
  return float(torch.sum(W * resid**2) / X.shape[0])

def least_squares_ar(series):
  X, y = series.design()
  g, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
  return Filter(g)

def n_parameters(M, L):
  return M*L + (M-1) + 1

def aic(fit, N=None):
  return -2.0*fit.log_likelihood + 2.0*n_parameters(fit.model.M, fit.model.lag)

def bic(fit, N=None):
  N = fit.n_obs if N is None else N
  return -2.0*fit.log_likelihood + n_parameters(fit.model.M, fit.model.lag)*math.log(N)


##############################################################################################################
### EM #######################################################################################################
##############################################################################################################
class EMFitter():
  def __init__(self, config=None, device='cpu', log_dir=None):
    self.cfg = config or EMConfig()
    self.device = torch.device(device)
    self.writer = None
    if log_dir is not None:
      if tensorboard:
        self.writer = SummaryWriter(log_dir=log_dir)
      else:
        logging.warning('tensorboard unavailable: no EM trace written to {}'.format(log_dir))

  def initial(self, X, y, M, rng):
    ### gamma_m from least squares on M random contiguous segments, uniform alpha, pooled sigma2
    N, L = X.shape
    seg = min(N, max(N // M, L+1))
    G = []
    sse = 0.0
    for m in range(M):
      s = int(rng.integers(0, N - seg + 1))
      Xs, ys = X[s:s+seg], y[s:s+seg]
      g = _solve(Xs.T @ Xs, Xs.T @ ys, self.cfg)
      G.append(g)
      sse += float(torch.sum((ys - Xs @ g)**2))
    alpha = torch.full((M,), 1.0 / M, dtype=DTYPE, device=X.device)
    sigma2 = max(sse / (M*seg), self.cfg.sigma2_floor)
    return torch.stack(G), alpha, sigma2

  def run(self, series, M, rng, restart=0):
    X, y = _tensors(series, self.device)
    G, alpha, sigma2 = self.initial(X, y, M, rng)
    ll = float(torch.logsumexp(_log_joint(X, y, G, alpha, sigma2), dim=1).sum())
    trace = [ll]
    converged = False
    it = 0
    while it < self.cfg.max_iter:
      it += 1
      ### E-step
      W = _responsibilities(_log_joint(X, y, G, alpha, sigma2))
      ### M-step
      G, alpha, sigma2 = _m_step(W, X, y, self.cfg)
      ll_new = float(torch.logsumexp(_log_joint(X, y, G, alpha, sigma2), dim=1).sum())
      if ll_new < ll - self.cfg.monotone_slack:
        logging.warning('EM log-likelihood decreased {:.3e} at iteration {} (M={} restart={})'.format(ll - ll_new, it, M, restart))
      trace.append(ll_new)
      if self.writer is not None:
        self.writer.add_scalar('EM_M{}/restart_{}'.format(M, restart), ll_new, it)
      delta = abs(ll_new - ll)
      ll = ll_new
      if delta < self.cfg.tol:
        converged = True
        break
    logging.debug('EM M={} restart={} iterations={} converged={} loglik={:.6f}'.format(M, restart, it, converged, ll))
    return FitResult(_model(G, alpha, sigma2), ll, it, converged, restart, series.n, tuple(trace))

  def fit(self, series, M, rng_seed=0, n_restarts=None):
    ### best final log-likelihood over restarts; restart r draws from the sub-stream (seed, r)
    if M < 1:
      raise InvalidM('M must be >= 1 (found {})'.format(M))
    if self.cfg.max_iter < 1:
      raise ValueError('max_iter must be >= 1 (found {})'.format(self.cfg.max_iter))
    n_restarts = n_restarts or self.cfg.n_restarts
    if M == 1:
      n_restarts = 1 ### a single mode has no latent structure: every start ends in least squares
    tic = time.time()
    best = None
    failures = 0
    for r in range(n_restarts):
      try:
        res = self.run(series, M, child_rng(rng_seed, r), r)
      except SingularSystem as e:
        failures += 1
        logging.warning('EM restart {} discarded (M={}): {}'.format(r, M, e))
        continue
      if best is None or res.log_likelihood > best.log_likelihood:
        best = res
    if best is None:
      raise SingularSystem('all {} EM restarts failed for M={}'.format(n_restarts, M))
    logging.info('EM fit M={} restarts={} (failed {}) best loglik={:.4f} (restart {}, {} iterations) sec: {:.2f}'.format(M, n_restarts, failures, best.log_likelihood, best.restart_index, best.n_iterations, time.time()-tic))
    return best


def fit_em(series, M, max_iter=500, tol=1e-6, n_restarts=50, rng_seed=0, device='cpu'):
  return EMFitter(EMConfig(max_iter=max_iter, tol=tol, n_restarts=n_restarts), device).fit(series, M, rng_seed)


def read_time_series(fname, lag, presample=None):
  ### CSV column x; without a presample file the first lag values are consumed as presample
  values = read_column_csv(fname, 'x')
  if presample is not None:
    pre = read_column_csv(presample, 'x')
    if pre.size != lag:
      raise InputError('presample file {} has {} values, lag is {}'.format(presample, pre.size, lag))
    if values.size < 1:
      raise InputError('series too short: no observations in {}'.format(fname))
    return TimeSeries.from_values(values, lag, pre)
  if values.size < lag + 1:
    raise InputError('series too short: {} values in {} for lag {}'.format(values.size, fname, lag))
  return TimeSeries.from_values(values, lag)
