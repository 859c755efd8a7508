# -*- coding: utf-8 -*-

import numpy as np
import pytest
from argap.Filter import Filter, RootSet
from argap.Sampler import estimate_configuration_volumes


@pytest.fixture(autouse=True)
def cache_dir(tmp_path_factory, monkeypatch):
  d = tmp_path_factory.getbasetemp() / 'argap_cache'
  monkeypatch.setenv('ARGAP_CACHE_DIR', str(d))
  return d


@pytest.fixture(scope='session')
def weights():
  ### configuration volumes per lag, enough samples for tests
  cache = {}
  def get(L):
    if L not in cache:
      cache[L] = estimate_configuration_volumes(L, 50000, rng_seed=0)
    return cache[L]
  return get


def random_roots(rng, L, rmax=0.95, min_gap=0.0):
  ### stable root set with moduli below rmax and roots at least min_gap apart
  while True:
    c = int(rng.integers(0, L//2 + 1))
    r = rmax * np.sqrt(rng.random(c))
    theta = np.pi * (0.05 + 0.9*rng.random(c))
    pairs = [(ri*np.cos(t), ri*np.sin(t)) for ri, t in zip(r, theta)]
    reals = rng.uniform(-rmax, rmax, size=L - 2*c).tolist()
    roots = RootSet(pairs, reals, L)
    a = roots.expanded()
    if L == 1 or min_gap == 0.0:
      return roots
    gaps = np.abs(a[:, None] - a[None, :])
    np.fill_diagonal(gaps, np.inf)
    if np.min(gaps) > min_gap and np.min(np.abs(a)) > min_gap:
      return roots


def random_filter(rng, L, rmax=0.95, min_gap=0.0):
  return Filter.from_roots(random_roots(rng, L, rmax, min_gap))
