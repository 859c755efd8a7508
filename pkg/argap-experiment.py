#!/usr/bin/env python3

import sys
import logging
from argap.Sampler import load_or_estimate_weights
from argap.Mixture import EMConfig
from argap.GapStat import reference_curve, read_reference_curve
from argap.Simulation import run_experiment, SCENARIOS
from tools.Tools import create_logger, run, set_threads, get_device, child_seed

######################################################################
### Options ##########################################################
######################################################################

class Options():
  def __init__(self, argv):
    self.prog = argv.pop(0)
    self.scenario = None
    self.replications = 100
    self.em_restarts = 50
    self.max_iter = 500
    self.tol = 1e-6
    self.mmax = 0
    self.refcurve = None
    self.filters = 1000
    self.instances = 20
    self.restarts = 20
    self.sigma2 = 1.0
    self.seed = 0
    self.mspe = 'weighted'
    self.output = '-'
    self.format = 'csv'
    self.volume_samples = None
    self.threads = 0
    self.cuda = False
    log_file = 'stderr'
    log_level = 'info'

    try:
      while len(argv):
        tok = argv.pop(0)

        if tok=="-h":
          self.usage()

        elif tok=='-scenario' and len(argv):
          self.scenario = int(argv.pop(0))
        elif tok=='-replications' and len(argv):
          self.replications = int(argv.pop(0))
        elif tok=='-em_restarts' and len(argv):
          self.em_restarts = int(argv.pop(0))
        elif tok=='-max_iter' and len(argv):
          self.max_iter = int(argv.pop(0))
        elif tok=='-tol' and len(argv):
          self.tol = float(argv.pop(0))
        elif tok=='-mmax' and len(argv):
          self.mmax = int(argv.pop(0))
        elif tok=='-refcurve' and len(argv):
          self.refcurve = argv.pop(0)
        elif tok=='-filters' and len(argv):
          self.filters = int(argv.pop(0))
        elif tok=='-instances' and len(argv):
          self.instances = int(argv.pop(0))
        elif tok=='-restarts' and len(argv):
          self.restarts = int(argv.pop(0))
        elif tok=='-sigma2' and len(argv):
          self.sigma2 = float(argv.pop(0))
        elif tok=='-seed' and len(argv):
          self.seed = int(argv.pop(0))
        elif tok=='-mspe' and len(argv):
          self.mspe = argv.pop(0)
        elif tok=='-o' and len(argv):
          self.output = argv.pop(0)
        elif tok=='-format' and len(argv):
          self.format = argv.pop(0)
        elif tok=='-volume_samples' and len(argv):
          self.volume_samples = int(argv.pop(0))
        elif tok=='-threads' and len(argv):
          self.threads = int(argv.pop(0))

        elif tok=="-cuda":
          self.cuda = True
        elif tok=="-log_file" and len(argv):
          log_file = argv.pop(0)
        elif tok=="-log_level" and len(argv):
          log_level = argv.pop(0)

        else:
          self.usage('Unrecognized {} option'.format(tok))
    except ValueError as e:
      self.usage('Bad option value: {}'.format(e))

    if self.scenario is None:
      self.usage('missing -scenario option')
    if self.scenario not in SCENARIOS:
      self.usage('-scenario must be 1, 2 or 3')
    if self.replications < 1 or self.em_restarts < 1 or self.max_iter < 1:
      self.usage('-replications, -em_restarts and -max_iter must be >= 1')
    if self.mmax and self.mmax < SCENARIOS[self.scenario][0]:
      self.usage('-mmax must be >= {} for scenario {}'.format(SCENARIOS[self.scenario][0], self.scenario))
    if self.instances < 1 or self.restarts < 1:
      self.usage('-instances and -restarts must be >= 1')
    if not self.tol > 0.0 or self.sigma2 < 0.0:
      self.usage('-tol must be > 0 and -sigma2 >= 0')
    if self.mspe not in ('weighted', 'min'):
      self.usage('-mspe must be weighted or min')
    if self.format not in ('csv', 'json'):
      self.usage('-format must be csv or json')

    create_logger(log_file,log_level)
    logging.info("Options = {}".format(self.__dict__))


  def usage(self, messg=None):
    if messg is not None:
      sys.stderr.write(messg + '\n')
    sys.stderr.write('''usage: {} -scenario INT [Options]
   -scenario        INT : 1 (4 modes, L=2, iid), 2 (2 modes, L=4, iid 0.4/0.6), 3 (7 modes, L=1, 7 segments)
   -replications    INT : generated series ({})
   -sigma2        FLOAT : noise variance of generated series ({})
   -seed            INT : random seed ({})

   [EM]
   -em_restarts     INT : random restarts per M ({})
   -max_iter        INT : iterations per restart ({})
   -tol           FLOAT : stop when |log-likelihood change| < tol ({})
   -mspe         STRING : prediction error of a fit, weighted (by responsibilities) or min (best mode per sample) ({})

   [Reference curve]
   -refcurve       FILE : reference curve written by argap-refcurve.py [built here when missing]
   -mmax            INT : largest number of modes [default: true M + 3, or the -refcurve length]
   -filters         INT : uniform stable filters per instance ({})
   -instances       INT : random instances averaged ({})
   -restarts        INT : k-medoids restarts ({})
   -volume_samples  INT : Monte Carlo samples for configuration volumes (1e6 for L<=4, 1e7 otherwise)

   -o              FILE : output file ({})
   -format       STRING : csv or json ({})
   -threads         INT : cap on torch threads, 0 keeps the default ({})
   -cuda                : use cuda device instead of cpu ({})
   -log_file       FILE : log file  (stderr)
   -log_level    STRING : log level [debug, info, warning, critical, error] (info)
   -h                   : this help
'''.format(self.prog, self.replications, self.sigma2, self.seed, self.em_restarts, self.max_iter, self.tol, self.mspe, self.filters, self.instances, self.restarts, self.output, self.format, self.threads, self.cuda))
    sys.exit(2 if messg is not None else 0)

######################################################################
### MAIN #############################################################
######################################################################

def main(o):
  set_threads(o.threads)
  device = get_device(o.cuda)
  true_m, L, _ = SCENARIOS[o.scenario]
  weights = load_or_estimate_weights(L, o.volume_samples)
  if o.refcurve is not None:
    ref = read_reference_curve(o.refcurve)
    mmax = o.mmax or ref.m_max
  else:
    mmax = o.mmax or true_m + 3
    ref = reference_curve(L, mmax, o.filters, o.instances, child_seed(o.seed, 0), weights, o.restarts)
  cfg = EMConfig(max_iter=o.max_iter, tol=o.tol)
  table = run_experiment(o.scenario, o.replications, o.em_restarts, mmax, child_seed(o.seed, 1), ref, weights, o.sigma2, cfg, device, o.mspe)
  table.write(o.output, o.format)

if __name__ == '__main__':

  o = Options(sys.argv)
  run(main, o)
