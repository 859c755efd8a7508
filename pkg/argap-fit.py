#!/usr/bin/env python3

import sys
import logging
from argap.Mixture import EMConfig, EMFitter, read_time_series, empirical_mspe, weighted_mspe, aic, bic
from tools.Tools import create_logger, run, set_threads, get_device, write_json

######################################################################
### Options ##########################################################
######################################################################

class Options():
  def __init__(self, argv):
    self.prog = argv.pop(0)
    self.input = None
    self.presample = None
    self.lag = None
    self.m = None
    self.em_restarts = 50
    self.max_iter = 500
    self.tol = 1e-6
    self.seed = 0
    self.output = '-'
    self.trace = None
    self.threads = 0
    self.cuda = False
    log_file = 'stderr'
    log_level = 'info'

    try:
      while len(argv):
        tok = argv.pop(0)

        if tok=="-h":
          self.usage()

        elif tok=='-i' and len(argv):
          self.input = argv.pop(0)
        elif tok=='-presample' and len(argv):
          self.presample = argv.pop(0)
        elif tok=='-lag' and len(argv):
          self.lag = int(argv.pop(0))
        elif tok=='-m' and len(argv):
          self.m = int(argv.pop(0))
        elif tok=='-em_restarts' and len(argv):
          self.em_restarts = int(argv.pop(0))
        elif tok=='-max_iter' and len(argv):
          self.max_iter = int(argv.pop(0))
        elif tok=='-tol' and len(argv):
          self.tol = float(argv.pop(0))
        elif tok=='-seed' and len(argv):
          self.seed = int(argv.pop(0))
        elif tok=='-o' and len(argv):
          self.output = argv.pop(0)
        elif tok=='-trace' and len(argv):
          self.trace = argv.pop(0)
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

    if self.input is None:
      self.usage('missing -i option')
    if self.lag is None:
      self.usage('missing -lag option')
    if self.m is None:
      self.usage('missing -m option')
    if self.lag < 1 or self.m < 1 or self.em_restarts < 1 or self.max_iter < 1:
      self.usage('-lag, -m, -em_restarts and -max_iter must be >= 1')
    if not self.tol > 0.0:
      self.usage('-tol must be > 0')

    create_logger(log_file,log_level)
    logging.info("Options = {}".format(self.__dict__))


  def usage(self, messg=None):
    if messg is not None:
      sys.stderr.write(messg + '\n')
    sys.stderr.write('''usage: {} -i FILE -lag INT -m INT [Options]
   -i              FILE : time series CSV (column x)
   -presample      FILE : presample CSV with lag values (column x, oldest first) [default: first lag values of -i]
   -lag             INT : filter length L
   -m               INT : number of modes M

   [EM]
   -em_restarts     INT : random restarts ({})
   -max_iter        INT : iterations per restart ({})
   -tol           FLOAT : stop when |log-likelihood change| < tol ({})
   -seed            INT : random seed ({})
   -trace           DIR : write log-likelihood traces for tensorboard in DIR

   -o              FILE : output JSON file ({})
   -threads         INT : cap on torch threads, 0 keeps the default ({})
   -cuda                : use cuda device instead of cpu ({})
   -log_file       FILE : log file  (stderr)
   -log_level    STRING : log level [debug, info, warning, critical, error] (info)
   -h                   : this help
'''.format(self.prog, self.em_restarts, self.max_iter, self.tol, self.seed, self.output, self.threads, self.cuda))
    sys.exit(2 if messg is not None else 0)

######################################################################
### MAIN #############################################################
######################################################################

def main(o):
  set_threads(o.threads)
  device = get_device(o.cuda)
  series = read_time_series(o.input, o.lag, o.presample)
  logging.info('Read series with {} observations (presample: {})'.format(series.n, o.presample or 'first_{}_values'.format(o.lag)))
  cfg = EMConfig(max_iter=o.max_iter, tol=o.tol, n_restarts=o.em_restarts)
  fit = EMFitter(cfg, device, o.trace).fit(series, o.m, o.seed)
  write_json(o.output, {
    'model': fit.model.to_dict(),
    'log_likelihood': fit.log_likelihood,
    'aic': aic(fit),
    'bic': bic(fit),
    'mspe': empirical_mspe(fit.model, series, device),
    'mspe_weighted': weighted_mspe(fit.model, series, device),
    'n_iterations': fit.n_iterations,
    'converged': fit.converged,
    'restart_index': fit.restart_index,
    'n_obs': series.n,
    'presample': o.presample or 'first_{}_values'.format(o.lag),
  })

if __name__ == '__main__':

  o = Options(sys.argv)
  run(main, o)
