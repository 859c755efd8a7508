#!/usr/bin/env python3

import sys
import logging
from argap.Mixture import EMConfig, read_time_series
from argap.GapStat import read_reference_curve, select_number_of_modes, write_gap_result
from argap.Errors import InputError
from tools.Tools import create_logger, run, set_threads, get_device

######################################################################
### Options ##########################################################
######################################################################

class Options():
  def __init__(self, argv):
    self.prog = argv.pop(0)
    self.input = None
    self.presample = None
    self.refcurve = None
    self.lag = None
    self.em_restarts = 50
    self.max_iter = 500
    self.tol = 1e-6
    self.seed = 0
    self.mspe = 'weighted'
    self.output = '-'
    self.format = 'json'
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
        elif tok=='-refcurve' and len(argv):
          self.refcurve = argv.pop(0)
        elif tok=='-lag' and len(argv):
          self.lag = int(argv.pop(0))
        elif tok=='-em_restarts' and len(argv):
          self.em_restarts = int(argv.pop(0))
        elif tok=='-max_iter' and len(argv):
          self.max_iter = int(argv.pop(0))
        elif tok=='-tol' and len(argv):
          self.tol = float(argv.pop(0))
        elif tok=='-seed' and len(argv):
          self.seed = int(argv.pop(0))
        elif tok=='-mspe' and len(argv):
          self.mspe = argv.pop(0)
        elif tok=='-o' and len(argv):
          self.output = argv.pop(0)
        elif tok=='-format' and len(argv):
          self.format = argv.pop(0)
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
    if self.refcurve is None:
      self.usage('missing -refcurve option')
    if self.lag is not None and self.lag < 1:
      self.usage('-lag must be >= 1')
    if self.em_restarts < 1 or self.max_iter < 1:
      self.usage('-em_restarts and -max_iter must be >= 1')
    if not self.tol > 0.0:
      self.usage('-tol must be > 0')
    if self.mspe not in ('weighted', 'min'):
      self.usage('-mspe must be weighted or min')
    if self.format not in ('csv', 'json'):
      self.usage('-format must be csv or json')

    create_logger(log_file,log_level)
    logging.info("Options = {}".format(self.__dict__))


  def usage(self, messg=None):
    if messg is not None:
      sys.stderr.write(messg + '\n')
    sys.stderr.write('''usage: {} -i FILE -refcurve FILE [Options]
   -i              FILE : time series CSV (column x)
   -refcurve       FILE : reference curve written by argap-refcurve.py (sets lag and M_max)
   -presample      FILE : presample CSV with lag values (column x, oldest first) [default: first lag values of -i]
   -lag             INT : filter length L, must match the reference curve [default: taken from it]

   [EM]
   -em_restarts     INT : random restarts per M ({})
   -max_iter        INT : iterations per restart ({})
   -tol           FLOAT : stop when |log-likelihood change| < tol ({})
   -mspe         STRING : prediction error of a fit, weighted (by responsibilities) or min (best mode per sample) ({})
   -seed            INT : random seed ({})
   -trace           DIR : write log-likelihood traces for tensorboard in DIR

   -o              FILE : output file ({})
   -format       STRING : json or csv ({})
   -threads         INT : cap on torch threads, 0 keeps the default ({})
   -cuda                : use cuda device instead of cpu ({})
   -log_file       FILE : log file  (stderr)
   -log_level    STRING : log level [debug, info, warning, critical, error] (info)
   -h                   : this help
'''.format(self.prog, self.em_restarts, self.max_iter, self.tol, self.mspe, self.seed, self.output, self.format, self.threads, self.cuda))
    sys.exit(2 if messg is not None else 0)

######################################################################
### MAIN #############################################################
######################################################################

def main(o):
  set_threads(o.threads)
  device = get_device(o.cuda)
  ref = read_reference_curve(o.refcurve)
  if o.lag is not None and o.lag != ref.lag:
    raise InputError('reference curve {} is for lag {} not {}'.format(o.refcurve, ref.lag, o.lag))
  series = read_time_series(o.input, ref.lag, o.presample)
  logging.info('Read series with {} observations (presample: {})'.format(series.n, o.presample or 'first_{}_values'.format(ref.lag)))
  cfg = EMConfig(max_iter=o.max_iter, tol=o.tol, n_restarts=o.em_restarts)
  res = select_number_of_modes(series, ref, cfg, o.seed, device, o.trace, o.mspe)
  write_gap_result(o.output, res, o.format, {'n_obs': series.n, 'presample': o.presample or 'first_{}_values'.format(ref.lag)})

if __name__ == '__main__':

  o = Options(sys.argv)
  run(main, o)
