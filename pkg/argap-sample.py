#!/usr/bin/env python3

import sys
import logging
from argap.Sampler import sample_uniform_stable_filters, sample_coefficient_rejection_batch, load_or_estimate_weights, MAX_ORDER
from argap.Errors import RejectionBudgetExceeded, InputError
from tools.Tools import create_logger, run, fmt, write_csv, write_json

######################################################################
### Options ##########################################################
######################################################################

class Options():
  def __init__(self, argv):
    self.prog = argv.pop(0)
    self.lag = None
    self.count = 1000
    self.seed = 0
    self.output = '-'
    self.format = 'csv'
    self.oracle = False
    self.volume_samples = None
    log_file = 'stderr'
    log_level = 'info'

    try:
      while len(argv):
        tok = argv.pop(0)

        if tok=="-h":
          self.usage()

        elif tok=='-lag' and len(argv):
          self.lag = int(argv.pop(0))
        elif tok=='-count' and len(argv):
          self.count = int(argv.pop(0))
        elif tok=='-seed' and len(argv):
          self.seed = int(argv.pop(0))
        elif tok=='-o' and len(argv):
          self.output = argv.pop(0)
        elif tok=='-format' and len(argv):
          self.format = argv.pop(0)
        elif tok=='-volume_samples' and len(argv):
          self.volume_samples = int(argv.pop(0))
        elif tok=='-oracle':
          self.oracle = True

        elif tok=="-log_file" and len(argv):
          log_file = argv.pop(0)
        elif tok=="-log_level" and len(argv):
          log_level = argv.pop(0)

        else:
          self.usage('Unrecognized {} option'.format(tok))
    except ValueError as e:
      self.usage('Bad option value: {}'.format(e))

    if self.lag is None:
      self.usage('missing -lag option')
    if not 1 <= self.lag <= MAX_ORDER:
      self.usage('-lag must lie in [1, {}]'.format(MAX_ORDER))
    if self.count < 0:
      self.usage('-count must be >= 0')
    if self.format not in ('csv', 'json'):
      self.usage('-format must be csv or json')

    create_logger(log_file,log_level)
    logging.info("Options = {}".format(self.__dict__))


  def usage(self, messg=None):
    if messg is not None:
      sys.stderr.write(messg + '\n')
    sys.stderr.write('''usage: {} -lag INT [Options]
   -lag             INT : filter length L [1, {}]
   -count           INT : number of filters ({})
   -seed            INT : random seed ({})
   -o              FILE : output file ({})
   -format       STRING : csv or json ({})
   -oracle              : draw by rejection in the coefficient box instead of the root domain
   -volume_samples  INT : Monte Carlo samples for configuration volumes (1e6 for L<=4, 1e7 otherwise)

   -log_file       FILE : log file  (stderr)
   -log_level    STRING : log level [debug, info, warning, critical, error] (info)
   -h                   : this help

Configuration volumes are cached in $ARGAP_CACHE_DIR (~/.cache/argap)
'''.format(self.prog, MAX_ORDER, self.count, self.seed, self.output, self.format))
    sys.exit(2 if messg is not None else 0)

######################################################################
### MAIN #############################################################
######################################################################

def main(o):
  try:
    if o.oracle:
      psi, n_proposed = sample_coefficient_rejection_batch(o.lag, o.count, o.seed)
      logging.info('Coefficient rejection kept {} of {} proposals'.format(psi.shape[0], n_proposed))
    else:
      weights = load_or_estimate_weights(o.lag, o.volume_samples)
      psi = sample_uniform_stable_filters(o.lag, o.count, weights, o.seed)
  except RejectionBudgetExceeded as e:
    raise InputError('{} (try a smaller -lag)'.format(e))

  if o.format == 'json':
    write_json(o.output, {'lag': o.lag, 'seed': o.seed, 'filters': psi.tolist()})
  else:
    write_csv(o.output, ['psi_{}'.format(l) for l in range(1, o.lag+1)], [[fmt(v) for v in row] for row in psi])
  logging.info('Wrote {} filters of length {}'.format(psi.shape[0], o.lag))

if __name__ == '__main__':

  o = Options(sys.argv)
  run(main, o)
