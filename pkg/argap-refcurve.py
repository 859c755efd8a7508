#!/usr/bin/env python3

import sys
import logging
from argap.Sampler import load_or_estimate_weights
from argap.GapStat import reference_curve, write_reference_curve, write_reference_centres
from tools.Tools import create_logger, run, set_threads

######################################################################
### Options ##########################################################
######################################################################

class Options():
  def __init__(self, argv):
    self.prog = argv.pop(0)
    self.lag = None
    self.mmax = 6
    self.filters = 1000
    self.instances = 20
    self.restarts = 20
    self.seed = 0
    self.output = '-'
    self.format = 'csv'
    self.centres = None
    self.volume_samples = None
    self.threads = 0
    log_file = 'stderr'
    log_level = 'info'

    try:
      while len(argv):
        tok = argv.pop(0)

        if tok=="-h":
          self.usage()

        elif tok=='-lag' and len(argv):
          self.lag = int(argv.pop(0))
        elif tok=='-mmax' and len(argv):
          self.mmax = int(argv.pop(0))
        elif tok=='-filters' and len(argv):
          self.filters = int(argv.pop(0))
        elif tok=='-instances' and len(argv):
          self.instances = int(argv.pop(0))
        elif tok=='-restarts' and len(argv):
          self.restarts = int(argv.pop(0))
        elif tok=='-seed' and len(argv):
          self.seed = int(argv.pop(0))
        elif tok=='-o' and len(argv):
          self.output = argv.pop(0)
        elif tok=='-format' and len(argv):
          self.format = argv.pop(0)
        elif tok=='-centres' and len(argv):
          self.centres = argv.pop(0)
        elif tok=='-volume_samples' and len(argv):
          self.volume_samples = int(argv.pop(0))
        elif tok=='-threads' and len(argv):
          self.threads = int(argv.pop(0))

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
    if self.lag < 1 or self.mmax < 1 or self.instances < 1 or self.restarts < 1:
      self.usage('-lag, -mmax, -instances and -restarts must be >= 1')
    if self.filters < self.mmax:
      self.usage('-filters must be >= -mmax')
    if self.format not in ('csv', 'json'):
      self.usage('-format must be csv or json')

    create_logger(log_file,log_level)
    logging.info("Options = {}".format(self.__dict__))


  def usage(self, messg=None):
    if messg is not None:
      sys.stderr.write(messg + '\n')
    sys.stderr.write('''usage: {} -lag INT [Options]
   -lag             INT : filter length L
   -mmax            INT : largest number of modes ({})
   -filters         INT : uniform stable filters per instance ({})
   -instances       INT : random instances averaged ({})
   -restarts        INT : k-medoids restarts ({})
   -seed            INT : random seed ({})
   -o              FILE : output file ({})
   -format       STRING : csv or json ({})
   -centres        FILE : also write the medoid filters of every instance and M (columns instance,M,psi_1..psi_L)
   -volume_samples  INT : Monte Carlo samples for configuration volumes (1e6 for L<=4, 1e7 otherwise)
   -threads         INT : cap on torch threads, 0 keeps the default ({})

   -log_file       FILE : log file  (stderr)
   -log_level    STRING : log level [debug, info, warning, critical, error] (info)
   -h                   : this help
'''.format(self.prog, self.mmax, self.filters, self.instances, self.restarts, self.seed, self.output, self.format, self.threads))
    sys.exit(2 if messg is not None else 0)

######################################################################
### MAIN #############################################################
######################################################################

def main(o):
  set_threads(o.threads)
  weights = load_or_estimate_weights(o.lag, o.volume_samples)
  ref = reference_curve(o.lag, o.mmax, o.filters, o.instances, o.seed, weights, o.restarts)
  write_reference_curve(o.output, ref, o.format)
  if o.centres is not None:
    write_reference_centres(o.centres, ref)

if __name__ == '__main__':

  o = Options(sys.argv)
  run(main, o)
