# -*- coding: utf-8 -*-

import os
import sys
import csv
import json
import time
import logging
import torch
import numpy as np
from argap.Errors import InputError, InvalidM, LengthMismatch, NumericalError

def create_logger(logfile, loglevel):
  numeric_level = getattr(logging, loglevel.upper(), None)
  if not isinstance(numeric_level, int):
    logging.error("Invalid log level={}".format(loglevel))
    sys.exit(2)
  if logfile is None or logfile == 'stderr':
    logging.basicConfig(format='[%(asctime)s.%(msecs)03d] %(levelname)s %(message)s', datefmt='%Y-%m-%d_%H:%M:%S', level=numeric_level)
    logging.debug('Created Logger level={}'.format(loglevel))
  else:
    logging.basicConfig(filename=logfile, format='[%(asctime)s.%(msecs)03d] %(levelname)s %(message)s', datefmt='%Y-%m-%d_%H:%M:%S', level=numeric_level)
    logging.debug('Created Logger level={} file={}'.format(loglevel, logfile))

######################################################################
### seeds ############################################################
######################################################################

def child_seed(seed, *keys):
  ### sub-stream (k1, k2, ...) of seed s is SeedSequence([s, k1, k2, ...])
  return int(np.random.SeedSequence([int(seed)] + [int(k) for k in keys]).generate_state(1, np.uint64)[0])

def child_rng(seed, *keys):
  return np.random.default_rng(np.random.SeedSequence([int(seed)] + [int(k) for k in keys]))

######################################################################
### files ############################################################
######################################################################

def fmt(x):
  return repr(float(x))

def read_column_csv(fname, column='x'):
  ### one value per row under a header naming the column; '#' lines are skipped
  if not os.path.isfile(fname):
    raise InputError('cannot read file {}'.format(fname))
  values = []
  header = None
  with open(fname, 'r') as f:
    for nline, l in enumerate(f, start=1):
      l = l.strip()
      if not l or l.startswith('#'):
        continue
      if header is None:
        header = [h.strip() for h in l.split(',')]
        if column not in header:
          raise InputError('missing column "{}" in header of {}'.format(column, fname), nline)
        pos = header.index(column)
        continue
      fields = l.split(',')
      if len(fields) != len(header):
        raise InputError('expected {} fields, found {} in {}'.format(len(header), len(fields), fname), nline)
      try:
        v = float(fields[pos])
      except ValueError:
        raise InputError('not a number "{}" in {}'.format(fields[pos].strip(), fname), nline)
      if not np.isfinite(v):
        raise InputError('non-finite value "{}" in {}'.format(fields[pos].strip(), fname), nline)
      values.append(v)
  if header is None:
    raise InputError('empty file {}'.format(fname))
  return np.array(values, dtype=float)

def read_table_csv(fname):
  ### returns (metadata dict from '# key=value' lines, header, rows of strings)
  if not os.path.isfile(fname):
    raise InputError('cannot read file {}'.format(fname))
  meta = {}
  header = None
  rows = []
  with open(fname, 'r') as f:
    for nline, l in enumerate(f, start=1):
      l = l.strip()
      if not l:
        continue
      if l.startswith('#'):
        for tok in l[1:].split():
          if '=' in tok:
            k, v = tok.split('=', 1)
            meta[k] = v
        continue
      fields = [t.strip() for t in l.split(',')]
      if header is None:
        header = fields
      elif len(fields) != len(header):
        raise InputError('expected {} fields, found {} in {}'.format(len(header), len(fields), fname), nline)
      else:
        rows.append((nline, fields))
  if header is None:
    raise InputError('empty file {}'.format(fname))
  return meta, header, rows

def _open_out(fname):
  if fname is None or fname == '-':
    return sys.stdout, False
  return open(fname, 'w', newline=''), True

def write_csv(fname, header, rows, meta=None):
  fh, close = _open_out(fname)
  if meta:
    fh.write('# ' + ' '.join('{}={}'.format(k, v) for k, v in meta.items()) + '\n')
  w = csv.writer(fh, lineterminator='\n')
  w.writerow(header)
  for r in rows:
    w.writerow(r)
  if close:
    fh.close()
  else:
    fh.flush()

def write_json(fname, obj):
  fh, close = _open_out(fname)
  json.dump(obj, fh, indent=1, sort_keys=True)
  fh.write('\n')
  if close:
    fh.close()
  else:
    fh.flush()

######################################################################
### clients ##########################################################
######################################################################

def set_threads(threads):
  if threads > 0:
    torch.set_num_threads(threads)
    logging.debug('torch threads = {}'.format(threads))

def get_device(cuda):
  return torch.device('cuda' if cuda and torch.cuda.is_available() else 'cpu')

def run(main, o):
  ### exit codes: 0 done, 1 numerical failure or broken internal invariant, 2 user input
  tic = time.time()
  try:
    main(o)
  except (InputError, InvalidM, LengthMismatch) as e:
    logging.error(str(e))
    sys.stderr.write('error: {}\n'.format(e))
    sys.exit(2)
  except NumericalError as e:
    logging.error('numerical failure: {}'.format(e))
    sys.stderr.write('numerical failure: {}\n'.format(e))
    sys.exit(1)
  except ValueError as e:
    logging.error('internal error: {}'.format(e))
    sys.stderr.write('internal error: {}\n'.format(e))
    sys.exit(1)
  logging.info('Done ({:.2f} seconds)'.format(time.time()-tic))
