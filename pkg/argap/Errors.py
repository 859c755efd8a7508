# -*- coding: utf-8 -*-

class ArgapError(Exception):
  pass

class NumericalError(ArgapError):
  pass

class InputError(ArgapError):
  def __init__(self, messg, line=None):
    self.line = line
    if line is not None:
      messg = 'line {}: {}'.format(line, messg)
    super(InputError, self).__init__(messg)

### filter_core
class NotStable(NumericalError):
  pass

class RootFindingFailure(NumericalError):
  pass

class UnstableGenerator(NumericalError):
  pass

### sampler
class RejectionBudgetExceeded(NumericalError):
  pass

### clustering
class InvalidM(ArgapError):
  pass

### mixture_em
class SingularSystem(NumericalError):
  pass

### gapstat
class LengthMismatch(ArgapError):
  pass
