# -*- coding:utf8 -*-
"""Exception classes raised by pairlink. The CLI maps every one of them to exit status 1."""


class PairLinkError(Exception):
    pass


class ParseError(PairLinkError, ValueError):
    def __init__(self, msg, path=None, line_no=None):
        self.path = path
        self.line_no = line_no
        if line_no is not None:
            msg = f'{path or "<input>"}:{line_no}: {msg}'
        super().__init__(msg)


class ValidationError(PairLinkError, ValueError):
    pass


class DimensionError(PairLinkError, ValueError):
    def __init__(self, op, shape_a, shape_b):
        self.shapes = (tuple(shape_a), tuple(shape_b))
        super().__init__(f'{op}: incompatible shapes {tuple(shape_a)} and {tuple(shape_b)}')


class ConfigError(PairLinkError, ValueError):
    def __init__(self, key, msg):
        self.key = key
        super().__init__(f'config key [{key}]: {msg}')


class FormatError(PairLinkError, ValueError):
    pass


class CompatibilityError(PairLinkError, ValueError):
    pass


class UndefinedMetricError(PairLinkError, ValueError):
    pass


class UsageError(PairLinkError, RuntimeError):
    pass


class SamplingError(PairLinkError, RuntimeError):
    pass


class NonFiniteError(PairLinkError, ArithmeticError):
    pass


class DivergenceError(PairLinkError, RuntimeError):
    def __init__(self, epoch, batch, detail=''):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f'training diverged at epoch {epoch} batch {batch}' + (f': {detail}' if detail else ''))
