# -*- coding: utf-8 -*-
"""
Dense 2-D tensors with tape-based reverse-mode gradients.

Primitives record onto the active `ComputeTape` whenever one of their inputs
requires grad. Without an active tape they only compute values, which is what
the finite-difference checker and evaluation passes rely on.

    with ComputeTape() as tape:
        loss = mean(square(matmul(x, w)))
    backward(loss, tape)
"""
import threading

import numpy as np
from scipy import sparse

from utils.error_util import DimensionError, NonFiniteError, UsageError, ValidationError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_active = threading.local()


class Tensor(object):
    """
    2-D float64 array with an optional gradient buffer.

    Leaves (built through the constructor) own a grad buffer iff requires_grad.
    Intermediates made by the primitives set requires_grad only to mark that they
    depend on a trainable leaf; their grad stays None, backward keeps their
    gradients in its own buffer and drops them once propagated.
    """
    __slots__ = ('data', 'requires_grad', 'grad', 'name')

    def __init__(self, data, requires_grad=False, name=None):
        data = np.array(data, dtype=np.float64)
        if data.ndim == 0:
            data = data.reshape(1, 1)
        elif data.ndim == 1:
            data = data.reshape(1, -1)
        elif data.ndim != 2:
            raise DimensionError('tensor', data.shape, (None, None))
        if not np.all(np.isfinite(data)):
            raise NonFiniteError(f'non-finite value in tensor {name or ""}'.strip())
        self.data = data
        self.requires_grad = bool(requires_grad)
        self.grad = np.zeros_like(data) if requires_grad else None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        if self.data.shape != (1, 1):
            raise DimensionError('item', self.data.shape, (1, 1))
        return float(self.data[0, 0])

    def numpy(self):
        return self.data.copy()

    def zero_grad(self):
        if self.grad is not None:
            self.grad.fill(0.0)

    def __repr__(self):
        return f'Tensor(shape={self.shape}, requires_grad={self.requires_grad}, name={self.name})'


class ComputeTape(object):
    """Ordered record of executed primitives; execution order is a topological order."""

    def __init__(self):
        self.records = []
        self._outputs = set()
        self._prev = None

    def record(self, out, inputs, backward_fn):
        self.records.append((out, inputs, backward_fn))
        self._outputs.add(id(out))

    def produced(self, tensor):
        return id(tensor) in self._outputs

    def clear(self):
        self.records = []
        self._outputs = set()

    def __len__(self):
        return len(self.records)

    def __enter__(self):
        self._prev = getattr(_active, 'tape', None)
        _active.tape = self
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _active.tape = self._prev
        self._prev = None


def active_tape():
    return getattr(_active, 'tape', None)


def constant(data):
    return data if isinstance(data, Tensor) else Tensor(data)


def apply_op(op, out_data, inputs, backward_fn):
    """
    Wrap a forward result and, when needed, record it.
    :param backward_fn: maps the output gradient to one gradient (or None) per input
    """
    if not np.all(np.isfinite(out_data)):
        raise NonFiniteError(f'{op} produced a non-finite value')
    out = Tensor.__new__(Tensor)
    out.data = out_data
    # intermediate: tracked, but no grad buffer
    out.grad = None
    out.name = op
    out.requires_grad = any(t.requires_grad for t in inputs)
    tape = active_tape()
    if out.requires_grad and tape is not None:
        tape.record(out, inputs, backward_fn)
    return out


def _unbroadcast(grad, shape):
    if grad.shape == shape:
        return grad
    if shape[0] == 1 and shape[1] == grad.shape[1]:
        return grad.sum(axis=0, keepdims=True)
    if shape[1] == 1 and shape[0] == grad.shape[0]:
        return grad.sum(axis=1, keepdims=True)
    return grad.sum().reshape(1, 1)


def _check_broadcast(op, a, b):
    if a.shape == b.shape:
        return
    rows_ok = b.shape[0] in (1, a.shape[0])
    cols_ok = b.shape[1] in (1, a.shape[1])
    if not (rows_ok and cols_ok):
        raise DimensionError(op, a.shape, b.shape)


def matmul(a, b):
    if a.shape[1] != b.shape[0]:
        raise DimensionError('matmul', a.shape, b.shape)
    return apply_op('matmul', a.data @ b.data, (a, b),
                    lambda g: (g @ b.data.T, a.data.T @ g))


def spmm(adj, b):
    """Constant sparse matrix times dense tensor."""
    if adj.shape[1] != b.shape[0]:
        raise DimensionError('spmm', adj.shape, b.shape)
    adj_t = adj.T.tocsr()
    return apply_op('spmm', np.asarray(adj @ b.data), (b,), lambda g: (np.asarray(adj_t @ g),))


def add(a, b):
    """Elementwise sum; `b` may broadcast along rows (bias) or columns."""
    _check_broadcast('add', a, b)
    return apply_op('add', a.data + b.data, (a, b),
                    lambda g: (g, _unbroadcast(g, b.shape)))


def sub(a, b):
    _check_broadcast('sub', a, b)
    return apply_op('sub', a.data - b.data, (a, b),
                    lambda g: (g, -_unbroadcast(g, b.shape)))


def mul(a, b):
    """Hadamard product; `b` may broadcast like in add."""
    _check_broadcast('mul', a, b)
    return apply_op('mul', a.data * b.data, (a, b),
                    lambda g: (g * b.data, _unbroadcast(g * a.data, b.shape)))


def scale(a, c):
    c = float(c)
    return apply_op('scale', a.data * c, (a,), lambda g: (g * c,))


def add_scalar(a, c):
    return apply_op('add_scalar', a.data + float(c), (a,), lambda g: (g,))


def concat(*tensors):
    rows = tensors[0].shape[0]
    for t in tensors[1:]:
        if t.shape[0] != rows:
            raise DimensionError('concat', tensors[0].shape, t.shape)
    bounds = np.cumsum([0] + [t.shape[1] for t in tensors])

    def backward_fn(g):
        return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(tensors)))

    return apply_op('concat', np.hstack([t.data for t in tensors]), tuple(tensors), backward_fn)


def clamp_min(a, floor=0.0):
    mask = a.data > floor
    return apply_op('clamp_min', np.where(mask, a.data, floor), (a,), lambda g: (g * mask,))


def relu(a):
    return clamp_min(a, 0.0)


def sigmoid(a):
    out = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return apply_op('sigmoid', out, (a,), lambda g: (g * out * (1.0 - out),))


def softplus(a):
    """log(1 + exp(a)) without overflow."""
    out = np.logaddexp(0.0, a.data)
    sig = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return apply_op('softplus', out, (a,), lambda g: (g * sig,))


def square(a):
    return apply_op('square', a.data * a.data, (a,), lambda g: (2.0 * a.data * g,))


def row_sum(a):
    return apply_op('row_sum', a.data.sum(axis=1, keepdims=True), (a,),
                    lambda g: (np.broadcast_to(g, a.shape).copy(),))


def row_mean(a):
    n = a.shape[1]
    return apply_op('row_mean', a.data.mean(axis=1, keepdims=True), (a,),
                    lambda g: (np.broadcast_to(g / n, a.shape).copy(),))


def mean(a):
    n = a.data.size
    if n == 0:
        raise DimensionError('mean', a.shape, (1, 1))
    return apply_op('mean', np.array([[a.data.mean()]]), (a,),
                    lambda g: (np.full(a.shape, g[0, 0] / n),))


def gather(table, index):
    """Row lookup table[index]; gradients scatter-add back into the table."""
    index = np.asarray(index, dtype=np.int64).reshape(-1)
    if len(index) and (index.min() < 0 or index.max() >= table.shape[0]):
        raise IndexError(f'gather index out of range for {table.shape[0]} rows')

    def backward_fn(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, index, g)
        return (grad,)

    return apply_op('gather', table.data[index], (table,), backward_fn)


def dropout(a, p, training, rng=None):
    """Inverted dropout: kept entries are scaled by 1/(1-p) at train time, eval is a pass-through."""
    if not 0.0 <= p < 1.0:
        raise ValidationError(f'dropout probability must be in [0, 1), got {p}')
    if not training or p == 0.0:
        return a
    if rng is None:
        raise UsageError('dropout in training mode needs a seeded generator')
    mask = (rng.random(a.shape) >= p) / (1.0 - p)
    return apply_op('dropout', a.data * mask, (a,), lambda g: (g * mask,))


def backward(loss, tape):
    """Accumulate d(loss)/d(leaf) into the grad buffer of every reachable leaf that requires grad."""
    if loss.shape != (1, 1):
        raise DimensionError('backward', loss.shape, (1, 1))
    if tape is None or not len(tape):
        raise UsageError('backward needs a non-empty tape')
    if not tape.produced(loss):
        raise UsageError('backward called on a tensor that was not produced by this tape')

    grads = {id(loss): np.ones((1, 1))}
    for out, inputs, backward_fn in reversed(tape.records):
        g = grads.pop(id(out), None)
        if g is None:
            continue
        for t, tg in zip(inputs, backward_fn(g)):
            if tg is None or not t.requires_grad:
                continue
            if not np.all(np.isfinite(tg)):
                raise NonFiniteError(f'{out.name} produced a non-finite gradient')
            if tape.produced(t):
                prev = grads.get(id(t))
                grads[id(t)] = tg if prev is None else prev + tg
            elif t.grad is not None:
                t.grad += tg


class ParameterStore(object):
    """Named trainable tensors plus per-parameter optimizer state."""

    def __init__(self):
        self.params = {}
        self.state = {}
        self.step_count = 0

    def add(self, name, data):
        if name in self.params:
            raise ValidationError(f'duplicate parameter name [{name}]')
        self.params[name] = Tensor(data, requires_grad=True, name=name)
        return self.params[name]

    def __getitem__(self, name):
        return self.params[name]

    def __contains__(self, name):
        return name in self.params

    def __iter__(self):
        return iter(self.params)

    def __len__(self):
        return len(self.params)

    def items(self):
        return self.params.items()

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def snapshot(self):
        return {name: p.data.copy() for name, p in self.params.items()}

    def restore(self, snapshot):
        for name, data in snapshot.items():
            if self.params[name].shape != data.shape:
                raise DimensionError(f'restore {name}', self.params[name].shape, data.shape)
            self.params[name].data[...] = data

    def num_values(self):
        return sum(p.data.size for p in self.params.values())


def optimizer_step(store, method='adam', lr=0.001, lam=0.0):
    """One update with weight decay lam*p added to every gradient; gradients are zeroed afterwards."""
    if lr <= 0:
        raise ValidationError(f'learning rate must be > 0, got {lr}')
    if lam < 0:
        raise ValidationError(f'weight decay must be >= 0, got {lam}')
    if method not in ('sgd', 'adam'):
        raise ValidationError(f'unknown optimizer [{method}]')
    # all or nothing: no parameter moves when any gradient is bad
    for name, p in store.items():
        if not np.all(np.isfinite(p.grad)):
            raise NonFiniteError(f'non-finite gradient for parameter [{name}]')

    store.step_count += 1
    t = store.step_count
    for name, p in store.items():
        g = p.grad + lam * p.data if lam else p.grad
        if method == 'sgd':
            p.data -= lr * g
        else:
            st = store.state.get(name)
            if st is None:
                st = store.state[name] = {'m': np.zeros_like(p.data), 'v': np.zeros_like(p.data)}
            st['m'] = ADAM_BETA1 * st['m'] + (1 - ADAM_BETA1) * g
            st['v'] = ADAM_BETA2 * st['v'] + (1 - ADAM_BETA2) * g * g
            m_hat = st['m'] / (1 - ADAM_BETA1 ** t)
            v_hat = st['v'] / (1 - ADAM_BETA2 ** t)
            p.data -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        p.grad.fill(0.0)


class GradCheckReport(object):

    def __init__(self, max_rel_error, worst, num_checked, tol):
        self.max_rel_error = max_rel_error
        self.worst = worst
        self.num_checked = num_checked
        self.tol = tol

    @property
    def passed(self):
        return self.max_rel_error <= self.tol

    def __repr__(self):
        return (f'GradCheckReport(passed={self.passed}, max_rel_error={self.max_rel_error:.3e}, '
                f'worst={self.worst}, checked={self.num_checked})')


def grad_check(f, store, eps=1e-5, tol=1e-4, floor=1e-3):
    """
    Compare tape gradients of the scalar function f(store) with central differences.
    :param floor: denominator floor, entries with gradients below it are compared absolutely
    """
    if eps <= 0:
        raise ValidationError(f'eps must be > 0, got {eps}')

    first = f(store).item()
    if f(store).item() != first:
        raise UsageError('grad_check needs a deterministic function (disable dropout)')

    store.zero_grad()
    with ComputeTape() as tape:
        loss = f(store)
    backward(loss, tape)
    tape.clear()
    analytic = {name: p.grad.copy() for name, p in store.items()}
    store.zero_grad()

    max_err, worst, checked = 0.0, None, 0
    for name, p in store.items():
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = f(store).item()
            flat[i] = orig - eps
            down = f(store).item()
            flat[i] = orig
            numeric = (up - down) / (2 * eps)
            a = analytic[name].reshape(-1)[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            checked += 1
            if err > max_err:
                max_err, worst = err, (name, i, float(a), float(numeric))
    return GradCheckReport(max_err, worst, checked, tol)
