"""Order-3 forward-mode jets, the tanh MLP ansatz, parameter gradients and Adam.

A :class:`Jet3` carries a value and its first three derivatives with respect
to a single input variable.  Fields may be Python floats or numpy arrays of a
common (broadcastable) shape, so one jet can describe a whole batch of input
points at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Jet3:
    v: np.ndarray | float
    d1: np.ndarray | float = 0.0
    d2: np.ndarray | float = 0.0
    d3: np.ndarray | float = 0.0

    @classmethod
    def constant(cls, c):
        return cls(c, 0.0 * c, 0.0 * c, 0.0 * c)

    def __add__(self, other):
        if isinstance(other, Jet3):
            return jet_add(self, other)
        return Jet3(self.v + other, self.d1, self.d2, self.d3)

    __radd__ = __add__

    def __neg__(self):
        return jet_scale(self, -1.0)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet3):
            return jet_mul(self, other)
        return jet_scale(self, other)

    __rmul__ = __mul__

    def slots(self):
        return (self.v, self.d1, self.d2, self.d3)


def jet_lift(x):
    """Seed the independent variable: ``(x, 1, 0, 0)``."""
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    one = np.ones_like(x) if np.ndim(x) else 1.0
    zero = np.zeros_like(x) if np.ndim(x) else 0.0
    return Jet3(x, one, zero, zero)


def jet_add(a: Jet3, b: Jet3) -> Jet3:
    return Jet3(a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3)


def jet_scale(a: Jet3, c) -> Jet3:
    return Jet3(c * a.v, c * a.d1, c * a.d2, c * a.d3)


def jet_mul(a: Jet3, b: Jet3) -> Jet3:
    # Leibniz rule to third order
    return Jet3(
        a.v * b.v,
        a.d1 * b.v + a.v * b.d1,
        a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
        a.d3 * b.v + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.v * b.d3,
    )


def _unary_derivs(name: str, v):
    if name == "tanh":
        t = np.tanh(v)
        f1 = 1.0 - t * t
        return t, f1, -2.0 * t * f1, (6.0 * t * t - 2.0) * f1
    if name == "sin":
        s, c = np.sin(v), np.cos(v)
        return s, c, -s, -c
    if name == "cos":
        s, c = np.sin(v), np.cos(v)
        return c, -s, -c, s
    raise ValueError(f"unsupported unary function {name!r}")


def jet_apply_unary(f: str, a: Jet3) -> Jet3:
    """Compose ``f`` with a jet using Faa di Bruno's formula up to order 3."""
    f0, f1, f2, f3 = _unary_derivs(f, a.v)
    return Jet3(
        f0,
        f1 * a.d1,
        f2 * a.d1 ** 2 + f1 * a.d2,
        f3 * a.d1 ** 3 + 3.0 * f2 * a.d1 * a.d2 + f1 * a.d3,
    )


class ShapeError(ValueError):
    """Raised when network parameters do not chain with the layer sizes."""


def _n_params(layer_sizes) -> int:
    return sum(a * b + b for a, b in zip(layer_sizes[:-1], layer_sizes[1:]))


@dataclass(frozen=True)
class Mlp:
    """Fully connected tanh network; the last layer is linear.

    ``weights[l]`` has shape ``(fan_in, fan_out)`` so a batch of row vectors
    propagates as ``h @ W + b``.  All parameters live in one flat buffer,
    ``params``; ``weights`` and ``biases`` are views into it.
    """

    layer_sizes: tuple
    params: np.ndarray
    activation: str = "tanh"
    weights: list = field(init=False, repr=False, compare=False)
    biases: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or any(s <= 0 for s in sizes):
            raise ShapeError(f"invalid layer sizes {sizes}")
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")
        params = np.asarray(self.params, dtype=float)
        if params.shape != (_n_params(sizes),):
            raise ShapeError(
                f"expected {_n_params(sizes)} parameters for {sizes}, got shape {params.shape}"
            )
        weights, biases, k = [], [], 0
        for a, b in zip(sizes[:-1], sizes[1:]):
            weights.append(params[k:k + a * b].reshape(a, b))
            k += a * b
            biases.append(params[k:k + b])
            k += b
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @classmethod
    def from_layers(cls, weights, biases, activation="tanh"):
        weights = [np.atleast_2d(np.asarray(w, dtype=float)) for w in weights]
        biases = [np.atleast_1d(np.asarray(b, dtype=float)) for b in biases]
        if len(weights) != len(biases) or not weights:
            raise ShapeError("weights and biases must be non-empty and of equal length")
        sizes = [weights[0].shape[0]]
        for w, b in zip(weights, biases):
            if w.shape[0] != sizes[-1] or b.shape != (w.shape[1],):
                raise ShapeError(f"layer shapes do not chain: {w.shape}, {b.shape}")
            sizes.append(w.shape[1])
        flat = np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(weights, biases)])
        return cls(tuple(sizes), flat, activation)

    def with_params(self, params) -> "Mlp":
        return Mlp(self.layer_sizes, params, self.activation)

    @property
    def n_params(self) -> int:
        return self.params.size

    def __call__(self, x) -> Jet3:
        return mlp_forward(self, x)


def init_net(seed: int, layer_sizes=(1, 32, 32, 1)) -> Mlp:
    """Glorot-uniform weights, zero biases, deterministic in ``seed``."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s <= 0 for s in sizes):
        raise ShapeError(f"invalid layer sizes {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for a, b in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (a + b))
        weights.append(rng.uniform(-limit, limit, size=(a, b)))
        biases.append(np.zeros(b))
    return Mlp.from_layers(weights, biases)


def _forward(net: Mlp, x):
    """Forward jet pass over a 1-D batch of inputs; returns (output slots, cache).

    The four jet slots are stacked as row blocks of one ``(4n, width)`` array so
    each layer needs a single matrix product.
    """
    if net.layer_sizes[0] != 1 or net.layer_sizes[-1] != 1:
        raise ShapeError("scalar benchmark needs layer sizes starting and ending with 1")
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    n = x.shape[0]
    h = np.concatenate([x, np.ones_like(x), np.zeros((2 * n, 1))])
    cache = []
    n_layers = len(net.weights)
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ W
        z[:n] += b
        if i == n_layers - 1:
            cache.append((h, None))
            return [z[k * n:(k + 1) * n, 0] for k in range(4)], cache
        t = np.tanh(z[:n])
        z1, z2, z3 = z[n:2 * n], z[2 * n:3 * n], z[3 * n:]
        f1 = 1.0 - t * t
        f2 = -2.0 * t * f1
        f3 = (6.0 * t * t - 2.0) * f1
        z1sq = z1 * z1
        a = np.empty_like(z)
        a[:n] = t
        a[n:2 * n] = f1 * z1
        a[2 * n:3 * n] = f2 * z1sq + f1 * z2
        a[3 * n:] = f3 * z1sq * z1 + 3.0 * f2 * z1 * z2 + f1 * z3
        cache.append((h, (t, f1, f2, f3, z1, z2, z3)))
        h = a
    raise AssertionError("unreachable")


def mlp_forward(net: Mlp, x) -> Jet3:
    """Exact value and first three input derivatives of the network at ``x``.

    Scalar ``x`` gives a jet of floats, array ``x`` a jet of 1-D arrays.
    """
    scalar = np.ndim(x) == 0
    out, _ = _forward(net, np.atleast_1d(x))
    if scalar:
        return Jet3(*(float(s[0]) for s in out))
    shape = np.shape(x)
    return Jet3(*(s.reshape(shape) for s in out))


def mlp_backward(net: Mlp, x, adjoint, cache=None) -> np.ndarray:
    """Reverse accumulation through the jet forward pass.

    ``adjoint`` holds dL/du, dL/du', dL/du'', dL/du''' at each point of ``x``
    (any slot may be ``None``).  Returns dL/dparams in the flat layout of
    ``net.params``.  ``cache`` may be passed from a previous ``_forward``
    call at the same points to skip recomputing the forward pass.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if cache is None:
        _, cache = _forward(net, x)
    n = x.size
    g = np.zeros((4 * n, 1))
    for k, a in enumerate(adjoint):
        if a is not None:
            g[k * n:(k + 1) * n, 0] = a
    grads_w, grads_b = [], []
    for i in range(len(net.weights) - 1, -1, -1):
        W = net.weights[i]
        h, act = cache[i]
        if act is not None:
            # g holds adjoints of the activation outputs; pull back through tanh
            t, f1, f2, f3, z1, z2, z3 = act
            A0, A1, A2, A3 = g[:n], g[n:2 * n], g[2 * n:3 * n], g[3 * n:]
            z1sq = z1 * z1
            F1 = A1 * z1 + A2 * z2 + A3 * z3
            F2 = A2 * z1sq + 3.0 * A3 * z1 * z2
            F3 = A3 * z1sq * z1
            T = (A0 - 2.0 * t * F1 + (4.0 * t * t - 2.0 * f1) * F2
                 + (12.0 * t * f1 - 2.0 * t * (6.0 * t * t - 2.0)) * F3)
            gz = np.empty_like(g)
            gz[:n] = T * f1
            gz[n:2 * n] = A1 * f1 + 2.0 * A2 * f2 * z1 + A3 * (3.0 * f3 * z1sq + 3.0 * f2 * z2)
            gz[2 * n:3 * n] = A2 * f1 + 3.0 * A3 * f2 * z1
            gz[3 * n:] = A3 * f1
            g = gz
        grads_w.append(h.T @ g)
        grads_b.append(g[:n].sum(axis=0))
        if i > 0:
            g = g @ W.T
    grads_w.reverse()
    grads_b.reverse()
    return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(grads_w, grads_b)])


class NumericError(ArithmeticError):
    """Non-finite loss or gradient."""


def param_gradient(net: Mlp, loss) -> np.ndarray:
    """Gradient of ``loss`` with respect to every network parameter.

    ``loss`` is an objective exposing ``points`` (the inputs it reads the
    network at) and ``evaluate(jet) -> (value, adjoint)``, where ``adjoint``
    is the 4-tuple of partial derivatives of the value with respect to the
    jet slots at each point.  See :class:`pinnlab.loss.PinnObjective`.
    """
    return value_and_gradient(net, loss)[1]


def value_and_gradient(net: Mlp, loss):
    points = np.asarray(loss.points, dtype=float).ravel()
    # overflow shows up as a non-finite value, reported below
    with np.errstate(over="ignore", invalid="ignore"):
        out, cache = _forward(net, points)
        value, adjoint = loss.evaluate(Jet3(*out))
    if not np.isfinite(value):
        raise NumericError(f"loss is not finite: {value}")
    return value, mlp_backward(net, points, adjoint, cache)


@dataclass(frozen=True)
class AdamState:
    step: int
    m: np.ndarray
    v: np.ndarray
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8

    @classmethod
    def zeros(cls, n_params: int, lr: float = 1e-3, **kw):
        return cls(0, np.zeros(n_params), np.zeros(n_params), lr, **kw)


def adam_step(state: AdamState, net: Mlp, grads) -> tuple[AdamState, Mlp]:
    grads = np.asarray(grads, dtype=float)
    if grads.shape != state.m.shape or grads.shape != net.params.shape:
        raise ShapeError(f"gradient shape {grads.shape} does not match parameters")
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1 ** step)
    v_hat = v / (1.0 - state.beta2 ** step)
    params = net.params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps_adam)
    new_state = AdamState(step, m, v, state.lr, state.beta1, state.beta2, state.eps_adam)
    return new_state, net.with_params(params)
