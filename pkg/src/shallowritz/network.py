"""One-hidden-layer network with hand-assembled derivatives.

The model is u(x) = w2 . act(W1 a(x) + b1) + b2 where a(x) is the input
x augmented with the interface level-set value, a(x) = (x, phi(x)), or x
alone for the non-augmented variant. The spatial gradient and the exact
parameter gradient of the energy loss are closed forms in the activation's
first two derivatives; no autodiff framework is involved.

Parameter vector layout (flat view): W1 row-major, then b1, w2, b2. With
input width d+1 the total count is (d+3)*N + 1 for N hidden units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .geometry import ConfigurationError, LevelSetFn, ProblemSpec
from .sampler import RngState, SampleBatch


@dataclass(frozen=True)
class Activation:
    """Activation with closed-form first and second derivatives."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]


def _sigmoid_d1(z):
    s = expit(z)
    return s * (1.0 - s)


def _sigmoid_d2(z):
    s = expit(z)
    return s * (1.0 - s) * (1.0 - 2.0 * s)


def _tanh_d1(z):
    return 1.0 - np.tanh(z) ** 2


def _tanh_d2(z):
    t = np.tanh(z)
    return -2.0 * t * (1.0 - t * t)


SIGMOID = Activation("sigmoid", expit, _sigmoid_d1, _sigmoid_d2)
TANH = Activation("tanh", np.tanh, _tanh_d1, _tanh_d2)
ACTIVATIONS = {"sigmoid": SIGMOID, "tanh": TANH}


@dataclass(frozen=True)
class NetParams:
    """Immutable parameter bundle: W1 (N, n_in), b1 (N,), w2 (N,), b2."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: float

    @property
    def width(self):
        return self.W1.shape[0]

    @property
    def in_dim(self):
        return self.W1.shape[1]

    @property
    def n_params(self):
        return self.W1.size + self.b1.size + self.W2.size + 1

    def flatten(self):
        """Flat vector [W1 row-major, b1, w2, b2]; round-trips bitwise."""
        return np.concatenate(
            [self.W1.ravel(), self.b1, self.W2, np.atleast_1d(self.b2)]
        )

    @staticmethod
    def unflatten(vector, width, in_dim):
        vector = np.asarray(vector)
        expected = width * in_dim + 2 * width + 1
        if vector.size != expected:
            raise ValueError(
                f"parameter vector has length {vector.size}, expected {expected}"
            )
        n_w1 = width * in_dim
        return NetParams(
            W1=vector[:n_w1].reshape(width, in_dim),
            b1=vector[n_w1 : n_w1 + width],
            W2=vector[n_w1 + width : n_w1 + 2 * width],
            b2=float(vector[-1]),
        )


def param_count(dim, width, augmented=True):
    """(d+3)N+1 with the level-set input, (d+2)N+1 without."""
    return (dim + 3) * width + 1 if augmented else (dim + 2) * width + 1


def init_params(dim, width, rng: RngState, augmented=True, scheme="uniform",
                phi_scale=10.0):
    """Seeded initialization: uniform(-1, 1) by default, Gaussian optional.

    The level-set column of W1 is widened by `phi_scale`: the solution's
    only non-smooth direction is the level-set coordinate, and starting
    with sharp ramps there lets the fixed-step optimizer resolve the
    derivative kink within the iteration budget (measured to roughly halve
    the max-norm error on the 2D benchmarks).
    """
    gen = rng.generator()
    in_dim = dim + 1 if augmented else dim
    if scheme == "uniform":
        flat = gen.uniform(-1.0, 1.0, size=param_count(dim, width, augmented))
    elif scheme == "gaussian":
        flat = gen.normal(0.0, 1.0 / np.sqrt(in_dim),
                          size=param_count(dim, width, augmented))
    else:
        raise ConfigurationError(f"unknown init scheme {scheme!r}")
    params = NetParams.unflatten(flat, width, in_dim)
    if augmented and phi_scale != 1.0:
        w1 = params.W1.copy()
        w1[:, dim] *= phi_scale
        params = NetParams(w1, params.b1, params.W2, params.b2)
    return params


def _as_batch(x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


def _augment(points, params: NetParams, phi: Optional[LevelSetFn]):
    if phi is not None:
        if points.shape[1] + 1 != params.in_dim:
            raise ValueError(
                f"augmented input needs width {points.shape[1] + 1}, "
                f"parameters expect {params.in_dim}"
            )
        return np.column_stack([points, phi.value(points)])
    if points.shape[1] != params.in_dim:
        raise ValueError(
            f"input has width {points.shape[1]}, parameters expect {params.in_dim}"
        )
    return points


def forward(params: NetParams, x, phi: Optional[LevelSetFn] = None, activation=SIGMOID):
    """Evaluate u(x) = w2 . act(W1 a + b1) + b2 with a = (x, phi(x))."""
    points, single = _as_batch(x)
    inputs = _augment(points, params, phi)
    hidden = activation.f(inputs @ params.W1.T + params.b1)
    u = hidden @ params.W2 + params.b2
    return float(u[0]) if single else u


def grad_x(params: NetParams, x, phi: Optional[LevelSetFn] = None, activation=SIGMOID):
    """Spatial gradient of the network output.

    du/dx_k = sum_j w2_j act'(z_j) (W1[j, k] + W1[j, -1] dphi/dx_k); the
    last column of W1 multiplies the level-set feature and is absent in the
    non-augmented variant.
    """
    points, single = _as_batch(x)
    inputs = _augment(points, params, phi)
    slope = activation.d1(inputs @ params.W1.T + params.b1) * params.W2
    if phi is not None:
        d = points.shape[1]
        grads = slope @ params.W1[:, :d]
        grads += (slope @ params.W1[:, d])[:, None] * phi.grad(points)
    else:
        grads = slope @ params.W1
    return grads[0] if single else grads


@dataclass(frozen=True)
class EvalRecord:
    """Intermediate quantities of one forward evaluation at one point."""

    x: np.ndarray
    augmented_input: np.ndarray
    pre_activations: np.ndarray
    hidden: np.ndarray
    u: float
    grad: np.ndarray


def eval_record(params: NetParams, x, phi: Optional[LevelSetFn] = None, activation=SIGMOID):
    points, _ = _as_batch(x)
    inputs = _augment(points, params, phi)
    z = (inputs @ params.W1.T + params.b1)[0]
    h = activation.f(z)
    return EvalRecord(
        x=points[0],
        augmented_input=inputs[0],
        pre_activations=z,
        hidden=h,
        u=float(h @ params.W2 + params.b2),
        grad=grad_x(params, x, phi, activation),
    )


class _Accumulator:
    """Parameter-gradient accumulator matching the flat layout."""

    def __init__(self, params: NetParams, dtype):
        self.W2_vec = params.W2
        self.dW1 = np.zeros_like(params.W1, dtype=dtype)
        self.db1 = np.zeros_like(params.b1, dtype=dtype)
        self.dW2 = np.zeros_like(params.W2, dtype=dtype)
        self.db2 = 0.0

    def add_value_term(self, inputs, hidden, d1, coeff):
        """Accumulate sum_i coeff_i * du(x_i)/dp."""
        self.dW2 += coeff @ hidden
        self.db2 += coeff.sum()
        scaled = d1 * coeff[:, None]
        self.db1 += self.W2_vec * scaled.sum(axis=0)
        self.dW1 += self.W2_vec[:, None] * (scaled.T @ inputs)

    def add_gradient_term(self, inputs, d1, d2, grads, back, chain, weight):
        """Accumulate weight * sum_i d(0.5 |grad u(x_i)|^2)/dp.

        `back[i, j] = sum_k B[i, j, k] grad[i, k]` where B is the effective
        first-layer map including the level-set chain rule, and `chain` is
        grad u pushed back through the input map (d+1 wide when augmented).
        """
        p1 = d1 * back
        p2 = d2 * back
        self.dW2 += weight * p1.sum(axis=0)
        self.db1 += weight * self.W2_vec * p2.sum(axis=0)
        self.dW1 += weight * self.W2_vec[:, None] * (p2.T @ inputs + d1.T @ chain)

    def flat(self):
        return np.concatenate(
            [self.dW1.ravel(), self.db1, self.dW2, np.atleast_1d(self.db2)]
        )


def _forward_parts(params, points, phi, activation):
    inputs = _augment(points, params, phi)
    z = inputs @ params.W1.T + params.b1
    hidden = activation.f(z)
    d1 = activation.d1(z)
    u = hidden @ params.W2 + params.b2
    return inputs, z, hidden, d1, u


def _loss_core(params, batch, problem, beta, activation, augmented, with_grad):
    if beta <= 0:
        raise ValueError(f"penalty beta must be positive, got {beta}")
    n_dom, n_int, n_bnd = batch.counts
    if min(n_dom, n_int, n_bnd) == 0:
        raise ConfigurationError("all three batch partitions must be non-empty")

    phi = problem.phi if augmented else None
    alpha = problem.alpha
    d = problem.dim

    w_dom = batch.vol_domain / n_dom
    w_int = batch.vol_interface / n_int
    w_bnd = batch.vol_boundary / n_bnd

    # domain points: values and spatial gradients
    dom_pts = batch.domain_points
    inputs_d, z_d, hidden_d, d1_d, u_d = _forward_parts(params, dom_pts, phi, activation)
    slope = d1_d * params.W2
    if augmented:
        phi_grad = phi.grad(dom_pts).astype(dom_pts.dtype, copy=False)
        grads = slope @ params.W1[:, :d]
        grads += (slope @ params.W1[:, d])[:, None] * phi_grad
    else:
        grads = slope @ params.W1
    f_vals = problem.f(dom_pts)
    domain_term = w_dom * (
        0.5 * (grads * grads).sum()
        + 0.5 * alpha * (u_d * u_d).sum()
        + (u_d * f_vals).sum()
    )

    # interface points: c * u
    int_pts = batch.interface_points
    inputs_i, _, hidden_i, d1_i, u_i = _forward_parts(params, int_pts, phi, activation)
    c_vals = problem.c(int_pts)
    interface_term = w_int * (c_vals * u_i).sum()

    # boundary points: beta * (u - g)^2
    bnd_pts = batch.boundary_points
    inputs_b, _, hidden_b, d1_b, u_b = _forward_parts(params, bnd_pts, phi, activation)
    mismatch = u_b - problem.g(bnd_pts)
    boundary_term = beta * w_bnd * (mismatch * mismatch).sum()

    loss = float(domain_term + interface_term + boundary_term)
    terms = (float(domain_term), float(interface_term), float(boundary_term))
    if not with_grad:
        return loss, terms, None

    acc = _Accumulator(params, dom_pts.dtype)
    acc.add_value_term(inputs_d, hidden_d, d1_d, w_dom * (alpha * u_d + f_vals))
    acc.add_value_term(inputs_i, hidden_i, d1_i, w_int * c_vals)
    acc.add_value_term(inputs_b, hidden_b, d1_b, 2.0 * beta * w_bnd * mismatch)

    d2_d = activation.d2(z_d)
    if augmented:
        phi_dot = (grads * phi_grad).sum(axis=1)
        back = grads @ params.W1[:, :d].T + phi_dot[:, None] * params.W1[:, d]
        chain = np.column_stack([grads, phi_dot])
    else:
        back = grads @ params.W1.T
        chain = grads
    acc.add_gradient_term(inputs_d, d1_d, d2_d, grads, back, chain, w_dom)

    return loss, terms, acc.flat()


def loss_param_grad(params: NetParams, batch: SampleBatch, problem: ProblemSpec,
                    beta, activation=SIGMOID, augmented=True):
    """Discrete energy loss and its exact gradient w.r.t. all parameters.

    The loss is the Monte-Carlo energy: the domain average of
    0.5 |grad u|^2 + alpha/2 u^2 + u f scaled by Vol(domain), plus the
    interface average of c u scaled by Vol(interface), plus beta times the
    boundary average of (u - g)^2 scaled by Vol(boundary). Point sums run
    in batch order, so results are bitwise reproducible in serial mode.
    """
    loss, _, grad = _loss_core(params, batch, problem, beta, activation, augmented, True)
    return loss, grad


def loss_value(params, batch, problem, beta, activation=SIGMOID, augmented=True):
    """Loss only (used for finite-difference checks and test-loss traces)."""
    loss, _, _ = _loss_core(params, batch, problem, beta, activation, augmented, False)
    return loss


def loss_terms(params, batch, problem, beta, activation=SIGMOID, augmented=True):
    """(domain, interface, boundary) contributions; they sum to the loss."""
    _, terms, _ = _loss_core(params, batch, problem, beta, activation, augmented, False)
    return terms


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(path, params: NetParams, dim, activation="sigmoid", augmented=True):
    """Write parameters as JSON with full-precision decimal floats."""
    payload = {
        "d": int(dim),
        "N": int(params.width),
        "activation": activation,
        "augmented": bool(augmented),
        "W1": [[float(v) for v in row] for row in params.W1],
        "b1": [float(v) for v in params.b1],
        "W2": [float(v) for v in params.W2],
        "b2": float(params.b2),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_checkpoint(path):
    """Load a checkpoint; validates the parameter-count bookkeeping."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    dim = int(payload["d"])
    width = int(payload["N"])
    augmented = bool(payload.get("augmented", True))
    params = NetParams(
        W1=np.asarray(payload["W1"], dtype=float),
        b1=np.asarray(payload["b1"], dtype=float),
        W2=np.asarray(payload["W2"], dtype=float),
        b2=float(payload["b2"]),
    )
    expected_in = dim + 1 if augmented else dim
    if params.W1.shape != (width, expected_in):
        raise ValueError(
            f"checkpoint W1 has shape {params.W1.shape}, expected {(width, expected_in)}"
        )
    if params.n_params != param_count(dim, width, augmented):
        raise ValueError(
            f"checkpoint holds {params.n_params} parameters, expected "
            f"{param_count(dim, width, augmented)}"
        )
    meta = {"d": dim, "N": width, "activation": payload["activation"],
            "augmented": augmented}
    return params, meta
