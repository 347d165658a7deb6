"""Energy minimization loop, optimizers, error metrics, and the dense
energy oracle used as ground truth for loss values."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import (
    CircleInterface,
    ConfigurationError,
    EllipseInterface,
    PolarCurve,
    ProblemSpec,
    RectangleFaces,
    SphereInterface,
    SphereRadius,
)
from .network import (
    ACTIVATIONS,
    NetParams,
    loss_param_grad,
    loss_value,
    loss_terms,
    param_count,
)
from .sampler import RngState, fixed_batch, make_batch, sample_domain

RESAMPLE = "resample-per-iteration"
FIXED_MIDPOINT = "fixed-midpoint"

# deterministic stream tag for the oracle's Monte-Carlo fallback in 6D
_ORACLE_SEED = 321_654


class TrainingDiverged(RuntimeError):
    """Raised when the loss or gradient turns non-finite during training."""

    def __init__(self, iteration, detail):
        super().__init__(f"non-finite value at iteration {iteration}: {detail}")
        self.iteration = iteration
        self.detail = detail


@dataclass
class TrainConfig:
    """Everything a training run needs besides the problem and init."""

    optimizer: str = "adam"
    learning_rate: float = 5e-3
    iterations: int = 50_000
    beta: float = 200.0
    m_domain: int = 200
    m_interface: int = 80
    m_boundary: int = 80
    sampling: str = RESAMPLE
    seed: int = 0
    trace_stride: int = 100
    precision: str = "double"
    activation: str = "sigmoid"
    init_scheme: str = "uniform"
    init_phi_scale: float = 10.0
    augmented: bool = True
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    test_points: int = 0  # fresh-point loss re-evaluation at trace records; 0 = off

    def validate(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.beta <= 0:
            raise ValueError("penalty beta must be positive")
        if min(self.m_domain, self.m_interface, self.m_boundary) < 1:
            raise ValueError("batch sizes must be >= 1")
        if self.sampling not in (RESAMPLE, FIXED_MIDPOINT):
            raise ConfigurationError(f"unknown sampling mode {self.sampling!r}")
        if self.precision not in ("double", "single"):
            raise ConfigurationError(f"unknown precision {self.precision!r}")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if self.trace_stride < 1:
            raise ValueError("trace stride must be >= 1")

    @property
    def dtype(self):
        return np.float64 if self.precision == "double" else np.float32


@dataclass
class AdamState:
    """First/second moment estimates plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def zeros(n, beta1=0.9, beta2=0.999, eps=1e-8, dtype=np.float64):
        return AdamState(np.zeros(n, dtype=dtype), np.zeros(n, dtype=dtype),
                         0, beta1, beta2, eps)


def adam_step(state: AdamState, params, grad, learning_rate):
    """Bias-corrected Adam update; mutates `state`, returns new parameters."""
    if not np.isfinite(grad).all():
        raise ValueError("non-finite gradient entries in adam_step")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    return params - learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)


def sgd_step(params, grad, learning_rate):
    """Plain gradient step p <- p - lr * grad."""
    if not np.isfinite(grad).all():
        raise ValueError("non-finite gradient entries in sgd_step")
    return params - learning_rate * grad


@dataclass
class LossTrace:
    """Per-recorded-iteration loss history (strictly increasing indices)."""

    iterations: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)  # None where not evaluated
    domain_term: list = field(default_factory=list)
    interface_term: list = field(default_factory=list)
    boundary_term: list = field(default_factory=list)

    def append(self, iteration, train, terms, test=None):
        if self.iterations and iteration <= self.iterations[-1]:
            raise ValueError("trace iterations must be strictly increasing")
        self.iterations.append(int(iteration))
        self.train_loss.append(float(train))
        self.test_loss.append(None if test is None else float(test))
        self.domain_term.append(float(terms[0]))
        self.interface_term.append(float(terms[1]))
        self.boundary_term.append(float(terms[2]))

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration", "train_loss", "test_loss",
                 "domain_term", "interface_term", "boundary_term"]
            )
            for row in zip(self.iterations, self.train_loss, self.test_loss,
                           self.domain_term, self.interface_term, self.boundary_term):
                writer.writerow(["" if v is None else v for v in row])


def _diagnose_nonfinite(loss, grad, terms):
    labels = ("domain", "interface", "boundary")
    bad = [name for name, value in zip(labels, terms) if not math.isfinite(value)]
    if bad:
        return f"non-finite loss term(s): {', '.join(bad)}"
    if not math.isfinite(loss):
        return "non-finite total loss"
    return f"non-finite gradient ({int((~np.isfinite(grad)).sum())} entries)"


def train(problem: ProblemSpec, params: NetParams, cfg: TrainConfig):
    """Run the full optimization; returns final parameters and the trace.

    Resampling mode draws the batch for iteration k from the stream
    (seed, k), so any single iteration is reproducible in isolation. No
    early stopping: exactly cfg.iterations steps are taken.
    """
    cfg.validate()
    expected = param_count(problem.dim, params.width, cfg.augmented)
    if params.n_params != expected:
        raise ValueError(
            f"parameter count {params.n_params} does not match problem "
            f"dimension {problem.dim} (expected {expected})"
        )
    activation = ACTIVATIONS[cfg.activation]
    dtype = cfg.dtype
    width, in_dim = params.width, params.in_dim

    flat = params.flatten().astype(dtype)
    adam = AdamState.zeros(flat.size, cfg.adam_beta1, cfg.adam_beta2,
                           cfg.adam_eps, dtype)

    fixed = None
    if cfg.sampling == FIXED_MIDPOINT:
        per_axis = math.isqrt(cfg.m_domain)
        if per_axis * per_axis != cfg.m_domain:
            raise ConfigurationError(
                f"fixed-midpoint mode needs a square domain count, got {cfg.m_domain}"
            )
        fixed = fixed_batch(problem, per_axis, cfg.m_interface, cfg.m_boundary)
        fixed = fixed.astype(dtype)

    root = RngState(cfg.seed)
    trace = LossTrace()
    test_evals = 0
    last = cfg.iterations - 1

    for iteration in range(cfg.iterations):
        if fixed is not None:
            batch = fixed
        else:
            batch = make_batch(problem, cfg.m_domain, cfg.m_interface,
                               cfg.m_boundary, root.child(iteration))
            if dtype is not np.float64:
                batch = batch.astype(dtype)

        net = NetParams.unflatten(flat, width, in_dim)
        with np.errstate(all="ignore"):  # divergence is caught explicitly below
            loss, grad = loss_param_grad(net, batch, problem, cfg.beta,
                                         activation, cfg.augmented)
        if not (math.isfinite(loss) and np.isfinite(grad).all()):
            terms = loss_terms(net, batch, problem, cfg.beta, activation, cfg.augmented)
            raise TrainingDiverged(iteration, _diagnose_nonfinite(loss, grad, terms))

        if iteration % cfg.trace_stride == 0 or iteration == last:
            terms = loss_terms(net, batch, problem, cfg.beta, activation, cfg.augmented)
            test = None
            if cfg.test_points > 0:
                test = _fresh_test_loss(problem, net, cfg, activation,
                                        root.child(cfg.iterations + test_evals))
                test_evals += 1
            trace.append(iteration, loss, terms, test)

        if cfg.optimizer == "adam":
            flat = adam_step(adam, flat, grad, cfg.learning_rate)
        else:
            flat = sgd_step(flat, grad, cfg.learning_rate)

    return NetParams.unflatten(flat, width, in_dim), trace


def _fresh_test_loss(problem, net, cfg, activation, rng):
    """Loss on a fresh batch: cfg.test_points in the domain, the training
    interface/boundary counts scaled by the same factor (capped sensibly)."""
    scale = max(cfg.test_points // max(cfg.m_domain, 1), 1)
    m_int = min(cfg.m_interface * scale, 100_000)
    m_bnd = min(cfg.m_boundary * scale, 100_000)
    batch = make_batch(problem, cfg.test_points, m_int, m_bnd, rng)
    if cfg.dtype is not np.float64:
        batch = batch.astype(cfg.dtype)
    return loss_value(net, batch, problem, cfg.beta, activation, cfg.augmented)


# ---------------------------------------------------------------------------
# error metrics
# ---------------------------------------------------------------------------


@dataclass
class ErrorReport:
    """Reportable outcome of a run; serializes to/from plain dicts."""

    problem_id: int
    dim: int
    width: int
    n_params: int
    m_domain: int
    m_interface: int
    m_boundary: int
    beta: float
    seed: int
    rel_linf: float
    rel_l2: float
    augmented: bool = True
    wall_clock_s: Optional[float] = None
    final_loss: Optional[float] = None
    oracle_energy: Optional[float] = None
    optimizer: Optional[str] = None
    n_test: Optional[int] = None

    def to_dict(self):
        return {
            "problem_id": self.problem_id,
            "dim": self.dim,
            "width": self.width,
            "n_params": self.n_params,
            "m_domain": self.m_domain,
            "m_interface": self.m_interface,
            "m_boundary": self.m_boundary,
            "beta": self.beta,
            "seed": self.seed,
            "rel_linf": self.rel_linf,
            "rel_l2": self.rel_l2,
            "augmented": self.augmented,
            "wall_clock_s": self.wall_clock_s,
            "final_loss": self.final_loss,
            "oracle_energy": self.oracle_energy,
            "optimizer": self.optimizer,
            "n_test": self.n_test,
        }

    @staticmethod
    def from_dict(payload):
        report = ErrorReport(**payload)
        expected = param_count(report.dim, report.width, report.augmented)
        if report.n_params != expected:
            raise ValueError(
                f"report has n_params {report.n_params}, bookkeeping expects {expected}"
            )
        return report


def relative_errors(predict: Callable[[np.ndarray], np.ndarray],
                    problem: ProblemSpec, n_test, rng: RngState):
    """Relative max-norm and RMS-norm errors on fresh uniform test points."""
    if n_test < 1:
        raise ValueError(f"n_test must be >= 1, got {n_test}")
    points = sample_domain(problem.domain, n_test, rng)
    predicted = np.empty(n_test)
    for start in range(0, n_test, 1 << 18):
        chunk = points[start : start + (1 << 18)]
        predicted[start : start + len(chunk)] = predict(chunk)
    exact = problem.u_exact(points)
    diff = predicted - exact
    rel_linf = float(np.abs(diff).max() / np.abs(exact).max())
    rel_l2 = float(np.sqrt((diff**2).sum()) / np.sqrt((exact**2).sum()))
    return rel_linf, rel_l2


def evaluate_errors(problem: ProblemSpec, params: NetParams, n_test, rng: RngState,
                    activation=None, augmented=True):
    """ErrorReport with the paper-style discrete relative norms."""
    from .network import SIGMOID, forward

    act = activation or SIGMOID
    phi = problem.phi if augmented else None
    rel_linf, rel_l2 = relative_errors(
        lambda pts: forward(params, pts, phi, act), problem, n_test, rng
    )
    return ErrorReport(
        problem_id=problem.example_id,
        dim=problem.dim,
        width=params.width,
        n_params=params.n_params,
        m_domain=0,
        m_interface=0,
        m_boundary=0,
        beta=0.0,
        seed=rng.seed,
        rel_linf=rel_linf,
        rel_l2=rel_l2,
        augmented=augmented,
        n_test=n_test,
    )


# ---------------------------------------------------------------------------
# dense energy oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyEstimate:
    """Converged (or flagged) dense estimate of the penalized energy."""

    value: float
    previous: float
    rel_change: float
    converged: bool
    resolution: int

    def __float__(self):
        return self.value


def energy_oracle(problem: ProblemSpec, u_eval, beta, resolution=256,
                  rel_tol=1e-4, max_doublings=4):
    """Dense deterministic estimate of the penalized energy of a candidate.

    `u_eval` maps (n, d) points to (values, gradients). The estimate is
    recomputed at doubled resolution until successive values agree to
    `rel_tol` relative; if the cap is hit both estimates are reported with
    converged=False.
    """
    if beta <= 0:
        raise ValueError(f"penalty beta must be positive, got {beta}")
    if resolution < 128 and problem.dim <= 3:
        raise ValueError("resolution must be >= 128 per axis in 2D/3D")

    previous = _energy_value(problem, u_eval, beta, resolution)
    current = previous
    res = resolution
    for _ in range(max_doublings):
        res *= 2
        current, previous = _energy_value(problem, u_eval, beta, res), current
        rel_change = abs(current - previous) / max(abs(current), 1e-300)
        if rel_change < rel_tol:
            return EnergyEstimate(current, previous, rel_change, True, res)
    rel_change = abs(current - previous) / max(abs(current), 1e-300)
    return EnergyEstimate(current, previous, rel_change, False, res)


def _energy_value(problem, u_eval, beta, resolution):
    total = 0.0
    alpha = problem.alpha
    for points, weights in _domain_quadrature(problem, resolution):
        values, grads = u_eval(points)
        total += float(
            (weights * (0.5 * (grads**2).sum(axis=1)
                        + 0.5 * alpha * values**2
                        + values * problem.f(points))).sum()
        )
    points, weights = _interface_quadrature(problem, resolution)
    values, _ = u_eval(points)
    total += float((weights * problem.c(points) * values).sum())
    points, weights = _boundary_quadrature(problem, resolution)
    values, _ = u_eval(points)
    total += float(beta * (weights * (values - problem.g(points)) ** 2).sum())
    return total


def _chunk_rows(points, weights, chunk=1 << 19):
    for start in range(0, len(points), chunk):
        yield points[start : start + chunk], weights[start : start + chunk]


def _domain_quadrature(problem, resolution):
    """Yield (points, weights) chunks of a dense midpoint rule on the domain."""
    boundary = problem.domain.boundary
    dim = problem.dim

    if isinstance(boundary, RectangleFaces):
        lo = np.asarray(boundary.lo)
        hi = np.asarray(boundary.hi)
        steps = (hi - lo) / resolution
        axes = [lo[k] + (np.arange(resolution) + 0.5) * steps[k] for k in range(dim)]
        cell = float(np.prod(steps))
        # slab by the first axis to bound memory in 3D
        tail = np.meshgrid(*axes[1:], indexing="ij") if dim > 1 else []
        tail_cols = [m.ravel() for m in tail]
        n_tail = len(tail_cols[0]) if tail_cols else 1
        for x0 in axes[0]:
            cols = [np.full(n_tail, x0)] + tail_cols
            yield np.column_stack(cols), np.full(n_tail, cell)
        return

    if isinstance(boundary, PolarCurve):
        n_theta = 4 * resolution
        n_rad = resolution
        theta = (np.arange(n_theta) + 0.5) * (2 * math.pi / n_theta)
        s = (np.arange(n_rad) + 0.5) / n_rad
        r_theta = boundary.radius(theta)
        tt, ss = np.meshgrid(theta, s, indexing="ij")
        rr = ss * boundary.radius(tt)
        points = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
        # dx dy = r dr dtheta with r = s r(theta): jacobian s r(theta)^2
        jac = (ss * np.broadcast_to(r_theta[:, None] ** 2, ss.shape)).ravel()
        weights = jac * (2 * math.pi / n_theta) / n_rad
        yield from _chunk_rows(points, weights)
        return

    if isinstance(boundary, SphereRadius):
        # high dimension: deterministic-seed Monte Carlo
        n = max(1_000_000, resolution * 8192)
        rng = RngState(_ORACLE_SEED, (dim, n))
        points = sample_domain(problem.domain, n, rng)
        weights = np.full(n, problem.domain.volume / n)
        yield from _chunk_rows(points, weights)
        return

    raise ConfigurationError(f"unsupported boundary descriptor {boundary!r}")


def _interface_quadrature(problem, resolution):
    shape = problem.interface.shape
    if isinstance(shape, CircleInterface):
        n = 64 * resolution
        theta = (np.arange(n) + 0.5) * (2 * math.pi / n)
        points = shape.radius * np.column_stack([np.cos(theta), np.sin(theta)])
        return points, np.full(n, shape.radius * 2 * math.pi / n)
    if isinstance(shape, EllipseInterface):
        n = 64 * resolution
        theta = (np.arange(n) + 0.5) * (2 * math.pi / n)
        points = np.column_stack(
            [shape.semi_x * np.cos(theta), shape.semi_y * np.sin(theta)]
        )
        speed = np.sqrt(
            (shape.semi_x * np.sin(theta)) ** 2 + (shape.semi_y * np.cos(theta)) ** 2
        )
        return points, speed * (2 * math.pi / n)
    if isinstance(shape, SphereInterface):
        if shape.dim == 3:
            return _sphere3_quadrature(shape.radius, resolution)
        n = max(1_000_000, resolution * 4096)
        rng = RngState(_ORACLE_SEED, (7, shape.dim, n))
        gen = rng.generator()
        direction = gen.standard_normal((n, shape.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        points = shape.radius * direction
        return points, np.full(n, problem.interface.surface_volume / n)
    raise ConfigurationError(f"unsupported interface shape {shape!r}")


def _sphere3_quadrature(radius, resolution):
    n_polar = resolution
    n_azim = 2 * resolution
    polar = (np.arange(n_polar) + 0.5) * (math.pi / n_polar)
    azim = (np.arange(n_azim) + 0.5) * (2 * math.pi / n_azim)
    pp, aa = np.meshgrid(polar, azim, indexing="ij")
    points = radius * np.column_stack(
        [
            (np.sin(pp) * np.cos(aa)).ravel(),
            (np.sin(pp) * np.sin(aa)).ravel(),
            np.cos(pp).ravel(),
        ]
    )
    weights = (radius**2 * np.sin(pp)).ravel() * (math.pi / n_polar) * (2 * math.pi / n_azim)
    return points, weights


def _boundary_quadrature(problem, resolution):
    boundary = problem.domain.boundary
    dim = problem.dim

    if isinstance(boundary, RectangleFaces):
        lo = np.asarray(boundary.lo)
        hi = np.asarray(boundary.hi)
        pieces = []
        wts = []
        n = 64 * resolution if dim == 2 else 2 * resolution
        for axis in range(dim):
            free = [k for k in range(dim) if k != axis]
            grids = [
                lo[k] + (np.arange(n) + 0.5) * ((hi[k] - lo[k]) / n) for k in free
            ]
            mesh = np.meshgrid(*grids, indexing="ij") if grids else []
            cols = [m.ravel() for m in mesh]
            count = len(cols[0]) if cols else 1
            area = float(np.prod([(hi[k] - lo[k]) / n for k in free]))
            for value in (lo[axis], hi[axis]):
                face = np.empty((count, dim))
                face[:, axis] = value
                for k, col in zip(free, cols):
                    face[:, k] = col
                pieces.append(face)
                wts.append(np.full(count, area))
        return np.concatenate(pieces), np.concatenate(wts)

    if isinstance(boundary, PolarCurve):
        n = 64 * resolution
        theta = (np.arange(n) + 0.5) * (2 * math.pi / n)
        radius = boundary.radius(theta)
        points = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
        density = np.sqrt(radius**2 + boundary.radius_prime(theta) ** 2)
        return points, density * (2 * math.pi / n)

    if isinstance(boundary, SphereRadius):
        if dim == 3:
            return _sphere3_quadrature(boundary.radius, resolution)
        n = max(1_000_000, resolution * 4096)
        rng = RngState(_ORACLE_SEED, (9, dim, n))
        gen = rng.generator()
        direction = gen.standard_normal((n, dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        points = boundary.radius * direction
        return points, np.full(n, problem.domain.boundary_volume / n)

    raise ConfigurationError(f"unsupported boundary descriptor {boundary!r}")


def network_energy_eval(params: NetParams, problem: ProblemSpec,
                        activation=None, augmented=True):
    """Adapter turning a trained network into an oracle-compatible evaluator."""
    from .network import SIGMOID, forward, grad_x

    act = activation or SIGMOID
    phi = problem.phi if augmented else None

    def evaluate(points):
        return forward(params, points, phi, act), grad_x(params, points, phi, act)

    return evaluate
