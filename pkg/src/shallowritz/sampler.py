"""Uniform point generation on domains, boundaries, and interfaces.

All samplers are pure functions of an :class:`RngState`, so a batch can be
regenerated from (seed, iteration index) alone. Streams are derived with a
counter-based Philox generator and never shared mutably between callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CircleInterface,
    ConfigurationError,
    DomainSpec,
    EllipseInterface,
    InterfaceSpec,
    PolarCurve,
    ProblemSpec,
    RectangleFaces,
    SphereInterface,
    SphereRadius,
)

# rejection sampling below this acceptance rate indicates a misconfigured
# geometry (silent near-infinite loops become diagnosable errors)
REJECTION_FLOOR = 0.01
_REJECTION_MIN_DRAWS = 10_000


@dataclass(frozen=True)
class RngState:
    """A splittable, replayable random stream: (seed, derivation path)."""

    seed: int
    path: tuple = ()

    def child(self, index):
        """Derive an independent substream; same (seed, path) -> same points."""
        return RngState(self.seed, self.path + (int(index),))

    def generator(self):
        entropy = (int(self.seed),) + tuple(int(i) for i in self.path)
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class SampleBatch:
    """Training points for one loss evaluation, with their measures attached."""

    domain_points: np.ndarray
    interface_points: np.ndarray
    boundary_points: np.ndarray
    vol_domain: float
    vol_interface: float
    vol_boundary: float

    @property
    def counts(self):
        return (
            len(self.domain_points),
            len(self.interface_points),
            len(self.boundary_points),
        )

    def astype(self, dtype):
        return SampleBatch(
            self.domain_points.astype(dtype, copy=False),
            self.interface_points.astype(dtype, copy=False),
            self.boundary_points.astype(dtype, copy=False),
            self.vol_domain,
            self.vol_interface,
            self.vol_boundary,
        )


def make_batch(problem: ProblemSpec, m_domain, m_interface, m_boundary, rng: RngState):
    """Draw a full batch; the three point sets use independent substreams."""
    return SampleBatch(
        domain_points=sample_domain(problem.domain, m_domain, rng.child(0)),
        interface_points=sample_interface(problem.interface, m_interface, rng.child(1)),
        boundary_points=sample_boundary(problem.domain, m_boundary, rng.child(2)),
        vol_domain=problem.domain.volume,
        vol_interface=problem.interface.surface_volume,
        vol_boundary=problem.domain.boundary_volume,
    )


def _rejection_sample(count, gen, propose, accept, what):
    """Draw until `count` accepted points; abort on pathological rates."""
    kept = []
    n_kept = 0
    n_drawn = 0
    while n_kept < count:
        block = max(4 * (count - n_kept), 256)
        candidates = propose(block, gen)
        mask = accept(candidates)
        kept.append(candidates[mask])
        n_kept += int(mask.sum())
        n_drawn += block
        if n_drawn >= _REJECTION_MIN_DRAWS and n_kept / n_drawn < REJECTION_FLOOR:
            raise ConfigurationError(
                f"rejection acceptance rate {n_kept / n_drawn:.4f} below "
                f"{REJECTION_FLOOR} while sampling {what}"
            )
    return np.concatenate(kept, axis=0)[:count]


def sample_domain(spec: DomainSpec, count, rng: RngState):
    """`count` i.i.d. points uniform w.r.t. Lebesgue measure on the domain."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    gen = rng.generator()
    boundary = spec.boundary

    if isinstance(boundary, RectangleFaces):
        lo = np.asarray(boundary.lo)
        hi = np.asarray(boundary.hi)
        return gen.uniform(lo, hi, size=(count, spec.dim))

    if isinstance(boundary, SphereRadius):
        # isotropic direction from a normalized Gaussian, radius R * U^(1/d)
        direction = gen.standard_normal((count, spec.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = boundary.radius * gen.uniform(size=count) ** (1.0 / spec.dim)
        return direction * radius[:, None]

    if isinstance(boundary, PolarCurve):
        r_max = boundary.r_max

        def propose(block, g):
            theta = g.uniform(0.0, 2.0 * math.pi, size=block)
            radius = r_max * np.sqrt(g.uniform(size=block))
            return np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])

        def accept(pts):
            theta = np.arctan2(pts[:, 1], pts[:, 0])
            return np.hypot(pts[:, 0], pts[:, 1]) < boundary.radius(theta)

        return _rejection_sample(count, gen, propose, accept, "polar domain")

    raise ConfigurationError(f"unsupported boundary descriptor {boundary!r}")


def sample_boundary(spec: DomainSpec, count, rng: RngState):
    """`count` points uniform w.r.t. surface measure on the domain boundary."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    gen = rng.generator()
    boundary = spec.boundary

    if isinstance(boundary, RectangleFaces):
        lo = np.asarray(boundary.lo)
        hi = np.asarray(boundary.hi)
        measures = boundary.face_measures()
        faces = gen.choice(2 * spec.dim, size=count, p=measures / measures.sum())
        points = gen.uniform(lo, hi, size=(count, spec.dim))
        axis = faces // 2
        side = faces % 2
        rows = np.arange(count)
        points[rows, axis] = np.where(side == 0, lo[axis], hi[axis])
        return points

    if isinstance(boundary, SphereRadius):
        direction = gen.standard_normal((count, spec.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        return boundary.radius * direction

    if isinstance(boundary, PolarCurve):
        # thin points uniform in theta by the arclength density sqrt(r^2+r'^2)
        bound = boundary.arc_density_max

        def propose(block, g):
            return np.column_stack(
                [g.uniform(0.0, 2.0 * math.pi, size=block), g.uniform(size=block)]
            )

        def accept(cand):
            theta = cand[:, 0]
            density = np.sqrt(
                boundary.radius(theta) ** 2 + boundary.radius_prime(theta) ** 2
            )
            return cand[:, 1] * bound < density

        thetas = _rejection_sample(count, gen, propose, accept, "polar boundary")[:, 0]
        radius = boundary.radius(thetas)
        return np.column_stack([radius * np.cos(thetas), radius * np.sin(thetas)])

    raise ConfigurationError(f"unsupported boundary descriptor {boundary!r}")


def sample_interface(spec: InterfaceSpec, count, rng: RngState):
    """`count` points uniform w.r.t. surface measure on the interface."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    gen = rng.generator()
    shape = spec.shape

    if isinstance(shape, CircleInterface):
        theta = gen.uniform(0.0, 2.0 * math.pi, size=count)
        return shape.radius * np.column_stack([np.cos(theta), np.sin(theta)])

    if isinstance(shape, EllipseInterface):
        a, b = shape.semi_x, shape.semi_y
        bound = max(a, b)

        def propose(block, g):
            return np.column_stack(
                [g.uniform(0.0, 2.0 * math.pi, size=block), g.uniform(size=block)]
            )

        def accept(cand):
            theta = cand[:, 0]
            speed = np.sqrt((a * np.sin(theta)) ** 2 + (b * np.cos(theta)) ** 2)
            return cand[:, 1] * bound < speed

        thetas = _rejection_sample(count, gen, propose, accept, "ellipse")[:, 0]
        return np.column_stack([a * np.cos(thetas), b * np.sin(thetas)])

    if isinstance(shape, SphereInterface):
        direction = gen.standard_normal((count, shape.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        return shape.radius * direction

    raise ConfigurationError(f"unsupported interface shape {shape!r}")


def midpoint_grid(spec: DomainSpec, per_axis):
    """Tensor-product midpoint nodes on a rectangle domain.

    Node i along an axis sits at lo + (i + 1/2) * (hi - lo) / per_axis, so
    the 40x40 grid on [-1,1]^2 starts at (-0.975, -0.975).
    """
    if not isinstance(spec.boundary, RectangleFaces):
        raise ConfigurationError("midpoint_grid supports rectangle domains only")
    if per_axis < 1:
        raise ValueError(f"per_axis must be >= 1, got {per_axis}")
    axes = []
    for lo, hi in zip(spec.boundary.lo, spec.boundary.hi):
        step = (hi - lo) / per_axis
        axes.append(lo + (np.arange(per_axis) + 0.5) * step)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def fixed_batch(problem: ProblemSpec, per_axis, m_interface, m_boundary):
    """Deterministic quadrature-node batch for the fixed-training-point mode.

    Domain nodes are the midpoint grid; interface and boundary points are
    equally spaced in angle / arclength. Restricted to 2D rectangle domains
    with a circular interface (the geometry of the overfitting study).
    """
    domain = problem.domain
    if not isinstance(domain.boundary, RectangleFaces) or domain.dim != 2:
        raise ConfigurationError("fixed batches need a 2D rectangle domain")
    if not isinstance(problem.interface.shape, CircleInterface):
        raise ConfigurationError("fixed batches need a circular interface")

    domain_points = midpoint_grid(domain, per_axis)

    radius = problem.interface.shape.radius
    theta = np.arange(m_interface) * (2.0 * math.pi / m_interface)
    interface_points = radius * np.column_stack([np.cos(theta), np.sin(theta)])

    # boundary points at midpoint arclength offsets; corners get measure zero
    lo = np.asarray(domain.boundary.lo)
    hi = np.asarray(domain.boundary.hi)
    sides = hi - lo
    perimeter = 2.0 * sides.sum()
    s = (np.arange(m_boundary) + 0.5) * (perimeter / m_boundary)
    boundary_points = np.empty((m_boundary, 2))
    edge_starts = np.cumsum([0.0, sides[0], sides[1], sides[0]])
    for k, pos in enumerate(s):
        if pos < edge_starts[1]:
            boundary_points[k] = (lo[0] + pos, lo[1])
        elif pos < edge_starts[2]:
            boundary_points[k] = (hi[0], lo[1] + (pos - edge_starts[1]))
        elif pos < edge_starts[3]:
            boundary_points[k] = (hi[0] - (pos - edge_starts[2]), hi[1])
        else:
            boundary_points[k] = (lo[0], hi[1] - (pos - edge_starts[3]))

    return SampleBatch(
        domain_points=domain_points,
        interface_points=interface_points,
        boundary_points=boundary_points,
        vol_domain=domain.volume,
        vol_interface=problem.interface.surface_volume,
        vol_boundary=domain.boundary_volume,
    )


def example5_point_counts(m_domain):
    """Surface point budget matching the 6-ball volume-to-surface ratio.

    A domain budget of M corresponds to an effective radius R = M^(1/6);
    the surface then receives round(6 R^5) points (1065 for M = 500).
    """
    if m_domain < 1:
        raise ValueError(f"m_domain must be >= 1, got {m_domain}")
    return int(np.rint(6.0 * m_domain ** (5.0 / 6.0)))
