"""Benchmark geometries: domains, level-set interfaces, exact solutions.

Five benchmark problems in 2, 3, and 6 dimensions. Each problem carries an
analytic exact solution defined piecewise across an embedded interface (the
zero set of a level-set function) together with hand-derived closed-form
gradients and Laplacians. Everything else is derived from those closed
forms:

* volumetric source   f = lap(u) - alpha * u   on each side,
* interface density   c = (grad u_out - grad u_in) . n   on the interface,
* Dirichlet data      g = u   on the outer boundary.

All point maps are vectorized: points are (n, d) arrays, values (n,) and
gradients (n, d). Objects are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

Array = np.ndarray


class ConfigurationError(Exception):
    """Unknown problem id or unsupported geometry descriptor."""


EXAMPLE_IDS = (1, 2, 3, 4, 5)
EXAMPLE_NAMES = {f"example{i}": i for i in EXAMPLE_IDS}


# ---------------------------------------------------------------------------
# boundary and interface descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RectangleFaces:
    """Axis-aligned box; the boundary consists of its 2d faces."""

    lo: tuple
    hi: tuple

    @property
    def dim(self):
        return len(self.lo)

    def side_lengths(self):
        return np.asarray(self.hi, dtype=float) - np.asarray(self.lo, dtype=float)

    def face_measures(self):
        """Measure of each of the 2d faces, ordered (axis 0 lo, axis 0 hi, ...)."""
        sides = self.side_lengths()
        out = np.empty(2 * self.dim)
        for axis in range(self.dim):
            area = float(np.prod(np.delete(sides, axis)))
            out[2 * axis] = area
            out[2 * axis + 1] = area
        return out


@dataclass(frozen=True)
class SphereRadius:
    """Ball domain of the given radius centered at the origin."""

    radius: float
    dim: int


@dataclass(frozen=True)
class PolarCurve:
    """Star-shaped 2D domain bounded by the curve r = radius(theta).

    ``radius`` and ``radius_prime`` are vectorized maps of theta. ``r_max``
    bounds the curve (rejection proposals are drawn from that disk) and
    ``arc_density_max`` bounds sqrt(r^2 + r'^2) for boundary rejection.
    """

    radius: Callable[[Array], Array]
    radius_prime: Callable[[Array], Array]
    r_max: float
    arc_density_max: float


BoundaryDescriptor = Union[RectangleFaces, SphereRadius, PolarCurve]


@dataclass(frozen=True)
class CircleInterface:
    radius: float


@dataclass(frozen=True)
class EllipseInterface:
    semi_x: float
    semi_y: float


@dataclass(frozen=True)
class SphereInterface:
    radius: float
    dim: int


InterfaceShape = Union[CircleInterface, EllipseInterface, SphereInterface]


# ---------------------------------------------------------------------------
# core geometry types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelSetFn:
    """Scalar field whose zero set is the interface.

    Negative inside the interface, positive outside. ``value`` maps (n, d)
    points to (n,) values, ``grad`` to (n, d) gradients.
    """

    dim: int
    value: Callable[[Array], Array]
    grad: Callable[[Array], Array]


@dataclass(frozen=True)
class DomainSpec:
    """A bounded domain with its boundary descriptor and stored measures."""

    dim: int
    contains: Callable[[Array], Array]
    bounding_box: Array  # shape (2, d): rows are lower and upper corners
    boundary: BoundaryDescriptor
    volume: float
    boundary_volume: float

    def boundary_residual(self, points):
        """Distance-like defect of points from the boundary; 0 means on it."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if isinstance(self.boundary, RectangleFaces):
            lo = np.asarray(self.boundary.lo)
            hi = np.asarray(self.boundary.hi)
            inside = np.maximum((lo - pts).max(axis=1), (pts - hi).max(axis=1))
            face_gap = np.minimum(np.abs(pts - lo), np.abs(pts - hi)).min(axis=1)
            return np.where(inside > 0, inside, face_gap)
        if isinstance(self.boundary, SphereRadius):
            return np.abs(np.linalg.norm(pts, axis=1) - self.boundary.radius)
        if isinstance(self.boundary, PolarCurve):
            theta = np.arctan2(pts[:, 1], pts[:, 0])
            return np.abs(np.hypot(pts[:, 0], pts[:, 1]) - self.boundary.radius(theta))
        raise ConfigurationError(f"unsupported boundary descriptor {self.boundary!r}")


@dataclass(frozen=True)
class InterfaceSpec:
    """Codimension-one interface given by a level set plus a parametric shape."""

    level_set: LevelSetFn
    surface_volume: float
    shape: InterfaceShape

    def normal(self, points):
        """Unit normal grad(phi)/|grad(phi)|, pointing from inside to outside."""
        grad = self.level_set.grad(np.atleast_2d(np.asarray(points, dtype=float)))
        return grad / np.linalg.norm(grad, axis=1, keepdims=True)


@dataclass(frozen=True)
class ProblemSpec:
    """A full benchmark instance with exact solution and derived data."""

    example_id: int
    name: str
    dim: int
    domain: DomainSpec
    interface: InterfaceSpec
    alpha: float
    u_plus: Callable[[Array], Array]
    u_minus: Callable[[Array], Array]
    grad_u_plus: Callable[[Array], Array]
    grad_u_minus: Callable[[Array], Array]
    lap_u_plus: Callable[[Array], Array]
    lap_u_minus: Callable[[Array], Array]

    @property
    def phi(self):
        return self.interface.level_set

    @property
    def input_width(self):
        """Network input width with the level-set feature: d + 1."""
        return self.dim + 1

    def _piecewise(self, points, inner, outer):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = self.phi.value(pts) < 0.0
        out = np.empty(len(pts), dtype=float)
        if mask.any():
            out[mask] = inner(pts[mask])
        if (~mask).any():
            out[~mask] = outer(pts[~mask])
        return out

    def u_exact(self, points):
        """Exact solution, continuous across the interface."""
        return self._piecewise(points, self.u_minus, self.u_plus)

    def grad_u_exact(self, points):
        """Piecewise gradient; on the interface the outside branch is used."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = self.phi.value(pts) < 0.0
        out = np.empty_like(pts)
        if mask.any():
            out[mask] = self.grad_u_minus(pts[mask])
        if (~mask).any():
            out[~mask] = self.grad_u_plus(pts[~mask])
        return out

    def f(self, points):
        """Volumetric source lap(u) - alpha*u away from the interface."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = self.phi.value(pts) < 0.0
        out = np.empty(len(pts), dtype=float)
        if mask.any():
            sub = pts[mask]
            out[mask] = self.lap_u_minus(sub) - self.alpha * self.u_minus(sub)
        if (~mask).any():
            sub = pts[~mask]
            out[~mask] = self.lap_u_plus(sub) - self.alpha * self.u_plus(sub)
        return out

    def c(self, points):
        """Normal-derivative jump (outside minus inside) at interface points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        normal = self.interface.normal(pts)
        jump = self.grad_u_plus(pts) - self.grad_u_minus(pts)
        return (jump * normal).sum(axis=1)

    def g(self, points):
        """Dirichlet data on the outer boundary (trace of the exact solution)."""
        return self.u_exact(points)

    def exact_eval(self):
        """Bundle (u, grad u) evaluation of the exact solution for oracles."""

        def evaluate(points):
            return self.u_exact(points), self.grad_u_exact(points)

        return evaluate


# ---------------------------------------------------------------------------
# measure helpers
# ---------------------------------------------------------------------------


def sixsphere_measures(radius):
    """Volume and surface area of the 6-ball: (pi^3 R^6 / 6, pi^3 R^5)."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    volume = math.pi**3 * radius**6 / 6.0
    surface = math.pi**3 * radius**5
    return volume, surface


def _ball_volume(radius, dim):
    return math.pi ** (dim / 2.0) * radius**dim / math.gamma(dim / 2.0 + 1.0)


def _sphere_area(radius, dim):
    """Surface measure of the (dim-1)-sphere bounding a dim-ball."""
    return dim * _ball_volume(radius, dim) / radius


def _periodic_quadrature(fn, n):
    """Midpoint rule for a smooth 2pi-periodic integrand (spectral accuracy)."""
    theta = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
    return float(fn(theta).sum() * (2.0 * math.pi / n))


def _ellipse_perimeter(semi_x, semi_y, n=1 << 16):
    return _periodic_quadrature(
        lambda t: np.sqrt((semi_x * np.sin(t)) ** 2 + (semi_y * np.cos(t)) ** 2), n
    )


def _polar_arclength(radius, radius_prime, n=1 << 16):
    return _periodic_quadrature(
        lambda t: np.sqrt(radius(t) ** 2 + radius_prime(t) ** 2), n
    )


def volume_oracle(spec, resolution=256, measure="interior"):
    """Dense deterministic quadrature of a domain/interface measure.

    Independent of the values stored on the specs: parametric derivatives
    are taken by finite differences and ball volumes come from a recursive
    slice quadrature. Used by tests only, never during training.
    """
    if resolution < 64:
        raise ValueError(f"resolution must be at least 64, got {resolution}")

    if isinstance(spec, InterfaceSpec):
        return _interface_measure_oracle(spec.shape, resolution)

    if not isinstance(spec, DomainSpec):
        raise ConfigurationError(f"unsupported spec type {type(spec).__name__}")
    if measure not in ("interior", "boundary"):
        raise ValueError(f"measure must be 'interior' or 'boundary', got {measure!r}")

    boundary = spec.boundary
    if isinstance(boundary, RectangleFaces):
        sides = [
            _line_measure(lo, hi, resolution)
            for lo, hi in zip(boundary.lo, boundary.hi)
        ]
        if measure == "interior":
            return float(np.prod(sides))
        total = 0.0
        for axis in range(boundary.dim):
            total += 2.0 * float(np.prod(np.delete(sides, axis)))
        return total

    if isinstance(boundary, SphereRadius):
        volume = _ball_volume_quadrature(boundary.radius, boundary.dim, resolution)
        if measure == "interior":
            return volume
        # exact scaling identity S(R) = d V(R) / R for balls
        return boundary.dim * volume / boundary.radius

    if isinstance(boundary, PolarCurve):
        n = resolution * 256
        if measure == "interior":
            return 0.5 * _periodic_quadrature(lambda t: boundary.radius(t) ** 2, n)
        step = 1e-6

        def density(t):
            rp = (boundary.radius(t + step) - boundary.radius(t - step)) / (2 * step)
            return np.sqrt(boundary.radius(t) ** 2 + rp**2)

        return _periodic_quadrature(density, n)

    raise ConfigurationError(f"unsupported boundary descriptor {boundary!r}")


def _line_measure(lo, hi, resolution):
    # dense midpoint sum of the constant 1; exact up to roundoff
    return float(np.full(resolution * 64, (hi - lo) / (resolution * 64)).sum())


def _ball_volume_quadrature(radius, dim, resolution):
    """V_d(R) by recursive slicing, each slice integral done numerically.

    V_d = c_d R^d with c_1 = 2 and c_d = c_{d-1} * I_{d-1}, where
    I_k = int_{-1}^{1} (1 - s^2)^{k/2} ds = int cos^{k+1}(t) dt under
    s = sin(t), which removes the endpoint derivative singularity.
    """
    n = resolution * 1024
    t = -0.5 * math.pi + (np.arange(n) + 0.5) * (math.pi / n)
    cos_t = np.cos(t)
    coeff = 2.0
    for k in range(1, dim):
        coeff *= float((cos_t ** (k + 1)).sum() * (math.pi / n))
    return coeff * radius**dim


def _interface_measure_oracle(shape, resolution):
    n = resolution * 256
    if isinstance(shape, CircleInterface):
        return _periodic_quadrature(
            lambda t: np.full_like(t, shape.radius), n
        )
    if isinstance(shape, EllipseInterface):
        step = 1e-6

        def speed(t):
            dx = shape.semi_x * (np.cos(t + step) - np.cos(t - step)) / (2 * step)
            dy = shape.semi_y * (np.sin(t + step) - np.sin(t - step)) / (2 * step)
            return np.hypot(dx, dy)

        return _periodic_quadrature(speed, n)
    if isinstance(shape, SphereInterface):
        if shape.dim == 3:
            n_polar = resolution * 8
            polar = (np.arange(n_polar) + 0.5) * (math.pi / n_polar)
            ring = np.sin(polar).sum() * (math.pi / n_polar)
            return float(shape.radius**2 * 2.0 * math.pi * ring)
        volume = _ball_volume_quadrature(shape.radius, shape.dim, resolution)
        return shape.dim * volume / shape.radius
    raise ConfigurationError(f"unsupported interface shape {shape!r}")


# ---------------------------------------------------------------------------
# the five benchmark problems
# ---------------------------------------------------------------------------


def _box_domain(lo, hi):
    lo_arr = np.asarray(lo, dtype=float)
    hi_arr = np.asarray(hi, dtype=float)
    dim = len(lo_arr)
    sides = hi_arr - lo_arr
    volume = float(np.prod(sides))
    boundary = RectangleFaces(tuple(lo_arr), tuple(hi_arr))
    boundary_volume = float(boundary.face_measures().sum())

    def contains(points):
        pts = np.atleast_2d(points)
        return np.logical_and(pts >= lo_arr, pts <= hi_arr).all(axis=1)

    return DomainSpec(
        dim=dim,
        contains=contains,
        bounding_box=np.vstack([lo_arr, hi_arr]),
        boundary=boundary,
        volume=volume,
        boundary_volume=boundary_volume,
    )


def _ball_domain(radius, dim):
    if dim == 6:
        volume, surface = sixsphere_measures(radius)
    else:
        volume = _ball_volume(radius, dim)
        surface = _sphere_area(radius, dim)

    def contains(points):
        pts = np.atleast_2d(points)
        return np.linalg.norm(pts, axis=1) <= radius

    box = np.vstack([-radius * np.ones(dim), radius * np.ones(dim)])
    return DomainSpec(
        dim=dim,
        contains=contains,
        bounding_box=box,
        boundary=SphereRadius(radius, dim),
        volume=volume,
        boundary_volume=surface,
    )


def _circle_level_set(radius):
    r2 = radius * radius

    def value(points):
        pts = np.atleast_2d(points)
        return pts[:, 0] ** 2 + pts[:, 1] ** 2 - r2

    def grad(points):
        return 2.0 * np.atleast_2d(points).astype(float)

    return LevelSetFn(dim=2, value=value, grad=grad)


def _sphere_level_set(radius, dim):
    # (|x| / R)^2 - 1, smooth everywhere, zero exactly on the sphere
    inv_r2 = 1.0 / (radius * radius)

    def value(points):
        pts = np.atleast_2d(points)
        return (pts**2).sum(axis=1) * inv_r2 - 1.0

    def grad(points):
        return 2.0 * inv_r2 * np.atleast_2d(points).astype(float)

    return LevelSetFn(dim=dim, value=value, grad=grad)


def _ellipse_level_set(semi_x, semi_y):
    ax2 = semi_x * semi_x
    ay2 = semi_y * semi_y

    def value(points):
        pts = np.atleast_2d(points)
        return pts[:, 0] ** 2 / ax2 + pts[:, 1] ** 2 / ay2 - 1.0

    def grad(points):
        pts = np.atleast_2d(points).astype(float)
        return np.column_stack([2.0 * pts[:, 0] / ax2, 2.0 * pts[:, 1] / ay2])

    return LevelSetFn(dim=2, value=value, grad=grad)


def _log_square_fields():
    """u = -ln(x^2 + y^2): values, gradients, Laplacian (harmonic)."""

    def value(points):
        pts = np.atleast_2d(points)
        return -np.log(pts[:, 0] ** 2 + pts[:, 1] ** 2)

    def grad(points):
        pts = np.atleast_2d(points).astype(float)
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return -2.0 * pts / r2[:, None]

    def lap(points):
        return np.zeros(len(np.atleast_2d(points)))

    return value, grad, lap


def _example_1():
    domain = _box_domain((-1.0, -1.0), (1.0, 1.0))
    level_set = _circle_level_set(0.5)
    interface = InterfaceSpec(
        level_set=level_set,
        surface_volume=2.0 * math.pi * 0.5,
        shape=CircleInterface(0.5),
    )
    log_val, log_grad, log_lap = _log_square_fields()
    inner_const = -math.log(0.25)

    def u_minus(points):
        return np.full(len(np.atleast_2d(points)), inner_const)

    def zero_vec(points):
        return np.zeros_like(np.atleast_2d(points), dtype=float)

    def zero_scalar(points):
        return np.zeros(len(np.atleast_2d(points)))

    return ProblemSpec(
        example_id=1,
        name="example1",
        dim=2,
        domain=domain,
        interface=interface,
        alpha=0.0,
        u_plus=log_val,
        u_minus=u_minus,
        grad_u_plus=log_grad,
        grad_u_minus=zero_vec,
        lap_u_plus=log_lap,
        lap_u_minus=zero_scalar,
    )


def _example_2():
    base = _example_1()
    log_val, log_grad, log_lap = _log_square_fields()
    inner_const = -math.log(0.25)

    def trig(points):
        pts = np.atleast_2d(points)
        return np.sin(pts[:, 0]) + np.sin(pts[:, 1])

    def trig_grad(points):
        pts = np.atleast_2d(points).astype(float)
        return np.column_stack([np.cos(pts[:, 0]), np.cos(pts[:, 1])])

    def trig_lap(points):
        pts = np.atleast_2d(points)
        return -np.sin(pts[:, 0]) - np.sin(pts[:, 1])

    return ProblemSpec(
        example_id=2,
        name="example2",
        dim=2,
        domain=base.domain,
        interface=base.interface,
        alpha=1.0,
        u_plus=lambda p: log_val(p) + trig(p),
        u_minus=lambda p: inner_const + trig(p),
        grad_u_plus=lambda p: log_grad(p) + trig_grad(p),
        grad_u_minus=trig_grad,
        lap_u_plus=lambda p: log_lap(p) + trig_lap(p),
        lap_u_minus=trig_lap,
    )


def _example_3():
    def radius(theta):
        return 1.0 - 0.2 * np.cos(5.0 * np.asarray(theta, dtype=float))

    def radius_prime(theta):
        return np.sin(5.0 * np.asarray(theta, dtype=float))

    boundary = PolarCurve(
        radius=radius,
        radius_prime=radius_prime,
        r_max=1.2,
        arc_density_max=float(
            np.sqrt(radius(np.linspace(0, 2 * math.pi, 1 << 14)) ** 2
                    + radius_prime(np.linspace(0, 2 * math.pi, 1 << 14)) ** 2).max()
        ),
    )

    def contains(points):
        pts = np.atleast_2d(points)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        return np.hypot(pts[:, 0], pts[:, 1]) <= radius(theta)

    domain = DomainSpec(
        dim=2,
        contains=contains,
        bounding_box=np.array([[-1.2, -1.2], [1.2, 1.2]]),
        boundary=boundary,
        # area = (1/2) int r(t)^2 dt = pi (1 + 0.02) for r = 1 - 0.2 cos(5t)
        volume=1.02 * math.pi,
        boundary_volume=_polar_arclength(radius, radius_prime),
    )

    semi_x, semi_y = 0.7, 0.5
    level_set = _ellipse_level_set(semi_x, semi_y)
    interface = InterfaceSpec(
        level_set=level_set,
        surface_volume=_ellipse_perimeter(semi_x, semi_y),
        shape=EllipseInterface(semi_x, semi_y),
    )

    ax2, ay2 = semi_x**2, semi_y**2

    def q(pts):
        return pts[:, 0] ** 2 / ax2 + pts[:, 1] ** 2 / ay2

    def q_grad(pts):
        return np.column_stack([2.0 * pts[:, 0] / ax2, 2.0 * pts[:, 1] / ay2])

    lap_q = 2.0 / ax2 + 2.0 / ay2

    def u_plus(points):
        return np.log(q(np.atleast_2d(points)))

    def grad_u_plus(points):
        pts = np.atleast_2d(points).astype(float)
        return q_grad(pts) / q(pts)[:, None]

    def lap_u_plus(points):
        pts = np.atleast_2d(points).astype(float)
        qv = q(pts)
        gq = q_grad(pts)
        return lap_q / qv - (gq**2).sum(axis=1) / qv**2

    def u_minus(points):
        pts = np.atleast_2d(points)
        return np.sin(pts[:, 0]) * np.cos(pts[:, 1]) * (q(pts) ** 2 - 1.0)

    def grad_u_minus(points):
        pts = np.atleast_2d(points).astype(float)
        s = np.sin(pts[:, 0]) * np.cos(pts[:, 1])
        s_grad = np.column_stack(
            [np.cos(pts[:, 0]) * np.cos(pts[:, 1]),
             -np.sin(pts[:, 0]) * np.sin(pts[:, 1])]
        )
        qv = q(pts)
        w = qv**2 - 1.0
        return s_grad * w[:, None] + (2.0 * qv * s)[:, None] * q_grad(pts)

    def lap_u_minus(points):
        pts = np.atleast_2d(points).astype(float)
        s = np.sin(pts[:, 0]) * np.cos(pts[:, 1])
        s_grad = np.column_stack(
            [np.cos(pts[:, 0]) * np.cos(pts[:, 1]),
             -np.sin(pts[:, 0]) * np.sin(pts[:, 1])]
        )
        qv = q(pts)
        gq = q_grad(pts)
        w = qv**2 - 1.0
        # lap(s w) = lap(s) w + 2 grad(s).grad(w) + s lap(w), lap(s) = -2 s
        cross = 2.0 * (s_grad * (2.0 * qv[:, None] * gq)).sum(axis=1)
        lap_w = 2.0 * ((gq**2).sum(axis=1) + qv * lap_q)
        return -2.0 * s * w + cross + s * lap_w

    return ProblemSpec(
        example_id=3,
        name="example3",
        dim=2,
        domain=domain,
        interface=interface,
        alpha=0.0,
        u_plus=u_plus,
        u_minus=u_minus,
        grad_u_plus=grad_u_plus,
        grad_u_minus=grad_u_minus,
        lap_u_plus=lap_u_plus,
        lap_u_minus=lap_u_minus,
    )


def _example_4():
    domain = _box_domain((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))
    radius = 0.4
    level_set = _sphere_level_set(radius, 3)
    interface = InterfaceSpec(
        level_set=level_set,
        surface_volume=4.0 * math.pi * radius**2,
        shape=SphereInterface(radius, 3),
    )
    shift = radius * radius

    def u_plus(points):
        pts = np.atleast_2d(points)
        rho2 = (pts**2).sum(axis=1)
        return pts[:, 0] * (-1.0 + np.exp(shift - rho2))

    def grad_u_plus(points):
        pts = np.atleast_2d(points).astype(float)
        rho2 = (pts**2).sum(axis=1)
        expo = np.exp(shift - rho2)
        out = -2.0 * pts[:, 0][:, None] * pts * expo[:, None]
        out[:, 0] += expo - 1.0
        return out

    def lap_u_plus(points):
        pts = np.atleast_2d(points)
        rho2 = (pts**2).sum(axis=1)
        return pts[:, 0] * (4.0 * rho2 - 10.0) * np.exp(shift - rho2)

    def u_minus(points):
        pts = np.atleast_2d(points)
        return -1.0 + np.cos(shift - (pts**2).sum(axis=1))

    def grad_u_minus(points):
        pts = np.atleast_2d(points).astype(float)
        w = shift - (pts**2).sum(axis=1)
        return 2.0 * pts * np.sin(w)[:, None]

    def lap_u_minus(points):
        pts = np.atleast_2d(points)
        rho2 = (pts**2).sum(axis=1)
        w = shift - rho2
        return 6.0 * np.sin(w) - 4.0 * rho2 * np.cos(w)

    return ProblemSpec(
        example_id=4,
        name="example4",
        dim=3,
        domain=domain,
        interface=interface,
        alpha=1.0,
        u_plus=u_plus,
        u_minus=u_minus,
        grad_u_plus=grad_u_plus,
        grad_u_minus=grad_u_minus,
        lap_u_plus=lap_u_plus,
        lap_u_minus=lap_u_minus,
    )


def _example_5():
    dim = 6
    domain = _ball_domain(0.6, dim)
    radius = 0.5
    level_set = _sphere_level_set(radius, dim)
    interface = InterfaceSpec(
        level_set=level_set,
        surface_volume=sixsphere_measures(radius)[1],
        shape=SphereInterface(radius, dim),
    )
    shift = radius * radius  # 0.25

    def sin_sum(pts):
        return np.sin(pts[:, :5]).sum(axis=1)

    def sin_sum_grad(pts):
        out = np.zeros_like(pts)
        out[:, :5] = np.cos(pts[:, :5])
        return out

    def sin_sum_lap(pts):
        return -np.sin(pts[:, :5]).sum(axis=1)

    def u_plus(points):
        pts = np.atleast_2d(points)
        return np.exp(shift - (pts**2).sum(axis=1)) + sin_sum(pts)

    def grad_u_plus(points):
        pts = np.atleast_2d(points).astype(float)
        expo = np.exp(shift - (pts**2).sum(axis=1))
        return -2.0 * pts * expo[:, None] + sin_sum_grad(pts)

    def lap_u_plus(points):
        pts = np.atleast_2d(points)
        rho2 = (pts**2).sum(axis=1)
        return (4.0 * rho2 - 2.0 * dim) * np.exp(shift - rho2) + sin_sum_lap(pts)

    def u_minus(points):
        pts = np.atleast_2d(points)
        return 1.0 + 2.0 * np.sin(shift - (pts**2).sum(axis=1)) + sin_sum(pts)

    def grad_u_minus(points):
        pts = np.atleast_2d(points).astype(float)
        w = shift - (pts**2).sum(axis=1)
        return -4.0 * pts * np.cos(w)[:, None] + sin_sum_grad(pts)

    def lap_u_minus(points):
        pts = np.atleast_2d(points)
        rho2 = (pts**2).sum(axis=1)
        w = shift - rho2
        return -4.0 * dim * np.cos(w) - 8.0 * rho2 * np.sin(w) + sin_sum_lap(pts)

    return ProblemSpec(
        example_id=5,
        name="example5",
        dim=dim,
        domain=domain,
        interface=interface,
        alpha=0.0,
        u_plus=u_plus,
        u_minus=u_minus,
        grad_u_plus=grad_u_plus,
        grad_u_minus=grad_u_minus,
        lap_u_plus=lap_u_plus,
        lap_u_minus=lap_u_minus,
    )


_BUILDERS = {1: _example_1, 2: _example_2, 3: _example_3, 4: _example_4, 5: _example_5}


def make_example(example_id):
    """Build one of the five benchmark problems by integer id or name."""
    if isinstance(example_id, str):
        key = example_id.strip().lower()
        if key not in EXAMPLE_NAMES:
            raise ConfigurationError(f"unknown example name {example_id!r}")
        example_id = EXAMPLE_NAMES[key]
    if example_id not in _BUILDERS:
        raise ConfigurationError(f"unknown example id {example_id!r}, expected 1..5")
    return _BUILDERS[example_id]()
