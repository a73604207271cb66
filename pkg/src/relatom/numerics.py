"""Quadrature and ODE plumbing used by every physics module.

Three layers:

* :func:`integrate_1d` / :func:`integrate_radial_3d` -- adaptive
  Gauss-Kronrod quadrature (QUADPACK) behind a small spec object.
  Semi-infinite integrals are mapped to (0, 1) first; exponentially
  decaying integrands use the logarithmic map, algebraically decaying
  ones the rational map u/(1+u).
* :func:`grid_quadrature` -- vectorized composite 12-point Gauss-Legendre
  over an explicit knot sequence.  Adaptive extrapolation misbehaves on
  interpolants with hundreds of knots, so every integral whose integrand
  is built from a :class:`RadialFunction` goes through this instead.
* :func:`solve_ivp` -- embedded-pair explicit Runge-Kutta (DOP853) with
  dense output, wrapped so failures surface as :class:`StepFailure`.

All operations are pure; :class:`RadialFunction` and :class:`Trajectory`
are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NonConvergence, StepFailure

__all__ = [
    "QuadratureSpec",
    "RadialFunction",
    "Tail",
    "Trajectory",
    "integrate_1d",
    "integrate_radial_3d",
    "grid_quadrature",
    "cumulative_grid_quadrature",
    "solve_ivp",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)

EXP_DECAY_MAP = "exp_decay_map"
ALGEBRAIC_MAP = "algebraic_map"


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and transform choice for adaptive quadrature."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000
    semi_infinite_transform: str = EXP_DECAY_MAP

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")
        if self.abs_tol < 0:
            raise DomainError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.semi_infinite_transform not in (EXP_DECAY_MAP, ALGEBRAIC_MAP):
            raise DomainError(
                f"unknown semi-infinite transform {self.semi_infinite_transform!r}"
            )


DEFAULT_SPEC = QuadratureSpec()


def _quad(f, a, b, spec, points=None):
    import warnings

    with warnings.catch_warnings():
        # roundoff-limited convergence is adjudicated below via the error
        # estimate; QUADPACK's warning would only duplicate that signal
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        value, abserr, info, *rest = scipy.integrate.quad(
            f,
            a,
            b,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=max(spec.max_subdivisions, 10),
            full_output=1,
            points=points,
        )
    if rest:  # QUADPACK appended an error message
        # Roundoff-limited convergence is tolerated when the reported
        # estimate still meets the requested tolerance.
        if abserr > max(spec.rel_tol * abs(value), spec.abs_tol) * 10.0:
            raise NonConvergence(
                f"quadrature failed on ({a}, {b}): {rest[-1]}",
                value=value,
                err_estimate=abserr,
            )
    return value, abserr


def integrate_1d(f, a, b, spec: QuadratureSpec | None = None, singular_exponent=None):
    """Integrate ``f`` on (a, b), b possibly infinite.

    Parameters
    ----------
    f : callable
        Scalar integrand, finite on the open interval.
    a, b : float
        Interval endpoints; ``b = inf`` selects the semi-infinite maps.
    spec : QuadratureSpec, optional
    singular_exponent : float, optional
        Hint that ``f ~ (x - a)^(-p)`` near the finite left endpoint with
        0 < p < 1; a power substitution removes the singularity.

    Returns
    -------
    (value, err_estimate)
    """
    spec = spec or DEFAULT_SPEC
    if not b > a:
        raise DomainError(f"need a < b, got ({a}, {b})")

    if math.isinf(b):
        if math.isinf(a):
            raise DomainError("doubly infinite intervals are not supported")
        if singular_exponent is not None:
            raise DomainError(
                "singularity hints apply to finite intervals; split the "
                "integral at a finite point first"
            )
        if spec.semi_infinite_transform == EXP_DECAY_MAP:
            # x = a - log(1-u), dx = du/(1-u)
            def g(u):
                return f(a - math.log1p(-u)) / (1.0 - u)
        else:
            # x = a + u/(1-u), dx = du/(1-u)^2
            def g(u):
                w = 1.0 - u
                return f(a + u / w) / (w * w)

        return _quad(g, 0.0, 1.0, spec)

    if singular_exponent is not None:
        p = float(singular_exponent)
        if not 0.0 < p < 1.0:
            raise DomainError("singular_exponent hint must lie in (0, 1)")
        m = max(2.0, math.ceil(1.0 / (1.0 - p)))
        # x = a + u^m maps the endpoint singularity to a bounded integrand
        top = (b - a) ** (1.0 / m)

        def g(u):
            return f(a + u**m) * m * u ** (m - 1.0)

        return _quad(g, 0.0, top, spec)

    return _quad(f, a, b, spec)


def integrate_radial_3d(f, spec: QuadratureSpec | None = None):
    """3-D integral of the spherically symmetric f: 4 pi int_0^inf f(u) u^2 du."""
    value, err = integrate_1d(lambda u: f(u) * u * u, 0.0, math.inf, spec)
    return 4.0 * math.pi * value


def grid_quadrature(f, knots):
    """Composite 12-point Gauss-Legendre of the vectorized ``f`` over knot segments."""
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or knots.size < 2:
        raise DomainError("need at least two knots")
    a = knots[:-1]
    b = knots[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return float(np.dot(w, np.asarray(f(x), dtype=float)))


def cumulative_grid_quadrature(f, knots):
    """Per-knot cumulative integral of ``f`` from knots[0]; returns an array
    aligned with ``knots`` (first entry 0)."""
    knots = np.asarray(knots, dtype=float)
    a = knots[:-1]
    b = knots[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = half[:, None] * _GL_WEIGHTS[None, :]
    vals = np.asarray(f(x), dtype=float).reshape(len(a), len(_GL_NODES))
    seg = np.sum(w * vals, axis=1)
    out = np.empty(knots.size)
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out


TAIL_ZERO = "zero"
TAIL_POWER_LAW = "power_law"


@dataclass(frozen=True)
class Tail:
    """Behaviour of a radial profile beyond its last grid point."""

    kind: str = TAIL_ZERO
    exponent: float = 0.0
    coefficient: float = 0.0

    @classmethod
    def zero(cls):
        return cls(TAIL_ZERO)

    @classmethod
    def power_law(cls, exponent, coefficient):
        return cls(TAIL_POWER_LAW, float(exponent), float(coefficient))


@dataclass(frozen=True)
class RadialFunction:
    """A function of radius sampled on a strictly increasing positive grid.

    Inside the grid span a monotone cubic (PCHIP) interpolant is used;
    beyond the last point the declared tail model; below the first point a
    power law fitted through the first two samples (log-log extrapolation).
    """

    grid: np.ndarray
    values: np.ndarray
    tail: Tail = field(default_factory=Tail.zero)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise DomainError("grid must hold at least two radii")
        if grid.size != values.size:
            raise DomainError("grid and values must have equal length")
        if not np.all(np.diff(grid) > 0):
            raise DomainError("grid must be strictly increasing")
        if grid[0] <= 0:
            raise DomainError("grid radii must be positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_interp", PchipInterpolator(grid, values, extrapolate=False))
        # log-log head extrapolation through the first two samples
        v0, v1 = values[0], values[1]
        if v0 > 0 and v1 > 0:
            head_exp = math.log(v1 / v0) / math.log(grid[1] / grid[0])
        else:
            head_exp = 0.0
        object.__setattr__(self, "_head_exp", head_exp)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        lo = r < self.grid[0]
        hi = r > self.grid[-1]
        mid = ~(lo | hi)
        out[mid] = self._interp(r[mid])
        if np.any(lo):
            out[lo] = self.values[0] * (r[lo] / self.grid[0]) ** self._head_exp
        if np.any(hi):
            if self.tail.kind == TAIL_ZERO:
                out[hi] = 0.0
            else:
                out[hi] = self.tail.coefficient * r[hi] ** self.tail.exponent
        return float(out[0]) if scalar else out

    @property
    def r_min(self):
        return float(self.grid[0])

    @property
    def r_max(self):
        return float(self.grid[-1])


@dataclass(frozen=True)
class Trajectory:
    """Dense-output solution of an initial value problem."""

    ts: np.ndarray
    ys: np.ndarray
    dense: object
    t_events: tuple = ()
    y_events: tuple = ()

    def __call__(self, x):
        return self.dense(x)

    @property
    def x_end(self):
        return float(self.ts[-1])

    @property
    def y_end(self):
        return self.ys[:, -1]


def solve_ivp(rhs, y0, x0, x1, tol=1e-10, events=None, max_step=np.inf, method="RK45"):
    """Integrate y' = rhs(x, y) from x0 to x1 with an embedded-pair RK method.

    The default pair keeps the end-point error proportional to ``tol``
    across the whole useful range; DOP853 is available for callers that
    integrate at very tight tolerances.  Raises :class:`StepFailure` on
    blow-up, reporting the last good abscissa.
    """
    if not x1 > x0 and not x1 < x0:
        raise DomainError("x0 and x1 must differ")
    sol = scipy.integrate.solve_ivp(
        rhs,
        (x0, x1),
        np.atleast_1d(np.asarray(y0, dtype=float)),
        method=method,
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=True,
        events=events,
        max_step=max_step,
    )
    if sol.status == -1:
        raise StepFailure(
            f"integration failed at x = {sol.t[-1]!r}: {sol.message}",
            last_x=float(sol.t[-1]),
        )
    return Trajectory(
        ts=sol.t,
        ys=sol.y,
        dense=sol.sol,
        t_events=tuple(sol.t_events) if sol.t_events is not None else (),
        y_events=tuple(sol.y_events) if sol.y_events is not None else (),
    )
