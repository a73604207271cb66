"""Phase-space integrals, coherent-state identities, and the chain that
connects the semiclassical sum to the Thomas-Fermi energy.

Sign convention: the negative part [f]_- means min(f, 0) throughout, so
phase-space sums of [T(p) - v]_- are returned as signed energies <= 0.
The momentum integral over the classically allowed region with the
non-relativistic dispersion p^2/2 has the closed form
-(16 sqrt(2) pi / 15) v^{5/2}; the relativistic one is quadrature.

The self-consistency constant: the end-of-chain identity

    -K int [V_TF]_+^{5/2} - (1/2) D(rho,rho) - mu N  =  E_TF,
    K = 2 sqrt(2) / (15 pi^2),

holds exactly iff K gamma^{3/2} = 2/5, i.e. gamma = (6 pi^2)^{2/3} / 2.
With the literal TF-functional gamma = (3 pi^2)^{2/3} the kinetic
coefficients disagree by the exact factor 2 sqrt(2)/3; both constants are
exposed rather than silently reconciled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DivergentIntegral, DomainError, PreconditionFailure
from .kinetic import Dispersion, t_rel, t_rel_inverse, taylor_32_bound
from .numerics import (
    QuadratureSpec,
    RadialFunction,
    grid_quadrature,
    integrate_1d,
)
from .thomas_fermi import TFSolution, coulomb_potential, tf_energy

__all__ = [
    "PHASE_SPACE_COEFF",
    "CoherentSpec",
    "PhaseSpaceResult",
    "momentum_integral_nonrel",
    "momentum_integral_rel",
    "phase_space_energy",
    "quartic_correction_bound",
    "domain_change_error",
    "tf_identity_chain",
    "kinetic_coefficient_ratio",
    "self_consistent_gamma",
    "coherent_resolution_check",
    "coherent_potential_check",
    "coherent_kinetic_error_bound",
    "newton_smearing_check",
    "smeared_coulomb",
]

# (1/(2 pi)^3) * 16 sqrt(2) pi / 15
PHASE_SPACE_COEFF = 2.0 * math.sqrt(2.0) / (15.0 * math.pi**2)

NONREL_52_COEFF = 16.0 * math.sqrt(2.0) * math.pi / 15.0


def self_consistent_gamma():
    """The gamma_kin for which the identity chain closes: (6 pi^2)^{2/3}/2."""
    return (6.0 * math.pi**2) ** (2.0 / 3.0) / 2.0


def kinetic_coefficient_ratio(gamma_kin):
    """K gamma^{5/2} / ((3/5) gamma) -- the factor by which the phase-space
    kinetic term overshoots the TF-functional one (2 sqrt(2)/3 at the
    paper's gamma)."""
    return PHASE_SPACE_COEFF * gamma_kin**1.5 / 0.6


def momentum_integral_nonrel(v):
    """int_{p^2/2 < v} (p^2/2 - v) d^3p = -(16 sqrt2 pi/15) v^{5/2}, v >= 0."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise DomainError("v must be >= 0")
    out = -NONREL_52_COEFF * v**2.5
    return float(out) if out.ndim == 0 else out


def momentum_integral_rel(disp: Dispersion, v, spec: QuadratureSpec | None = None):
    """int_{T(p) < v} (T(p) - v) d^3p = 4 pi int_0^P (T(u) - v) u^2 du with
    P = sqrt(v^2 + 2v/alpha); signed, <= 0."""
    v = float(v)
    if v < 0:
        raise DomainError("v must be >= 0")
    if v == 0.0:
        return 0.0
    P = t_rel_inverse(disp, v)
    value, _ = integrate_1d(
        lambda u: (t_rel(disp, u) - v) * u * u,
        0.0,
        P,
        spec or QuadratureSpec(rel_tol=1e-11),
    )
    return 4.0 * math.pi * value


@dataclass(frozen=True)
class PhaseSpaceResult:
    """Signed semiclassical energy (<= 0) with its quadrature error and the
    momentum-space domain marker."""

    value: float
    quadrature_error: float
    domain: str


def phase_space_energy(
    disp: Dispersion | None,
    V: RadialFunction,
    mu_shift: float = 0.0,
    q_min: float = 0.0,
    spec: QuadratureSpec | None = None,
) -> PhaseSpaceResult:
    """-(1/(2 pi)^3) iint_{|q| > q_min} [T(p) - ([V(q)]-mu_shift)]_- d^3p d^3q.

    ``disp=None`` selects the non-relativistic dispersion p^2/2 (closed-form
    inner integral); otherwise the relativistic inner integral is nested
    quadrature.  The relativistic path with a Coulomb-singular V requires
    q_min > 0 (hyper-relativistic collapse otherwise).
    """
    spec = spec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-12)
    if q_min < 0:
        raise DomainError("q_min must be >= 0")

    def w_of(u):
        return np.maximum(np.asarray(V(u), dtype=float) - mu_shift, 0.0)

    if disp is None:
        def inner(u):
            return -NONREL_52_COEFF * w_of(u) ** 2.5
    else:
        def inner(u):
            u = np.atleast_1d(np.asarray(u, dtype=float))
            return np.array(
                [momentum_integral_rel(disp, float(w), spec) for w in w_of(u)]
            )

    grid = V.grid[V.grid > q_min]
    if grid.size < 2:
        raise DomainError("q_min leaves fewer than two grid points")
    if q_min > 0.0 and q_min < grid[0]:
        grid = np.concatenate([[q_min], grid])
    value = grid_quadrature(lambda u: inner(u) * u * u, grid)
    err = abs(value) * spec.rel_tol * 10.0

    # head: below the first grid point V follows its power-law head
    if q_min == 0.0:
        p_head = V._head_exp
        w0 = w_of(grid[0])
        if w0 > 0:
            if disp is None:
                head_pow = 2.5 * p_head + 2.0
                if head_pow <= -1.0:
                    raise DivergentIntegral(
                        "phase-space head diverges: V too singular at the origin"
                    )
                head = -NONREL_52_COEFF * w0**2.5 * grid[0] ** 3 / (head_pow + 1.0)
            else:
                # a growing head always reaches the linear-dispersion regime,
                # where the inner integral scales like v^4: the Coulomb head
                # collapses unless q_min > 0 cuts it off
                if p_head < 0.0 and 4.0 * p_head + 2.0 <= -1.0:
                    raise DivergentIntegral(
                        "relativistic phase-space head diverges for this "
                        "potential; use q_min > 0"
                    )
                head, herr = integrate_1d(
                    lambda u: float(inner(np.array([u]))[0]) * u * u,
                    0.0,
                    grid[0],
                    QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12, max_subdivisions=200),
                )
                err += herr
            value += head

    # tail: beyond the grid V uses its declared tail model
    if V.tail.kind == "power_law" and V.tail.coefficient != 0.0:
        tail_pow = 2.5 * V.tail.exponent + 2.0
        R = grid[-1]

        def tail_integrand(u):
            return float(np.atleast_1d(inner(u))[0]) * u * u

        if mu_shift > 0.0:
            # the allowed region ends where the tail crosses mu_shift
            u_star = (mu_shift / V.tail.coefficient) ** (1.0 / V.tail.exponent)
            if u_star > R:
                tail, terr = integrate_1d(
                    tail_integrand, R, u_star,
                    QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12, max_subdivisions=200),
                )
                err += terr
                value += tail
        else:
            if tail_pow >= -1.0:
                raise DivergentIntegral("phase-space tail diverges: V decays too slowly")
            if disp is None:
                tail = (
                    -NONREL_52_COEFF
                    * V.tail.coefficient**2.5
                    * R ** (tail_pow + 1.0)
                    / (-tail_pow - 1.0)
                )
            else:
                tail, terr = integrate_1d(
                    tail_integrand,
                    R,
                    math.inf,
                    QuadratureSpec(
                        rel_tol=1e-8,
                        abs_tol=1e-12,
                        max_subdivisions=200,
                        semi_infinite_transform="algebraic_map",
                    ),
                )
                err += terr
            value += tail

    value = value / (2.0 * math.pi) ** 3 * 4.0 * math.pi
    err = err / (2.0 * math.pi) ** 3 * 4.0 * math.pi
    domain = "full" if q_min == 0.0 else f"outside_radius({q_min!r})"
    return PhaseSpaceResult(value=float(value), quadrature_error=float(err), domain=domain)


@dataclass(frozen=True)
class QuarticCorrectionBound:
    """The p^4/8 rest-correction bound in its three printed forms."""

    value: float                # alpha^{(6-t)/2} (2Z)^{7/2} / (7 pi)
    phase_space_form: float     # (8 pi^2 (2Z)^{7/2} / 7) alpha^{-t/2}
    delta_form: float           # (8 sqrt2/(7 pi)) alpha^{-(1+t)/2} delta^{7/2}


def quartic_correction_bound(Z, alpha, t_exponent) -> QuarticCorrectionBound:
    """Bound for the alpha^3 p^4/8 correction over the allowed region
    {|q| > alpha^t/4, alpha p^2/2 < delta/|q|}."""
    if not (1.0 / 3.0 < t_exponent < 2.0 / 3.0):
        raise DomainError("t_exponent must lie in (1/3, 2/3)")
    if Z <= 0 or alpha <= 0:
        raise DomainError("Z and alpha must be positive")
    delta = Z * alpha
    value = alpha ** ((6.0 - t_exponent) / 2.0) * (2.0 * Z) ** 3.5 / (7.0 * math.pi)
    ps = 8.0 * math.pi**2 * (2.0 * Z) ** 3.5 / 7.0 * alpha ** (-t_exponent / 2.0)
    df = (
        8.0
        * math.sqrt(2.0)
        / (7.0 * math.pi)
        * alpha ** (-(1.0 + t_exponent) / 2.0)
        * delta**3.5
    )
    return QuarticCorrectionBound(value=value, phase_space_form=ps, delta_form=df)


def domain_change_error(
    sol: TFSolution,
    disp: Dispersion,
    t_exponent: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Upper bound for the momentum-domain swap {T(p) < a V} -> {a p^2/2 < a V}:

    (4 pi)^2 delta^{1/3} alpha^{2/3} int_W^inf w^2 V1(w)
        (X^{3/2}/3)((1+Y)^{3/2}-1) dw

    with X = 2 delta^{4/3} alpha^{-4/3} V1, Y = (1/2) delta^{4/3} alpha^{2/3} V1,
    W = (1/4) delta^{1/3} alpha^{t-1/3}, V1 the Z=1 TF potential, and
    (1+Y)^{3/2} replaced by its quadratic Taylor majorant.
    """
    alpha = disp.alpha
    delta = sol.params.Z * alpha
    if delta > 2.0 / math.pi + 1e-12:
        raise DomainError("delta = Z alpha must be <= 2/pi")
    if not (1.0 / 3.0 < t_exponent < 2.0 / 3.0):
        raise DomainError("t_exponent must lie in (1/3, 2/3)")
    prof = sol.profile
    b1 = sol.params.gamma_kin * (4.0 * math.pi) ** (-2.0 / 3.0)  # Z = 1 length scale

    def V1(w):
        return np.maximum(prof.phi(np.asarray(w, dtype=float) / b1), 0.0) / w

    W = 0.25 * delta ** (1.0 / 3.0) * alpha ** (t_exponent - 1.0 / 3.0)
    cX = 2.0 * delta ** (4.0 / 3.0) * alpha ** (-4.0 / 3.0)
    cY = 0.5 * delta ** (4.0 / 3.0) * alpha ** (2.0 / 3.0)

    def integrand(w):
        v = V1(w)
        X = cX * v
        Y = cY * v
        return w * w * v * (X**1.5 / 3.0) * (taylor_32_bound(Y) - 1.0)

    top = b1 * prof.xi[-1]
    if W >= top:
        raise DomainError("cutoff W beyond the tabulated potential")
    knots = np.concatenate([[W], b1 * prof.xi[(b1 * prof.xi) > W]])
    value = grid_quadrature(integrand, knots)
    if prof.x_edge is None:
        # V1 ~ c w^-4 beyond the grid: integrand ~ w^{2-4}*w^{-6}*(w^{-4}+...)
        c4 = V1(top) * top**4
        t1 = 1.5 * cY * cX**1.5 / 3.0 * c4**3.5 / (4.0 * 3.5 - 3.0) * top ** (3.0 - 14.0)
        t2 = 0.375 * cY**2 * cX**1.5 / 3.0 * c4**4.5 / (4.0 * 4.5 - 3.0) * top ** (3.0 - 18.0)
        value += t1 + t2
    return (4.0 * math.pi) ** 2 * delta ** (1.0 / 3.0) * alpha ** (2.0 / 3.0) * value


def tf_identity_chain(sol: TFSolution, spec: QuadratureSpec | None = None) -> dict:
    """Both sides of the chain connecting the full-domain non-relativistic
    phase-space sum to the TF energy.

    Returns every term so the mu N bookkeeping stays visible:
    ``phase_space`` = (1/(2 pi)^3) iint [p^2/2 - V_TF]_- (signed),
    ``repulsion``  = (1/2) D(rho, rho),  ``mu_times_N`` = mu N,
    ``lhs`` = phase_space - repulsion - mu_times_N, ``rhs`` = tf_energy.
    """
    Z = sol.params.Z
    rho = sol.rho
    pot = coulomb_potential(rho)
    grid = rho.grid

    def w_plus(u):
        return np.maximum(Z / u - pot(u) - sol.mu, 0.0)

    ps = -PHASE_SPACE_COEFF * 4.0 * math.pi * grid_quadrature(
        lambda u: w_plus(u) ** 2.5 * u * u, grid
    )
    # head: V ~ Z/u below the first grid point
    ps += -PHASE_SPACE_COEFF * 4.0 * math.pi * 2.0 * Z**2.5 * math.sqrt(grid[0])
    if math.isinf(sol.edge_radius):
        # tail: [V]_+ ~ c u^-4, integrand c^{5/2} u^{-8}
        c4 = w_plus(grid[-1]) * grid[-1] ** 4
        ps += (
            -PHASE_SPACE_COEFF
            * 4.0
            * math.pi
            * c4**2.5
            * grid[-1] ** (-7.0)
            / 7.0
        )
    repulsion = sol.energy_terms["repulsion"]
    mu_n = sol.mu * sol.params.N
    lhs = ps - repulsion - mu_n
    rhs = tf_energy(sol)
    return {
        "phase_space": float(ps),
        "repulsion": float(repulsion),
        "mu_times_N": float(mu_n),
        "lhs": float(lhs),
        "rhs": float(rhs),
        "ratio": float(lhs / rhs),
    }


# ---------------------------------------------------------------------------
# coherent states


def _bump_unnormalized(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _bump_norm_constant():
    # c with int (c g)^2 d^3x = 1 over the unit ball
    val, _ = integrate_1d(
        lambda r: float(_bump_unnormalized(np.array([r]))[0]) ** 2 * r * r,
        0.0,
        1.0,
        QuadratureSpec(rel_tol=1e-13, abs_tol=1e-16),
    )
    return 1.0 / math.sqrt(4.0 * math.pi * val)


@lru_cache(maxsize=1)
def _bump_grad_sup():
    c = _bump_norm_constant()
    r = np.linspace(1e-9, 1.0 - 1e-9, 2_000_001)
    w = 1.0 - r * r
    g = c * np.exp(-1.0 / w) * 2.0 * r / (w * w)
    return float(np.max(g))


@dataclass(frozen=True)
class CoherentSpec:
    """Coherent-state profile: smooth radial bump on the unit ball with unit
    L2 norm, plus its measured gradient sup and support volume."""

    s_exponent: float
    g_profile: object
    grad_sup: float
    support_volume: float

    def __post_init__(self):
        if not (1.0 / 3.0 < self.s_exponent < 2.0 / 3.0):
            raise DomainError("s_exponent must lie in (1/3, 2/3)")

    @classmethod
    def reference(cls, s_exponent=0.55):
        c = _bump_norm_constant()

        def g(r):
            return c * _bump_unnormalized(r)

        return cls(
            s_exponent=s_exponent,
            g_profile=g,
            grad_sup=_bump_grad_sup(),
            support_volume=4.0 * math.pi / 3.0,
        )

    def g_scaled(self, alpha):
        """g_alpha(r) = alpha^{-3s/2} g(r / alpha^s): unit L2, support alpha^s."""
        a_s = alpha**self.s_exponent
        g = self.g_profile

        def g_a(r):
            return a_s ** (-1.5) * g(np.asarray(r, dtype=float) / a_s)

        return g_a, a_s

    def check_normalization(self, tol=1e-10):
        val, _ = integrate_1d(
            lambda r: float(self.g_profile(np.array([r]))[0]) ** 2 * r * r,
            0.0,
            1.0,
            QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15),
        )
        total = 4.0 * math.pi * val
        if abs(total - 1.0) > tol:
            raise PreconditionFailure(
                f"coherent profile not normalised: int g^2 = {total!r}"
            )
        return total


def coherent_resolution_check(
    f, cs: CoherentSpec, alpha: float, spec: QuadratureSpec | None = None
) -> dict:
    """Resolution of identity: (f, f) against the Parseval-route evaluation
    (f, (1 * g_alpha^2) f), both by radial quadrature."""
    spec = spec or QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15)
    cs.check_normalization()
    g_a, a_s = cs.g_scaled(alpha)
    lhs, _ = integrate_1d(lambda r: f(r) ** 2 * r * r, 0.0, math.inf, spec)
    lhs *= 4.0 * math.pi
    gmass, _ = integrate_1d(
        lambda r: float(g_a(np.array([r]))[0]) ** 2 * r * r, 0.0, a_s, spec
    )
    gmass *= 4.0 * math.pi
    return {"identity_lhs": float(lhs), "identity_rhs": float(lhs * gmass)}


def smeared_coulomb(cs: CoherentSpec, alpha: float, route: str = "newton_split"):
    """(1/|.| * g_alpha^2) as a callable, by one of two independent
    quadrature routes: the Newton split formula, or the explicit angular
    integral of the convolution."""
    g_a, a_s = cs.g_scaled(alpha)

    def phi_a(r):
        return np.asarray(g_a(r), dtype=float) ** 2

    qspec = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-16)

    if route == "newton_split":
        def conv(r):
            r = float(r)
            upper = min(r, a_s)
            inner = 0.0
            if upper > 0:
                inner, _ = integrate_1d(
                    lambda v: float(phi_a(np.array([v]))[0]) * v * v, 0.0, upper, qspec
                )
            outer = 0.0
            if r < a_s:
                outer, _ = integrate_1d(
                    lambda v: float(phi_a(np.array([v]))[0]) * v, r, a_s, qspec
                )
            return 4.0 * math.pi * (inner / r + outer)

        return conv

    if route == "angular":
        from .numerics import _GL_NODES, _GL_WEIGHTS

        # tensorized product rule; the cos-angle substitution c = 1 - s^2
        # regularizes the v ~ r coincidence limit, and the geometric s-grid
        # resolves the |r - v|-wide boundary layer it leaves behind
        s_knots = np.concatenate([[0.0], np.geomspace(1e-9, math.sqrt(2.0), 120)])
        sm = 0.5 * (s_knots[1:] + s_knots[:-1])
        sh = 0.5 * (s_knots[1:] - s_knots[:-1])
        s_nodes = (sm[:, None] + sh[:, None] * _GL_NODES[None, :]).ravel()
        s_w = (sh[:, None] * _GL_WEIGHTS[None, :]).ravel()

        def conv(r):
            r = float(r)
            # the angular factor loses smoothness across v = r: put a knot there
            base = np.linspace(0.0, a_s, 65)
            v_knots = np.unique(np.concatenate([base, [r]])) if 0.0 < r < a_s else base
            vm = 0.5 * (v_knots[1:] + v_knots[:-1])
            vh = 0.5 * (v_knots[1:] - v_knots[:-1])
            v_nodes = (vm[:, None] + vh[:, None] * _GL_NODES[None, :]).ravel()
            v_w = (vh[:, None] * _GL_WEIGHTS[None, :]).ravel()
            phi_nodes = phi_a(v_nodes) * v_nodes * v_nodes * v_w
            d2 = (r - v_nodes)[:, None] ** 2 + 2.0 * r * v_nodes[:, None] * s_nodes[None, :] ** 2
            ang = 2.0 * np.dot(1.0 / np.sqrt(d2), s_nodes * s_w)
            return 2.0 * math.pi * float(np.dot(phi_nodes, ang))

        return conv

    raise DomainError(f"unknown convolution route {route!r}")


def coherent_potential_check(
    f, cs: CoherentSpec, alpha: float, spec: QuadratureSpec | None = None, r_max=12.0
) -> dict:
    """(f, (1/|q| * g_alpha^2) f) by the two independent convolution routes.

    Each smeared potential is sampled on a log radial grid dense enough for
    1e-9 interpolation accuracy, then integrated against f^2 r^2; sampling
    keeps the triple-quadrature cost bounded.
    """
    _, a_s = cs.g_scaled(alpha)
    knots = np.geomspace(min(1e-4, 0.01 * a_s), max(r_max, 3.0 * a_s), 260)
    out = {}
    for key, route in (("route_newton", "newton_split"), ("route_angular", "angular")):
        conv = smeared_coulomb(cs, alpha, route)
        samples = np.array([conv(r) for r in knots])
        interp = PchipInterpolator(knots, samples)

        def integrand(r):
            return np.asarray([f(x) for x in np.atleast_1d(r)]) ** 2 * interp(r) * r * r

        val = grid_quadrature(integrand, knots)
        # head: conv is flat near 0, f^2 r^2 integrable
        val += samples[0] * f(0.5 * knots[0]) ** 2 * knots[0] ** 3 / 3.0
        out[key] = 4.0 * math.pi * val
    return out


def coherent_kinetic_error_bound(cs: CoherentSpec, alpha: float) -> float:
    """3 alpha ||grad g_alpha||_inf^2 Vol(supp g_alpha) per unit ||f||^2
    = 4 pi ||grad g||_inf^2 alpha^{1-2s}."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return 4.0 * math.pi * cs.grad_sup**2 * alpha ** (1.0 - 2.0 * cs.s_exponent)


def newton_smearing_check(alpha, s_exponent, cs: CoherentSpec, radius) -> float:
    """|1/R - (g_alpha^2 * 1/|.|)(R)| by radial quadrature; vanishes (to
    quadrature accuracy) for R outside the smearing support."""
    if radius <= 0:
        raise DomainError("radius must be positive")
    cs2 = cs if cs.s_exponent == s_exponent else CoherentSpec(
        s_exponent=s_exponent,
        g_profile=cs.g_profile,
        grad_sup=cs.grad_sup,
        support_volume=cs.support_volume,
    )
    conv = smeared_coulomb(cs2, alpha, "newton_split")
    return abs(1.0 / radius - conv(radius))
