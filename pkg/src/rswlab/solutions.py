"""Catalog of exact solution families.

Each constructor returns a :class:`~rswlab.core.FlowField` with a validity
window, analytic first derivatives where the closed forms allow it, and
metadata used by trajectory formulas and the CLI.  Families:

``rest``
    State of rest with constant depth (polar frame, also available in
    Cartesian form for the equivalence-map checks).
``constant-sw-image``
    Rotating-frame image of a uniform non-rotating stream; lives on one
    inertial period, particles ride circular arcs.
``barochronous-sw``
    Non-rotating solution whose depth depends on time only; it is the image
    of the rest state under the equivalence map.
``stationary-rotsym``
    Stationary rotationally symmetric class: zero radial velocity, a free
    swirl profile, depth from the cyclogeostrophic balance integral.
``pulsating-cylinder``
    Time-periodic solution transported from rest: a rigidly pulsating
    column whose depth depends on time only.
``pulsating-drop``
    Time-periodic localized solution transported from a quadratic swirl
    profile; depth vanishes on a pulsating boundary circle.
``stationary-ring``
    Stationary flow with radial throughput confined to an annulus bounded
    by sonic circles; depth solves a cubic with two branches.
``collapse-contact``
    Unsteady flow whose similarity surfaces are material (contact)
    characteristics; interpreted as a ring compressed by pistons.
``collapse-contact-cubic``
    Companion class with constant swirl invariant ruled by a per-level
    cubic.
``collapse-scaling``
    Self-similar spreading/collapse regime driven by the implicit
    tabulation from :mod:`rswlab.reduction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .core import FlowField, FlowParameters, Window
from .errors import InvalidParams, UnsupportedFamily
from .reduction import (
    ImplicitCollapse,
    collapse2_build,
    cubic_roots,
    depth_cubic_coeffs,
    ring_bounds,
    solve_cubic_real,
)
from .transforms import y9_time_map

FAMILY_NAMES = (
    "rest",
    "constant-sw-image",
    "barochronous-sw",
    "stationary-rotsym",
    "pulsating-cylinder",
    "pulsating-drop",
    "stationary-ring",
    "collapse-contact",
    "collapse-contact-cubic",
    "collapse-scaling",
)

_ALIASES = {
    "rest-state": "rest",
    "constant": "constant-sw-image",
    "barochronous": "barochronous-sw",
    "cylinder": "pulsating-cylinder",
    "drop": "pulsating-drop",
    "ring": "stationary-ring",
}


def canonical_family_name(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in FAMILY_NAMES:
        raise UnsupportedFamily(f"unknown family {name!r}; known: {FAMILY_NAMES}")
    return key


# ---------------------------------------------------------------------------
# Swirl profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """A swirl profile V(r) with analytic derivative.

    Profiles must vanish at the origin (V ~ O(r)) so that the balance
    integral converges.
    """

    fn: Callable[[float], float]
    deriv: Callable[[float], float]
    label: str

    def __call__(self, r: float) -> float:
        return self.fn(r)


def profile_zero() -> RadialProfile:
    return RadialProfile(lambda r: 0.0, lambda r: 0.0, "zero")


def profile_solid(omega: float) -> RadialProfile:
    return RadialProfile(lambda r: omega * r, lambda r: omega, f"solid:{omega:g}")


def profile_quadratic(coef: float) -> RadialProfile:
    return RadialProfile(
        lambda r: coef * r * r, lambda r: 2.0 * coef * r, f"quadratic:{coef:g}"
    )


def profile_gauss(coef: float, width: float = 2.0) -> RadialProfile:
    w2 = width * width

    def fn(r):
        return coef * r * math.exp(-r * r / w2)

    def deriv(r):
        return coef * math.exp(-r * r / w2) * (1.0 - 2.0 * r * r / w2)

    return RadialProfile(fn, deriv, f"gauss:{coef:g},{width:g}")


def parse_profile(spec: str) -> RadialProfile:
    """Parse a CLI profile spec like ``solid:0.4`` or ``gauss:0.5,2``."""
    name, _, rest = spec.partition(":")
    args = [float(tok) for tok in rest.split(",") if tok] if rest else []
    name = name.strip().lower()
    if name == "zero":
        return profile_zero()
    if name == "solid":
        return profile_solid(*(args or [0.5]))
    if name == "quadratic":
        return profile_quadratic(*(args or [-0.25]))
    if name == "gauss":
        return profile_gauss(*(args or [0.5]))
    raise InvalidParams(f"unknown profile {spec!r}")


# ---------------------------------------------------------------------------
# Simple families
# ---------------------------------------------------------------------------


def rest_state(h0: float, params: FlowParameters, frame: str = "polar") -> FlowField:
    """State of rest with constant depth; exact in both frames."""
    if not h0 > 0.0:
        raise InvalidParams(f"h0 must be positive, got {h0}")

    def value_fn(t, a, b):
        return 0.0, 0.0, h0

    def jet_fn(t, a, b):
        return np.array([0.0, 0.0, h0]), np.zeros((3, 3))

    return FlowField(
        frame=frame,
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(),
        label=f"rest(h0={h0:g})",
        meta={
            "family": "rest",
            "h0": h0,
            "profile": profile_zero(),
            "sample_box": {"t": (0.0, params.period), "r": (0.0, 2.0), "x": (-2.0, 2.0)},
        },
    )


def constant_sw_image(
    u0: float, v0: float, h0: float, params: FlowParameters
) -> FlowField:
    """Rotating-frame image of the uniform stream (u0, v0, h0).

    Solving the equivalence transformation for the rotating variables gives

        u = (f x / 2 - u0) cot(f t / 2) + f y / 2 - v0,
        v = -f x / 2 + u0 + (f y / 2 - v0) cot(f t / 2),
        h = 2 h0 / (1 - cos(f t)),

    valid on one inertial period.  Particle paths are arcs of circles; the
    solution blows up towards both window ends.
    """
    if not h0 > 0.0:
        raise InvalidParams(f"h0 must be positive, got {h0}")
    f = params.f
    period = params.period

    def value_fn(t, x, y):
        w = 1.0 - math.cos(f * t)
        c = math.sin(f * t) / w  # cot(f t / 2)
        u = (f * x / 2.0 - u0) * c + f * y / 2.0 - v0
        v = -f * x / 2.0 + u0 + (f * y / 2.0 - v0) * c
        return u, v, 2.0 * h0 / w

    def jet_fn(t, x, y):
        w = 1.0 - math.cos(f * t)
        s = math.sin(f * t)
        c = s / w
        cdot = -(f / 2.0) * (1.0 + c * c)
        u = (f * x / 2.0 - u0) * c + f * y / 2.0 - v0
        v = -f * x / 2.0 + u0 + (f * y / 2.0 - v0) * c
        h = 2.0 * h0 / w
        vals = np.array([u, v, h])
        grad = np.array(
            [
                [(f * x / 2.0 - u0) * cdot, (f / 2.0) * c, f / 2.0],
                [(f * y / 2.0 - v0) * cdot, -f / 2.0, (f / 2.0) * c],
                [-2.0 * h0 * f * s / (w * w), 0.0, 0.0],
            ]
        )
        return vals, grad

    return FlowField(
        frame="cartesian",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(t_lo=0.0, t_hi=period, t_guard=1e-9 * period),
        label=f"constant-sw-image(u0={u0:g}, v0={v0:g}, h0={h0:g})",
        meta={
            "family": "constant-sw-image",
            "u0": u0,
            "v0": v0,
            "h0": h0,
            "sample_box": {"t": (0.08 * period, 0.92 * period), "x": (-2.0, 2.0)},
        },
    )


def barochronous_sw(h0: float, params: FlowParameters) -> FlowField:
    """Non-rotating solution with depth depending on time only.

    This is the image of the rest state under the equivalence map:
    u = (f^2 t x - f y) / W, v = (f x + f^2 t y) / W, h = h0 / W with
    W = 1 + f^2 t^2.  It solves the system with the Coriolis term dropped,
    for all times.
    """
    if not h0 > 0.0:
        raise InvalidParams(f"h0 must be positive, got {h0}")
    f = params.f

    def value_fn(t, x, y):
        W = 1.0 + f * f * t * t
        return (f * f * t * x - f * y) / W, (f * x + f * f * t * y) / W, h0 / W

    def jet_fn(t, x, y):
        W = 1.0 + f * f * t * t
        Wd = 2.0 * f * f * t
        u = (f * f * t * x - f * y) / W
        v = (f * x + f * f * t * y) / W
        h = h0 / W
        vals = np.array([u, v, h])
        grad = np.array(
            [
                [f * f * x / W - u * Wd / W, f * f * t / W, -f / W],
                [f * f * y / W - v * Wd / W, f / W, f * f * t / W],
                [-h0 * Wd / (W * W), 0.0, 0.0],
            ]
        )
        return vals, grad

    return FlowField(
        frame="cartesian",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(),
        system="sw",
        label=f"barochronous-sw(h0={h0:g})",
        meta={
            "family": "barochronous-sw",
            "h0": h0,
            "sample_box": {"t": (-2.0, 5.0), "x": (-2.0, 2.0)},
        },
    )


def stationary_rotsym(
    profile: RadialProfile, h0: float, params: FlowParameters, r_max: float = 6.0
) -> FlowField:
    """Stationary rotationally symmetric flow with a free swirl profile.

    Zero radial velocity, V = profile(r), and the depth from integrating
    the cyclogeostrophic balance g h'(r) = V^2 / r + f V from the origin,
    evaluated by adaptive quadrature.  The profile must vanish at r = 0.
    """
    if not h0 > 0.0:
        raise InvalidParams(f"h0 must be positive, got {h0}")
    if abs(profile(0.0)) > 0.0:
        raise InvalidParams("swirl profile must vanish at the origin")
    f, g = params.f, params.g

    def integrand(r):
        if r <= 0.0:
            return 0.0  # profile ~ O(r), so the integrand vanishes at the origin
        V = profile(r)
        return (V * V / r + f * V) / g

    cache: dict[float, float] = {}

    def depth(r):
        val = cache.get(r)
        if val is None:
            val = h0 + quad(integrand, 0.0, r, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
            cache[r] = val
        return val

    # reject profiles that drain the depth below zero inside the window
    for rr in np.linspace(0.0, r_max, 61)[1:]:
        if depth(float(rr)) <= 0.0:
            raise InvalidParams(
                f"depth becomes non-positive at r={rr:g}; choose a tamer profile"
            )

    def value_fn(t, r, theta):
        return 0.0, profile(r), depth(r)

    def jet_fn(t, r, theta):
        V = profile(r)
        vals = np.array([0.0, V, depth(r)])
        h_r = (V * V / r + f * V) / g if r > 0.0 else 0.0
        grad = np.array(
            [
                [0.0, 0.0, 0.0],
                [0.0, profile.deriv(r), 0.0],
                [0.0, h_r, 0.0],
            ]
        )
        return vals, grad

    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(),
        label=f"stationary-rotsym({profile.label}, h0={h0:g})",
        meta={
            "family": "stationary-rotsym",
            "h0": h0,
            "profile": profile,
            "sample_box": {"t": (0.0, params.period), "r": (0.05, r_max * 0.9)},
        },
    )


# ---------------------------------------------------------------------------
# Pulsating (transported) families, in closed form
# ---------------------------------------------------------------------------


def _pulsation_scalars(t: float, alpha: float, f: float):
    """Shared time factors of the transported families.

    D = cos^2(f t/2) + alpha^2 sin^2(f t/2) written via cos(f t); it is the
    squared inverse of the radial stretch rho = sqrt(alpha / D).  All four
    are smooth for all t.
    """
    c = math.cos(f * t)
    s = math.sin(f * t)
    D = 0.5 * ((1.0 + alpha * alpha) + c * (1.0 - alpha * alpha))
    Ddot = 0.5 * f * s * (alpha * alpha - 1.0)
    return c, s, D, Ddot


def pulsating_cylinder(alpha: float, h0: float, params: FlowParameters) -> FlowField:
    """Pulsating liquid column: transport of the rest state.

    U = f r (alpha^2 - 1) sin(f t) / (4 D),
    V = -f r (alpha - 1) ((alpha - 1) - cos(f t)(alpha + 1)) / (4 D),
    h = alpha h0 / D,

    with D as in :func:`_pulsation_scalars`.  The depth depends on time
    only; every particle rides a circle and returns after one inertial
    period; the potential vorticity is f / h0 everywhere.
    """
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise InvalidParams(f"alpha must be positive, got {alpha}")
    if not h0 > 0.0:
        raise InvalidParams(f"h0 must be positive, got {h0}")
    f = params.f

    def coeffs(t):
        c, s, D, Ddot = _pulsation_scalars(t, alpha, f)
        cu = f * (alpha * alpha - 1.0) * s / (4.0 * D)
        cv = -f * (alpha - 1.0) * ((alpha - 1.0) - c * (alpha + 1.0)) / (4.0 * D)
        return c, s, D, Ddot, cu, cv

    def value_fn(t, r, theta):
        _, _, D, _, cu, cv = coeffs(t)
        return cu * r, cv * r, alpha * h0 / D

    def jet_fn(t, r, theta):
        c, s, D, Ddot, cu, cv = coeffs(t)
        cu_dot = f * (alpha * alpha - 1.0) * (f * c * D - s * Ddot) / (4.0 * D * D)
        cv_dot = (
            -f
            * (alpha - 1.0)
            * ((f * s * (alpha + 1.0)) * D - ((alpha - 1.0) - c * (alpha + 1.0)) * Ddot)
            / (4.0 * D * D)
        )
        vals = np.array([cu * r, cv * r, alpha * h0 / D])
        grad = np.array(
            [
                [cu_dot * r, cu, 0.0],
                [cv_dot * r, cv, 0.0],
                [-alpha * h0 * Ddot / (D * D), 0.0, 0.0],
            ]
        )
        return vals, grad

    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(),
        label=f"pulsating-cylinder(alpha={alpha:g}, h0={h0:g})",
        meta={
            "family": "pulsating-cylinder",
            "alpha": alpha,
            "h0": h0,
            "profile": profile_zero(),
            "transported": True,
            "sample_box": {"t": (0.0, params.period), "r": (0.05, 2.0)},
        },
    )


def drop_swirl_coefficient(alpha: float, params: FlowParameters) -> float:
    """Quadratic swirl coefficient l = -f^2 sqrt(alpha / (12 g)) < 0.

    Tied to the transport parameter so the transported profile closes the
    depth at a finite pulsating boundary circle.
    """
    f, g = params.f, params.g
    return -f * f * math.sqrt(alpha / (12.0 * g))


def drop_base_depth(alpha: float, params: FlowParameters) -> Callable[[float], float]:
    """Base depth profile of the drop before transport.

    hbar(x) = (l^2/(4g)) x^4 + (f l/(3g)) x^3 + f^4/(12 g l^2); it has a
    double zero at x = -f/l and is positive inside.
    """
    f, g = params.f, params.g
    l = drop_swirl_coefficient(alpha, params)
    a4 = l * l / (4.0 * g)
    a3 = f * l / (3.0 * g)
    a0 = f ** 4 / (12.0 * g * l * l)

    def hbar(x):
        return ((a4 * x + a3) * x * x) * x + a0

    return hbar


def pulsating_drop(alpha: float, params: FlowParameters) -> FlowField:
    """Pulsating localized volume: transport of the quadratic swirl profile.

    The base flow has swirl l r^2 and a depth vanishing at r = -f/l; the
    transported solution has depth zero on the moving circle
    R*(t) = (-f/l) sqrt(D / alpha), maximal depth at the center, and period
    one inertial period.  Particle paths generally only quasi-close; see
    :func:`closure_condition`.
    """
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise InvalidParams(f"alpha must be positive, got {alpha}")
    f, g = params.f, params.g
    l = drop_swirl_coefficient(alpha, params)
    a4 = l * l / (4.0 * g)
    a3 = f * l / (3.0 * g)
    a0 = f ** 4 / (12.0 * g * l * l)

    def value_fn(t, r, theta):
        c, s, D, _ = _pulsation_scalars(t, alpha, f)
        P = alpha / D  # rho^2
        cu = f * (alpha * alpha - 1.0) * s / (4.0 * D)
        B = -f * (alpha - 1.0) * ((alpha - 1.0) - c * (alpha + 1.0)) / (4.0 * D)
        U = cu * r
        V = l * r * r * P ** 1.5 + B * r
        h = a4 * r ** 4 * P ** 3 + a3 * r ** 3 * P ** 2.5 + a0 * P
        return U, V, h

    def jet_fn(t, r, theta):
        c, s, D, Ddot = _pulsation_scalars(t, alpha, f)
        P = alpha / D
        Pdot = -P * Ddot / D
        cu = f * (alpha * alpha - 1.0) * s / (4.0 * D)
        B = -f * (alpha - 1.0) * ((alpha - 1.0) - c * (alpha + 1.0)) / (4.0 * D)
        cu_dot = f * (alpha * alpha - 1.0) * (f * c * D - s * Ddot) / (4.0 * D * D)
        B_dot = (
            -f
            * (alpha - 1.0)
            * ((f * s * (alpha + 1.0)) * D - ((alpha - 1.0) - c * (alpha + 1.0)) * Ddot)
            / (4.0 * D * D)
        )
        U = cu * r
        V = l * r * r * P ** 1.5 + B * r
        h = a4 * r ** 4 * P ** 3 + a3 * r ** 3 * P ** 2.5 + a0 * P
        vals = np.array([U, V, h])
        grad = np.array(
            [
                [cu_dot * r, cu, 0.0],
                [
                    l * r * r * 1.5 * P ** 0.5 * Pdot + B_dot * r,
                    2.0 * l * r * P ** 1.5 + B,
                    0.0,
                ],
                [
                    3.0 * a4 * r ** 4 * P * P * Pdot
                    + 2.5 * a3 * r ** 3 * P ** 1.5 * Pdot
                    + a0 * Pdot,
                    4.0 * a4 * r ** 3 * P ** 3 + 3.0 * a3 * r * r * P ** 2.5,
                    0.0,
                ],
            ]
        )
        return vals, grad

    def boundary_radius(t: float) -> float:
        _, _, D, _ = _pulsation_scalars(t, alpha, f)
        return (-f / l) * math.sqrt(D / alpha)

    r_box = 0.9 * min(boundary_radius(0.0), boundary_radius(math.pi / f))
    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(),
        label=f"pulsating-drop(alpha={alpha:g})",
        meta={
            "family": "pulsating-drop",
            "alpha": alpha,
            "swirl_coef": l,
            "boundary_radius": boundary_radius,
            "profile": profile_quadratic(l),
            "transported": True,
            "sample_box": {"t": (0.0, params.period), "r": (0.05, r_box)},
        },
    )


# ---------------------------------------------------------------------------
# Stationary ring
# ---------------------------------------------------------------------------


def stationary_ring(
    C1: float,
    C2: float,
    C3: float,
    params: FlowParameters,
    branch: str = "lower",
) -> FlowField:
    """Stationary annular flow bounded by sonic circles.

    U = C3 / (r h), V = C2 / r - f r / 2, with the depth h(r) a root of
    h^3 + phi1(r) h^2 + phi2(r) = 0.  Two positive branches exist on
    [r_inner, r_outer]; the lower one (smaller depth) is supercritical,
    the upper subcritical.  At the interval ends the depth derivative is
    unbounded and the flow is exactly sonic there.
    """
    if branch not in ("lower", "upper"):
        raise InvalidParams(f"branch must be 'lower' or 'upper', got {branch!r}")
    bounds = ring_bounds(C1, C2, C3, params)  # raises NoRingExists if empty
    f = params.f

    def depth(r):
        phi1, phi2 = depth_cubic_coeffs(r, C1, C2, C3, params)
        roots = [x for x in cubic_roots(phi1, phi2) if x > 0.0]
        if len(roots) < 2:
            # double root at the interval ends
            return roots[0] if roots else -2.0 / 3.0 * phi1
        return roots[0] if branch == "lower" else roots[-1]

    def value_fn(t, r, theta):
        h = depth(r)
        return C3 / (r * h), C2 / r - f * r / 2.0, h

    def jet_fn(t, r, theta):
        g = params.g
        h = depth(r)
        phi1, _ = depth_cubic_coeffs(r, C1, C2, C3, params)
        phi1_r = (f * f * r / 4.0 - C2 * C2 / r ** 3) / g
        phi2_r = -C3 * C3 / (g * r ** 3)
        F_r = phi1_r * h * h + phi2_r
        F_h = (3.0 * h + 2.0 * phi1) * h
        h_r = -F_r / F_h
        U = C3 / (r * h)
        vals = np.array([U, C2 / r - f * r / 2.0, h])
        grad = np.array(
            [
                [0.0, -U * (1.0 / r + h_r / h), 0.0],
                [0.0, -C2 / (r * r) - f / 2.0, 0.0],
                [0.0, h_r, 0.0],
            ]
        )
        return vals, grad

    span = bounds.r_outer - bounds.r_inner
    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(r_lo=bounds.r_inner, r_hi=bounds.r_outer),
        label=f"stationary-ring(C=({C1:g},{C2:g},{C3:g}), {branch})",
        meta={
            "family": "stationary-ring",
            "C": (C1, C2, C3),
            "branch": branch,
            "bounds": bounds,
            "sample_box": {
                "t": (0.0, params.period),
                "r": (bounds.r_inner + 0.05 * span, bounds.r_outer - 0.05 * span),
            },
        },
    )


# ---------------------------------------------------------------------------
# Contact-characteristic collapse families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwirlInvariant:
    """psi(lam) with analytic derivative, for the contact family."""

    fn: Callable[[float], float]
    deriv: Callable[[float], float]
    label: str

    def __call__(self, lam: float) -> float:
        return self.fn(lam)


def swirl_constant(c: float) -> SwirlInvariant:
    return SwirlInvariant(lambda lam: c, lambda lam: 0.0, f"const:{c:g}")


def swirl_sine(amplitude: float = 1.0) -> SwirlInvariant:
    return SwirlInvariant(
        lambda lam: amplitude * math.sin(lam),
        lambda lam: amplitude * math.cos(lam),
        f"sine:{amplitude:g}",
    )


def parse_swirl(spec: str) -> SwirlInvariant:
    name, _, rest = spec.partition(":")
    args = [float(tok) for tok in rest.split(",") if tok] if rest else []
    name = name.strip().lower()
    if name == "const":
        return swirl_constant(*(args or [1.0]))
    if name == "sine":
        return swirl_sine(*(args or [1.0]))
    raise InvalidParams(f"unknown swirl invariant {spec!r}")


def collapse_contact(
    psi: SwirlInvariant,
    lam0: float,
    eta0: float,
    params: FlowParameters,
) -> FlowField:
    """Ring collapse with material similarity surfaces.

    In the similarity variable lam = (1 - cos(f t)) / r^2 the solution is

        U = (f r / 2) cot(f t / 2),
        V = psi(lam) / r - f r / 2,
        h = eta(lam) / r^2,
        eta(lam) = (lam0 eta0 - (1 / 2g) integral_{lam0}^{lam} psi^2) / lam.

    Surfaces lam = const move with the fluid, so the flow can be read as a
    liquid ring compressed by pistons r ~ sin(f t / 2).  The depth must
    stay positive, which bounds lam from above; the window tracks that
    bound.
    """
    if not (eta0 > 0.0 and lam0 > 0.0):
        raise InvalidParams("lam0 and eta0 must be positive")
    f, g = params.f, params.g
    budget = lam0 * eta0

    def psi_sq_integral(lam: float) -> float:
        return quad(lambda v: psi(v) ** 2, lam0, lam, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    def eta(lam: float) -> float:
        return (budget - psi_sq_integral(lam) / (2.0 * g)) / lam

    # find where the depth budget runs out (eta crosses zero above lam0);
    # a vanishing swirl never exhausts it, so cap the search geometrically
    lam_ceiling = lam0 + 1e4 * max(lam0, 1.0)
    step = max(lam0, 1.0)
    lam_max = lam0
    while lam_max + step < lam_ceiling and eta(lam_max + step) > 0.0:
        lam_max += step
        step *= 1.5
    if lam_max + step >= lam_ceiling:
        lam_max = lam_ceiling
    else:
        lo, hi = lam_max, lam_max + step
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if eta(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12 * max(1.0, lo):
                break
        lam_max = lo
    lam_cap = lam0 + 0.95 * (lam_max - lam0)

    def eta_deriv(lam: float) -> float:
        return -psi(lam) ** 2 / (2.0 * g * lam) - eta(lam) / lam

    def value_fn(t, r, theta):
        w = 1.0 - math.cos(f * t)
        lam = w / (r * r)
        U = (f * r / 2.0) * math.sin(f * t) / w
        V = psi(lam) / r - f * r / 2.0
        return U, V, eta(lam) / (r * r)

    def jet_fn(t, r, theta):
        w = 1.0 - math.cos(f * t)
        s = math.sin(f * t)
        lam = w / (r * r)
        lam_t = f * s / (r * r)
        lam_r = -2.0 * lam / r
        cot = s / w
        cot_dot = -(f / 2.0) * (1.0 + cot * cot)
        e = eta(lam)
        ed = eta_deriv(lam)
        pd = psi.deriv(lam)
        U = (f * r / 2.0) * cot
        V = psi(lam) / r - f * r / 2.0
        vals = np.array([U, V, e / (r * r)])
        grad = np.array(
            [
                [(f * r / 2.0) * cot_dot, (f / 2.0) * cot, 0.0],
                [pd * lam_t / r, pd * lam_r / r - psi(lam) / (r * r) - f / 2.0, 0.0],
                [ed * lam_t / (r * r), ed * lam_r / (r * r) - 2.0 * e / r ** 3, 0.0],
            ]
        )
        return vals, grad

    def r_lo(t: float) -> float:
        w = 1.0 - math.cos(f * t)
        return math.sqrt(w / lam_cap)

    # default sampling stays within a few swirl periods of lam0: far out on
    # the similarity axis the radius shrinks until fixed-step differencing
    # can no longer resolve psi(lam) oscillations
    lam_box = min(lam_cap, lam0 + 25.0 * max(1.0, lam0))
    period = params.period
    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(t_lo=0.0, t_hi=period, t_guard=1e-9 * period, r_lo=r_lo),
        label=f"collapse-contact(psi={psi.label}, lam0={lam0:g}, eta0={eta0:g})",
        meta={
            "family": "collapse-contact",
            "psi": psi,
            "lam0": lam0,
            "eta0": eta0,
            "lam_max": lam_max,
            "eta_fn": eta,
            "sample_box": {"t": (0.1 * period, 0.9 * period), "lam": (0.2 * lam0, lam_box)},
        },
    )


def collapse_contact_cubic(
    C1: float,
    C2: float,
    C3: float,
    params: FlowParameters,
    branch: str = "lower",
) -> FlowField:
    """Constant-swirl companion of the contact family.

    With psi = C2 the radial invariant phi(lam) solves the per-level cubic
    phi^3 + (C2^2 - C1/lam) phi + 2 g C3 / lam = 0 and eta = C3 / (lam phi).
    Two branches with sign(phi) = sign(C3) exist below the double-root
    level lam_c; root selection is by magnitude with continuity guaranteed
    away from lam_c.
    """
    if branch not in ("lower", "upper"):
        raise InvalidParams(f"branch must be 'lower' or 'upper', got {branch!r}")
    if C3 == 0.0:
        raise InvalidParams("C3 must be nonzero (depth would vanish)")
    f, g = params.f, params.g
    sign = 1.0 if C3 > 0.0 else -1.0

    def admissible_roots(lam: float) -> list[float]:
        p = C2 * C2 - C1 / lam
        q = 2.0 * g * C3 / lam
        roots = [x for x in solve_cubic_real(0.0, p, q) if x * sign > 0.0]
        return sorted(roots, key=abs)

    def discriminant(lam: float) -> float:
        p = C2 * C2 - C1 / lam
        q = 2.0 * g * C3 / lam
        return (q / 2.0) ** 2 + (p / 3.0) ** 3

    if discriminant(1e-8) >= 0.0:
        raise InvalidParams(
            "no two-branch region: the cubic never has three real roots"
        )
    lo, hi = 1e-8, 1.0
    while discriminant(hi) < 0.0 and hi < 1e8:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if discriminant(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * max(1.0, lo):
            break
    lam_c = lo
    lam_cap = 0.95 * lam_c

    def phi(lam: float) -> float:
        roots = admissible_roots(lam)
        if len(roots) < 2:
            raise InvalidParams(f"no admissible branches at lam={lam!r}")
        return roots[0] if branch == "lower" else roots[-1]

    def phi_deriv(lam: float, ph: float) -> float:
        p = C2 * C2 - C1 / lam
        return (2.0 * g * C3 - C1 * ph) / (lam * lam * (3.0 * ph * ph + p))

    def value_fn(t, r, theta):
        w = 1.0 - math.cos(f * t)
        lam = w / (r * r)
        ph = phi(lam)
        U = ph / r + (f * r / 2.0) * math.sin(f * t) / w
        V = C2 / r - f * r / 2.0
        return U, V, C3 / (lam * ph) / (r * r)

    def jet_fn(t, r, theta):
        w = 1.0 - math.cos(f * t)
        s = math.sin(f * t)
        lam = w / (r * r)
        lam_t = f * s / (r * r)
        lam_r = -2.0 * lam / r
        cot = s / w
        cot_dot = -(f / 2.0) * (1.0 + cot * cot)
        ph = phi(lam)
        phd = phi_deriv(lam, ph)
        e = C3 / (lam * ph)
        ed = -C3 * (ph + lam * phd) / (lam * ph) ** 2
        U = ph / r + (f * r / 2.0) * cot
        vals = np.array([U, C2 / r - f * r / 2.0, e / (r * r)])
        grad = np.array(
            [
                [
                    phd * lam_t / r + (f * r / 2.0) * cot_dot,
                    phd * lam_r / r - ph / (r * r) + (f / 2.0) * cot,
                    0.0,
                ],
                [0.0, -C2 / (r * r) - f / 2.0, 0.0],
                [ed * lam_t / (r * r), ed * lam_r / (r * r) - 2.0 * e / r ** 3, 0.0],
            ]
        )
        return vals, grad

    def r_lo(t: float) -> float:
        w = 1.0 - math.cos(f * t)
        return math.sqrt(w / lam_cap)

    period = params.period
    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(t_lo=0.0, t_hi=period, t_guard=1e-9 * period, r_lo=r_lo),
        label=f"collapse-contact-cubic(C=({C1:g},{C2:g},{C3:g}), {branch})",
        meta={
            "family": "collapse-contact-cubic",
            "C": (C1, C2, C3),
            "branch": branch,
            "lam_c": lam_c,
            "phi_fn": phi,
            "sample_box": {"t": (0.1 * period, 0.9 * period), "lam": (0.05 * lam_c, lam_cap)},
        },
    )


def collapse_scaling(
    phi0: float, eta0: float, params: FlowParameters, tabulation: ImplicitCollapse | None = None
) -> FlowField:
    """Self-similar spreading/collapse regime.

    U = r phi(t), V = -f r / 2, h = r^2 eta(t), with (phi, eta) from the
    implicit tabulation.  For phi0 > 0 the ring first spreads until the
    turning time, then collapses; eta grows without bound as t approaches
    the finite blow-up time T*.  Time derivatives come from the reduced
    ODEs themselves, so the jets are analytic given the tabulated values.
    """
    ic = tabulation if tabulation is not None else collapse2_build(phi0, eta0, params)
    f, g = params.f, params.g
    t_hi = min(0.93 * ic.Tstar, ic.t_cap * 0.999)

    def value_fn(t, r, theta):
        ph, e = ic.state_of_t(t)
        return r * ph, -f * r / 2.0, r * r * e

    def jet_fn(t, r, theta):
        ph, e = ic.state_of_t(t)
        phi_dot = -f * f / 4.0 - ph * ph - 2.0 * g * e
        eta_dot = -4.0 * ph * e
        vals = np.array([r * ph, -f * r / 2.0, r * r * e])
        grad = np.array(
            [
                [r * phi_dot, ph, 0.0],
                [0.0, -f / 2.0, 0.0],
                [r * r * eta_dot, 2.0 * r * e, 0.0],
            ]
        )
        return vals, grad

    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=jet_fn,
        window=Window(t_lo=-1e-12, t_hi=t_hi),
        label=f"collapse-scaling(phi0={phi0:g}, eta0={eta0:g})",
        meta={
            "family": "collapse-scaling",
            "phi0": phi0,
            "eta0": eta0,
            "tabulation": ic,
            "sample_box": {"t": (0.0, 0.9 * ic.Tstar), "r": (0.05, 2.0)},
        },
    )


# ---------------------------------------------------------------------------
# Dispatcher and catalog
# ---------------------------------------------------------------------------


def make_family(name: str, params: FlowParameters, **kw) -> FlowField:
    """Build a family by (kebab-case) name with keyword parameters."""
    key = canonical_family_name(name)
    if key == "rest":
        return rest_state(kw.pop("h0", 1.0), params, frame=kw.pop("frame", "polar"))
    if key == "constant-sw-image":
        return constant_sw_image(
            kw.pop("u0", 1.0), kw.pop("v0", 0.5), kw.pop("h0", 1.0), params
        )
    if key == "barochronous-sw":
        return barochronous_sw(kw.pop("h0", 1.0), params)
    if key == "stationary-rotsym":
        profile = kw.pop("profile", None) or profile_gauss(0.5)
        if isinstance(profile, str):
            profile = parse_profile(profile)
        return stationary_rotsym(profile, kw.pop("h0", 1.0), params)
    if key == "pulsating-cylinder":
        return pulsating_cylinder(kw.pop("alpha", 2.0), kw.pop("h0", 1.0), params)
    if key == "pulsating-drop":
        return pulsating_drop(kw.pop("alpha", 2.0), params)
    if key == "stationary-ring":
        return stationary_ring(
            kw.pop("c1", 1.0), kw.pop("c2", 1.0), kw.pop("c3", 1.0),
            params, branch=kw.pop("branch", "lower"),
        )
    if key == "collapse-contact":
        psi = kw.pop("psi", None) or swirl_sine(1.0)
        if isinstance(psi, str):
            psi = parse_swirl(psi)
        return collapse_contact(psi, kw.pop("lam0", 1.0), kw.pop("eta0", 1.0), params)
    if key == "collapse-contact-cubic":
        return collapse_contact_cubic(
            kw.pop("c1", 1.0), kw.pop("c2", 1.0), kw.pop("c3", 1.0),
            params, branch=kw.pop("branch", "lower"),
        )
    if key == "collapse-scaling":
        return collapse_scaling(kw.pop("phi0", 0.0), kw.pop("eta0", 1.0), params)
    raise UnsupportedFamily(name)


def default_catalog() -> dict[str, FlowField]:
    """One field per family at its default parameters.

    The pulsating families use alpha = 2 with f = g = 1; the stationary
    ring uses unit constants with f = 0.1, g = 1; the collapse families use
    unit constants with f = g = 1.
    """
    p11 = FlowParameters(1.0, 1.0)
    ring_params = FlowParameters(0.1, 1.0)
    return {
        "rest": rest_state(1.0, p11),
        "constant-sw-image": constant_sw_image(1.0, 0.5, 1.0, p11),
        "barochronous-sw": barochronous_sw(1.0, p11),
        "stationary-rotsym": stationary_rotsym(profile_gauss(0.5), 1.0, p11),
        "pulsating-cylinder": pulsating_cylinder(2.0, 1.0, p11),
        "pulsating-drop": pulsating_drop(2.0, p11),
        "stationary-ring": stationary_ring(1.0, 1.0, 1.0, ring_params),
        "collapse-contact": collapse_contact(swirl_sine(1.0), 1.0, 1.0, p11),
        "collapse-contact-cubic": collapse_contact_cubic(1.0, 1.0, 1.0, p11),
        "collapse-scaling": collapse_scaling(0.0, 1.0, p11),
    }


# ---------------------------------------------------------------------------
# Trajectory formulas and closure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryFormula:
    """Closed-form particle path of a transported or image solution."""

    r_of_t: Callable[[float], float]
    theta_of_t: Callable[[float], float]
    x_of_t: Callable[[float], float]
    y_of_t: Callable[[float], float]
    circle: tuple[float, float, float] | None
    swirl_rate: float | None
    anchor_time: float
    label: str


def _pulsation_angle(t: float, alpha: float, f: float) -> float:
    """Continuous closed form of atan(alpha tan(ft/2)) - atan(tan(ft/2))."""
    s = math.sin(f * t)
    c = math.cos(f * t)
    return math.atan2((alpha - 1.0) * s, (1.0 + alpha) - (alpha - 1.0) * c)


def trajectory_formula(
    field_: FlowField, r0: float, theta0: float
) -> TrajectoryFormula:
    """Closed-form trajectory through (r0, theta0).

    Supported: the pulsating cylinder and drop, any transported stationary
    rotationally symmetric solution, and the constant-stream image (whose
    anchor time is the window midpoint, where the map degenerates to a
    quarter turn).  Raises :class:`UnsupportedFamily` otherwise.
    """
    meta = field_.meta
    family = meta.get("family")
    f = field_.params.f
    if family in ("pulsating-cylinder", "pulsating-drop") or meta.get("kind") == "transported":
        alpha = meta["alpha"]
        profile = meta.get("profile")
        if profile is None:
            raise UnsupportedFamily(
                "transported field lacks a swirl profile; cannot form trajectories"
            )
        if r0 < 0.0:
            raise InvalidParams("r0 must be nonnegative")
        sa = math.sqrt(alpha)
        C = profile(r0 * sa) / (r0 * sa) if r0 > 0.0 else 0.0

        def r_of_t(t):
            _, _, D, _ = _pulsation_scalars(t, alpha, f)
            return r0 * math.sqrt(D)

        def theta_of_t(t):
            return theta0 + _pulsation_angle(t, alpha, f) + C * y9_time_map(t, alpha, f)

        circle = None
        if family == "pulsating-cylinder":
            circle = (
                0.5 * (alpha + 1.0) * r0 * math.cos(theta0),
                0.5 * (alpha + 1.0) * r0 * math.sin(theta0),
                0.5 * (alpha - 1.0) * r0,
            )

        def x_of_t(t):
            return r_of_t(t) * math.cos(theta_of_t(t))

        def y_of_t(t):
            return r_of_t(t) * math.sin(theta_of_t(t))

        return TrajectoryFormula(
            r_of_t, theta_of_t, x_of_t, y_of_t, circle, C, 0.0, f"path({field_.label})"
        )

    if family == "constant-sw-image":
        u0, v0 = meta["u0"], meta["v0"]
        t_ref = math.pi / f
        x0, y0 = r0 * math.cos(theta0), r0 * math.sin(theta0)

        def tp(t):
            return -1.0 / (f * math.tan(f * t / 2.0))

        def x_of_t(t):
            q = tp(t)
            W = 1.0 + f * f * q * q
            return (f * q * y0 + 2.0 * f * u0 * q * q + x0 - 2.0 * v0 * q) / W

        def y_of_t(t):
            q = tp(t)
            W = 1.0 + f * f * q * q
            return (y0 + 2.0 * u0 * q - f * q * x0 + 2.0 * f * v0 * q * q) / W

        A = x0 / 2.0 + u0 / f
        B = y0 / 2.0 + v0 / f
        R = math.hypot(u0 / f - x0 / 2.0, v0 / f - y0 / 2.0)

        def r_of_t(t):
            return math.hypot(x_of_t(t), y_of_t(t))

        def theta_of_t(t):
            return math.atan2(y_of_t(t), x_of_t(t))

        return TrajectoryFormula(
            r_of_t, theta_of_t, x_of_t, y_of_t, (A, B, R), None, t_ref,
            f"path({field_.label})",
        )

    raise UnsupportedFamily(
        f"no closed-form trajectories for family {family!r}"
    )


@dataclass(frozen=True)
class ClosureResult:
    """Whether a drop particle path closes, and after how many periods."""

    closed: bool
    m: int | None
    M: int | None
    winding_ratio: float


def closure_condition(
    alpha: float,
    r0: float,
    params: FlowParameters,
    tol: float = 1e-9,
    max_period: int = 1000,
) -> ClosureResult:
    """Classify a drop particle path as closed or quasi-closed.

    Per inertial period the path angle advances by 2 pi C / f with
    C = l r0 sqrt(alpha); the path closes after M periods when the winding
    ratio |C|/f equals m/M in lowest terms.  Particles on the boundary
    circle have ratio one and close every period; interior ratios are
    generically irrational and the path only quasi-closes.
    """
    if not (alpha > 0.0 and r0 > 0.0):
        raise InvalidParams("alpha and r0 must be positive")
    l = drop_swirl_coefficient(alpha, params)
    boundary = -params.f / (l * math.sqrt(alpha))
    if r0 > boundary * (1.0 + 1e-12):
        raise InvalidParams(
            f"r0={r0!r} outside the drop (boundary radius {boundary!r})"
        )
    ratio = abs(l) * r0 * math.sqrt(alpha) / params.f
    for M in range(1, max_period + 1):
        m = round(ratio * M)
        if m >= 1 and abs(ratio - m / M) <= tol:
            frac = Fraction(m, M)
            return ClosureResult(True, frac.numerator, frac.denominator, ratio)
    return ClosureResult(False, None, None, ratio)
