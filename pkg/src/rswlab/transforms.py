"""Point transformations connecting solutions.

Three pieces of machinery live here:

* the equivalence transformation, an explicit change of variables mapping
  any solution of the rotating system to a solution of the non-rotating
  one and back (the rotating-frame solution lives on one inertial period
  ``0 < t < 2*pi/f``);
* finite transformations of the three non-obvious canonical generators,
  obtained by integrating their flow equations in polar variables, with
  the piecewise-constant time offsets that keep the maps continuous across
  the half-period times ``t = (2n+1)*pi/f``;
* the solution-transport operator built from the dilation-like flow: given
  any polar solution and a positive parameter ``alpha`` it produces another
  exact solution, which is how the time-periodic pulsating solutions are
  generated from stationary ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import (
    CartesianPoint,
    CartesianState,
    FlowField,
    FlowParameters,
    PolarPoint,
    PolarState,
    Window,
)
from .errors import InvalidParams, SingularTime

Direction = Literal["rsw2sw", "sw2rsw"]

#: |cos(f t / 2)| below this triggers the exact half-period formulas in the
#: group actions (tan overflows); |sin(f t / 2)| below it marks the singular
#: times of the equivalence map.
SINGULAR_GUARD = 1e-9


def chi(t: float, f: float) -> float:
    """Piecewise-constant offset 2*pi*k/f for t in ((2k-1)pi/f, (2k+1)pi/f)."""
    k = math.floor(f * t / (2.0 * math.pi) + 0.5)
    return 2.0 * math.pi * k / f


def chi_shifted(t: float, f: float) -> float:
    """Offset (2k+1)*pi/f for t in (2k pi/f, 2(k+1) pi/f)."""
    k = math.floor(f * t / (2.0 * math.pi))
    return (2.0 * k + 1.0) * math.pi / f


# ---------------------------------------------------------------------------
# Equivalence transformation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceMap:
    """Change of variables between the rotating and non-rotating systems.

    In the ``rsw2sw`` direction the map is defined for times with
    sin(f t / 2) != 0; the ``sw2rsw`` direction is its closed-form inverse
    and always lands in the principal period (0, 2*pi/f).
    """

    params: FlowParameters
    direction: Direction = "rsw2sw"

    def inverse(self) -> "EquivalenceMap":
        other = "sw2rsw" if self.direction == "rsw2sw" else "rsw2sw"
        return EquivalenceMap(self.params, other)


def _forward_arrays(arr: np.ndarray, f: float) -> np.ndarray:
    """Rotating -> non-rotating map on the six jet coordinates."""
    t, x, y, u, v, h = arr
    half = f * t / 2.0
    s2 = math.sin(half)
    if abs(s2) < SINGULAR_GUARD:
        raise SingularTime(
            f"equivalence map singular at t={t!r} (sin(f t/2)={s2!r})"
        )
    c = math.cos(half) / s2
    s = math.sin(f * t)
    w = 1.0 - math.cos(f * t)
    return np.array(
        [
            -c / f,
            -(x * c - y) / 2.0,
            -(x + y * c) / 2.0,
            -(u * s - v * w - f * x) / 2.0,
            -(u * w + v * s - f * y) / 2.0,
            h * w / 2.0,
        ]
    )


def _inverse_arrays(arr: np.ndarray, f: float) -> np.ndarray:
    """Non-rotating -> rotating map; lands in the principal period."""
    tp, xp, yp, up, vp, hp = arr
    t = (2.0 / f) * (math.pi / 2.0 + math.atan(f * tp))
    c = -f * tp
    one_c2 = 1.0 + c * c
    x = -2.0 * (c * xp + yp) / one_c2
    y = 2.0 * (xp - c * yp) / one_c2
    u = (f * x / 2.0 - up) * c + f * y / 2.0 - vp
    v = -f * x / 2.0 + up + (f * y / 2.0 - vp) * c
    h = hp * one_c2
    return np.array([t, x, y, u, v, h])


def equiv_jet_array(arr: np.ndarray, params: FlowParameters, direction: Direction = "rsw2sw") -> np.ndarray:
    """The equivalence map as a map of raw 6-vectors (t, x, y, u, v, h)."""
    if direction == "rsw2sw":
        return _forward_arrays(np.asarray(arr, dtype=float), params.f)
    return _inverse_arrays(np.asarray(arr, dtype=float), params.f)


def equiv_point(
    m: EquivalenceMap, p: CartesianPoint, s: CartesianState
) -> tuple[CartesianPoint, CartesianState]:
    """Apply the equivalence transformation to one point/state pair."""
    arr = np.array([p.t, p.x, p.y, s.u, s.v, s.h])
    out = equiv_jet_array(arr, m.params, m.direction)
    return (
        CartesianPoint(float(out[0]), float(out[1]), float(out[2])),
        CartesianState(float(out[3]), float(out[4]), float(out[5])),
    )


def map_field_rsw_to_sw(field_: FlowField, params: FlowParameters | None = None) -> FlowField:
    """Non-rotating image of a rotating Cartesian-frame solution.

    The image field at (t', x', y') pulls the point back through the
    inverse map, evaluates the source, and pushes the state forward.  The
    source is restricted to its principal period; the image time window is
    the monotone image of that interval.
    """
    params = params or field_.params
    if field_.frame != "cartesian":
        raise InvalidParams("rsw2sw field map expects a cartesian-frame field")
    if field_.system != "rsw":
        raise InvalidParams("source field must solve the rotating system")
    f = params.f
    guard = 1e-7 * params.period
    t_lo = max(field_.window.t_lo + field_.window.t_guard, 0.0) + guard
    t_hi = min(field_.window.t_hi - field_.window.t_guard, params.period) - guard
    if not t_lo < t_hi:
        raise InvalidParams("source window does not intersect the principal period")

    def t_image(t: float) -> float:
        return -1.0 / (f * math.tan(f * t / 2.0))

    src = field_

    def value_fn(tp, xp, yp):
        t, x, y, _, _, _ = _inverse_arrays(np.array([tp, xp, yp, 0.0, 0.0, 0.0]), f)
        u, v, h = src.eval(t, x, y)
        out = _forward_arrays(np.array([t, x, y, u, v, h]), f)
        return out[3], out[4], out[5]

    window = Window(t_lo=t_image(t_lo), t_hi=t_image(t_hi))
    meta = dict(src.meta)
    meta.update(kind="equiv_image", direction="rsw2sw", source=src.label)
    return FlowField(
        frame="cartesian",
        params=params,
        value_fn=value_fn,
        jet_fn=None,
        window=window,
        system="sw",
        derivative_mode="fd",
        label=f"sw_image({src.label})",
        meta=meta,
    )


def map_field_sw_to_rsw(field_: FlowField, params: FlowParameters | None = None) -> FlowField:
    """Rotating image of a non-rotating Cartesian-frame solution.

    Defined on the principal period (0, 2*pi/f) minus a guard band.
    """
    params = params or field_.params
    if field_.frame != "cartesian":
        raise InvalidParams("sw2rsw field map expects a cartesian-frame field")
    if field_.system != "sw":
        raise InvalidParams("source field must solve the non-rotating system")
    f = params.f
    src = field_

    def value_fn(t, x, y):
        out = _forward_arrays(np.array([t, x, y, 0.0, 0.0, 0.0]), f)
        tp, xp, yp = out[0], out[1], out[2]
        up, vp, hp = src.eval(tp, xp, yp)
        back = _inverse_arrays(np.array([tp, xp, yp, up, vp, hp]), f)
        return back[3], back[4], back[5]

    window = Window(t_lo=0.0, t_hi=params.period, t_guard=1e-9 * params.period)
    meta = dict(src.meta)
    meta.update(kind="equiv_image", direction="sw2rsw", source=src.label)
    return FlowField(
        frame="cartesian",
        params=params,
        value_fn=value_fn,
        jet_fn=None,
        window=window,
        system="rsw",
        derivative_mode="fd",
        label=f"rsw_image({src.label})",
        meta=meta,
    )


# ---------------------------------------------------------------------------
# Finite transformations of the canonical generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupAction:
    """One-parameter group element for one of the three nontrivial flows.

    The dilation-like flow ("Y9") is parametrized by ``alpha > 0``; the two
    parabolic flows ("Y7", "Y8") by an arbitrary real ``a``.
    """

    generator: Literal["Y7", "Y8", "Y9"]
    parameter: float

    def __post_init__(self) -> None:
        if self.generator not in ("Y7", "Y8", "Y9"):
            raise InvalidParams(f"unsupported generator {self.generator!r}")
        if not math.isfinite(self.parameter):
            raise InvalidParams("group parameter must be finite")
        if self.generator == "Y9" and self.parameter <= 0.0:
            raise InvalidParams(
                f"dilation parameter alpha must be positive, got {self.parameter}"
            )


def _y9_map(t, r, theta, U, V, h, alpha, f):
    half = f * t / 2.0
    c2 = math.cos(half)
    if abs(c2) < SINGULAR_GUARD:
        sa = math.sqrt(alpha)
        return (
            t,
            r / sa,
            theta,
            U * sa,
            (V + (alpha - 1.0) / (2.0 * alpha) * f * r) * sa,
            alpha * h,
        )
    tau = math.sin(half) / c2
    q = 1.0 + alpha * alpha * tau * tau
    d = alpha * (1.0 + tau * tau)
    ratio = math.sqrt(q / d)
    tbar = (2.0 / f) * math.atan(alpha * tau) + chi(t, f)
    rbar = r / ratio
    thbar = theta + math.atan(tau) - math.atan(alpha * tau)
    shift_u = (f * r / 2.0) * (alpha * alpha - 1.0) * tau / q
    shift_v = (f * r / 2.0) * (alpha - 1.0) * (alpha * tau * tau - 1.0) / q
    return (
        tbar,
        rbar,
        thbar,
        (U - shift_u) * ratio,
        (V + shift_v) * ratio,
        h * q / d,
    )


def _parabolic_map(t, r, theta, U, V, h, a, f, sigma, offset):
    """Shared form of the two parabolic flows; sigma is tan- or -cot-based."""
    num = sigma * sigma + 1.0
    den = (sigma + a) * (sigma + a) + 1.0
    ratio = math.sqrt(den / num)
    tbar = (2.0 / f) * math.atan(sigma + a) + offset
    rbar = r / ratio
    thbar = theta + math.atan(sigma) - math.atan(sigma + a)
    shift_u = (f * r / 2.0) * (sigma * sigma + a * sigma - 1.0) * a / den
    shift_v = (f * r / 2.0) * (2.0 * sigma + a) * a / den
    return (
        tbar,
        rbar,
        thbar,
        (U + shift_u) * ratio,
        (V + shift_v) * ratio,
        h * den / num,
    )


def finite_transform(
    action: GroupAction, p: PolarPoint, s: PolarState, params: FlowParameters
) -> tuple[PolarPoint, PolarState]:
    """Apply a finite transformation to a polar point/state pair.

    At the times where the underlying tangent half-angle degenerates the
    continuous completion values are used, so the map is defined for all
    times in the generator's domain.
    """
    f = params.f
    t, r, theta = p.t, p.r, p.theta
    U, V, h = s.U, s.V, s.h
    half = f * t / 2.0
    if action.generator == "Y9":
        out = _y9_map(t, r, theta, U, V, h, action.parameter, f)
    elif action.generator == "Y8":
        c2 = math.cos(half)
        if abs(c2) < SINGULAR_GUARD:
            a = action.parameter
            out = (t, r, theta, U + f * r * a / 2.0, V, h)
        else:
            tau = math.sin(half) / c2
            out = _parabolic_map(t, r, theta, U, V, h, action.parameter, f, tau, chi(t, f))
    else:  # Y7
        s2 = math.sin(half)
        if abs(s2) < SINGULAR_GUARD:
            a = action.parameter
            out = (t, r, theta, U + f * r * a / 2.0, V, h)
        else:
            sigma = -math.cos(half) / s2
            out = _parabolic_map(
                t, r, theta, U, V, h, action.parameter, f, sigma, chi_shifted(t, f)
            )
    tb, rb, thb, Ub, Vb, hb = out
    return PolarPoint(tb, rb, thb), PolarState(Ub, Vb, hb)


# ---------------------------------------------------------------------------
# Solution transport
# ---------------------------------------------------------------------------


def y9_time_map(t: float, alpha: float, f: float) -> float:
    """Continuous dilated time: (2/f) atan(alpha tan(f t/2)) plus the branch
    offset, equal to t exactly at the half-period times."""
    half = f * t / 2.0
    c2 = math.cos(half)
    if abs(c2) < SINGULAR_GUARD:
        return t
    tau = math.sin(half) / c2
    return (2.0 / f) * math.atan(alpha * tau) + chi(t, f)


def transport_solution(
    field_: FlowField, alpha: float, params: FlowParameters | None = None
) -> FlowField:
    """New exact solution obtained by transporting a polar solution.

    For a source solution (U, V, h) the transported field reads the source
    at the dilated point (tbar, r*rho, theta + atan(tau) - atan(alpha tau))
    with rho^2 = alpha (1 + tau^2) / (1 + alpha^2 tau^2), scales the state
    by rho, and adds the rigid velocity shifts generated by the flow.
    Transporting the rest state produces the pulsating cylinder;
    transporting the stationary rotationally symmetric class produces the
    pulsating drop family.
    """
    params = params or field_.params
    if field_.frame != "polar":
        raise InvalidParams("solution transport expects a polar-frame field")
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise InvalidParams(f"transport parameter alpha must be positive, got {alpha}")
    f = params.f
    src = field_

    def value_fn(t, r, theta):
        half = f * t / 2.0
        c2 = math.cos(half)
        if abs(c2) < SINGULAR_GUARD:
            sa = math.sqrt(alpha)
            Ub, Vb, hb = src.values_unchecked(t, r / sa, theta)
            return (
                Ub / sa,
                Vb / sa - (f * r / 2.0) * (alpha - 1.0) / alpha,
                hb / alpha,
            )
        tau = math.sin(half) / c2
        q = 1.0 + alpha * alpha * tau * tau
        rho = math.sqrt(alpha * (1.0 + tau * tau) / q)
        tbar = (2.0 / f) * math.atan(alpha * tau) + chi(t, f)
        rbar = r * rho
        thbar = theta + math.atan(tau) - math.atan(alpha * tau)
        Ub, Vb, hb = src.values_unchecked(tbar, rbar, thbar)
        U = rho * Ub + (f * r / 2.0) * (alpha * alpha - 1.0) * tau / q
        V = rho * Vb - (f * r / 2.0) * (alpha - 1.0) * (alpha * tau * tau - 1.0) / q
        return U, V, hb * rho * rho

    def rho_of_t(t: float) -> float:
        half = f * t / 2.0
        c2 = math.cos(half)
        if abs(c2) < SINGULAR_GUARD:
            return 1.0 / math.sqrt(alpha)
        tau = math.sin(half) / c2
        return math.sqrt(alpha * (1.0 + tau * tau) / (1.0 + alpha * alpha * tau * tau))

    src_lo, src_hi = src.window.r_lo, src.window.r_hi

    # the source is read at the dilated point, so its radial bounds apply
    # to r * rho(t) at the mapped time
    def r_lo(t: float) -> float:
        tbar = y9_time_map(t, alpha, f)
        lo = src_lo(tbar) if callable(src_lo) else src_lo
        return lo / rho_of_t(t)

    def r_hi(t: float) -> float:
        tbar = y9_time_map(t, alpha, f)
        hi = src_hi(tbar) if callable(src_hi) else src_hi
        return hi / rho_of_t(t) if math.isfinite(hi) else math.inf

    # the transported time window is the preimage of the source window;
    # the time map is inverted by the dilation with 1/alpha
    def t_preimage(bound: float) -> float:
        return y9_time_map(bound, 1.0 / alpha, f) if math.isfinite(bound) else bound

    window = Window(
        t_lo=t_preimage(src.window.t_lo),
        t_hi=t_preimage(src.window.t_hi),
        t_guard=src.window.t_guard,
        r_lo=r_lo if callable(src_lo) or src_lo else 0.0,
        r_hi=r_hi if callable(src_hi) or math.isfinite(src_hi) else math.inf,
    )
    meta = dict(src.meta)
    meta.update(kind="transported", alpha=alpha, source=src.label)
    return FlowField(
        frame="polar",
        params=params,
        value_fn=value_fn,
        jet_fn=None,
        window=window,
        system="rsw",
        derivative_mode="fd",
        label=f"transport({src.label}, alpha={alpha:g})",
        meta=meta,
    )
