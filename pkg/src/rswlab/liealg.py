"""Symmetry algebra of the rotating shallow water system.

Three generator bases act on the six-dimensional jet space with coordinates
``(t, x, y, u, v, h)``:

* ``X`` -- the natural basis of the rotating-frame algebra: translations,
  two time-helical translations, rotation, scaling, and two trigonometric
  fields mixing time with space.
* ``Y`` -- the canonical basis, fixed linear combinations of the ``X``
  generators chosen so that the Levi decomposition is visible directly in
  the commutator table (abelian nilradical spanned by the first four,
  an sl(2) spanned by the last three).
* ``Z`` -- the classical basis admitted by the non-rotating system:
  translations, Galilean boosts, rotation, scaling, time translation,
  projective transformation, and dilation.

Commutators use hand-coded analytic derivatives of the coefficient
functions; every coefficient is a polynomial in ``(x, y, u, v, h)`` times a
trigonometric function of ``f t``, so the bracket values are exact up to
rounding.  Structure constants are recovered by least squares over generic
sample points and snapped to exact values, which makes the comparison with
the canonical table sharp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence

import numpy as np

from .core import FlowParameters
from .errors import FitDegenerate, InvalidParams, SingularTime

Family = Literal["X", "Y", "Z"]

_VARS = ("t", "x", "y", "u", "v", "h")


@dataclass(frozen=True)
class JetPoint:
    """A base + fiber point of the symmetry vector fields."""

    t: float
    x: float
    y: float
    u: float
    v: float
    h: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.u, self.v, self.h])

    @staticmethod
    def from_array(arr: Sequence[float]) -> "JetPoint":
        return JetPoint(*(float(c) for c in arr))


@dataclass(frozen=True)
class GeneratorId:
    family: Family
    index: int

    def __post_init__(self) -> None:
        if self.family not in ("X", "Y", "Z"):
            raise InvalidParams(f"unknown generator family {self.family!r}")
        if not 1 <= self.index <= 9:
            raise InvalidParams(f"generator index must be 1..9, got {self.index}")

    def __str__(self) -> str:
        return f"{self.family}{self.index}"


# ---------------------------------------------------------------------------
# Coefficient functions and their jacobians
# ---------------------------------------------------------------------------


def _x_coeffs(k: int, p: np.ndarray, f: float) -> np.ndarray:
    t, x, y, u, v, h = p
    c, s = math.cos(f * t), math.sin(f * t)
    if k == 1:
        return np.array([0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    if k == 2:
        return np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    if k == 3:
        return np.array([0.0, c, -s, -f * s, -f * c, 0.0])
    if k == 4:
        return np.array([0.0, s, c, f * c, -f * s, 0.0])
    if k == 5:
        return np.array([0.0, -y, x, -v, u, 0.0])
    if k == 6:
        return np.array([0.0, x, y, u, v, 2.0 * h])
    if k == 7:
        return np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    if k == 8:
        return np.array(
            [
                c,
                -(f / 2) * (x * s - y * c),
                -(f / 2) * (x * c + y * s),
                (f / 2) * ((u - f * y) * s + (v - f * x) * c),
                -(f / 2) * ((u + f * y) * c - (v + f * x) * s),
                f * h * s,
            ]
        )
    if k == 9:
        return np.array(
            [
                s,
                (f / 2) * (x * c + y * s),
                -(f / 2) * (x * s - y * c),
                -(f / 2) * ((u - f * y) * c - (v - f * x) * s),
                -(f / 2) * ((u + f * y) * s + (v + f * x) * c),
                -f * h * c,
            ]
        )
    raise InvalidParams(f"X index out of range: {k}")


def _x_jac(k: int, p: np.ndarray, f: float) -> np.ndarray:
    """J[i, j] = d coeff_i / d var_j for the X generators."""
    t, x, y, u, v, h = p
    c, s = math.cos(f * t), math.sin(f * t)
    J = np.zeros((6, 6))
    if k in (1, 2, 7):
        return J
    if k == 3:
        J[1, 0] = -f * s
        J[2, 0] = -f * c
        J[3, 0] = -f * f * c
        J[4, 0] = f * f * s
        return J
    if k == 4:
        J[1, 0] = f * c
        J[2, 0] = -f * s
        J[3, 0] = -f * f * s
        J[4, 0] = -f * f * c
        return J
    if k == 5:
        J[1, 2] = -1.0
        J[2, 1] = 1.0
        J[3, 4] = -1.0
        J[4, 3] = 1.0
        return J
    if k == 6:
        J[1, 1] = 1.0
        J[2, 2] = 1.0
        J[3, 3] = 1.0
        J[4, 4] = 1.0
        J[5, 5] = 2.0
        return J
    if k == 8:
        J[0, 0] = -f * s
        J[1, 0] = -(f * f / 2) * (x * c + y * s)
        J[1, 1] = -(f / 2) * s
        J[1, 2] = (f / 2) * c
        J[2, 0] = (f * f / 2) * (x * s - y * c)
        J[2, 1] = -(f / 2) * c
        J[2, 2] = -(f / 2) * s
        J[3, 0] = (f * f / 2) * ((u - f * y) * c - (v - f * x) * s)
        J[3, 1] = -(f * f / 2) * c
        J[3, 2] = -(f * f / 2) * s
        J[3, 3] = (f / 2) * s
        J[3, 4] = (f / 2) * c
        J[4, 0] = (f * f / 2) * ((u + f * y) * s + (v + f * x) * c)
        J[4, 1] = (f * f / 2) * s
        J[4, 2] = -(f * f / 2) * c
        J[4, 3] = -(f / 2) * c
        J[4, 4] = (f / 2) * s
        J[5, 0] = f * f * h * c
        J[5, 5] = f * s
        return J
    if k == 9:
        J[0, 0] = f * c
        J[1, 0] = (f * f / 2) * (-x * s + y * c)
        J[1, 1] = (f / 2) * c
        J[1, 2] = (f / 2) * s
        J[2, 0] = -(f * f / 2) * (x * c + y * s)
        J[2, 1] = -(f / 2) * s
        J[2, 2] = (f / 2) * c
        J[3, 0] = (f * f / 2) * ((u - f * y) * s + (v - f * x) * c)
        J[3, 1] = -(f * f / 2) * s
        J[3, 2] = (f * f / 2) * c
        J[3, 3] = -(f / 2) * c
        J[3, 4] = (f / 2) * s
        J[4, 0] = -(f * f / 2) * ((u + f * y) * c - (v + f * x) * s)
        J[4, 1] = -(f * f / 2) * c
        J[4, 2] = -(f * f / 2) * s
        J[4, 3] = -(f / 2) * s
        J[4, 4] = -(f / 2) * c
        J[5, 0] = f * f * h * s
        J[5, 5] = -f * c
        return J
    raise InvalidParams(f"X index out of range: {k}")


def _z_coeffs(k: int, p: np.ndarray, f: float) -> np.ndarray:
    t, x, y, u, v, h = p
    if k == 1:
        return np.array([0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    if k == 2:
        return np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    if k == 3:
        return np.array([0.0, t, 0.0, 1.0, 0.0, 0.0])
    if k == 4:
        return np.array([0.0, 0.0, t, 0.0, 1.0, 0.0])
    if k == 5:
        return np.array([0.0, -y, x, -v, u, 0.0])
    if k == 6:
        return np.array([0.0, x, y, u, v, 2.0 * h])
    if k == 7:
        return np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    if k == 8:
        return np.array(
            [t * t, t * x, t * y, x - t * u, y - t * v, -2.0 * t * h]
        )
    if k == 9:
        return np.array([2.0 * t, x, y, -u, -v, -2.0 * h])
    raise InvalidParams(f"Z index out of range: {k}")


def _z_jac(k: int, p: np.ndarray, f: float) -> np.ndarray:
    t, x, y, u, v, h = p
    J = np.zeros((6, 6))
    if k in (1, 2, 7):
        return J
    if k == 3:
        J[1, 0] = 1.0
        return J
    if k == 4:
        J[2, 0] = 1.0
        return J
    if k == 5:
        return _x_jac(5, p, f)
    if k == 6:
        return _x_jac(6, p, f)
    if k == 8:
        J[0, 0] = 2.0 * t
        J[1, 0] = x
        J[1, 1] = t
        J[2, 0] = y
        J[2, 2] = t
        J[3, 0] = -u
        J[3, 1] = 1.0
        J[3, 3] = -t
        J[4, 0] = -v
        J[4, 2] = 1.0
        J[4, 4] = -t
        J[5, 0] = -2.0 * h
        J[5, 5] = -2.0 * t
        return J
    if k == 9:
        J[0, 0] = 2.0
        J[1, 1] = 1.0
        J[2, 2] = 1.0
        J[3, 3] = -1.0
        J[4, 4] = -1.0
        J[5, 5] = -2.0
        return J
    raise InvalidParams(f"Z index out of range: {k}")


def _y_combo(f: float) -> np.ndarray:
    """Rows: canonical generators as linear combinations of X1..X9."""
    M = np.zeros((9, 9))
    M[0, 1] = 1.0
    M[0, 3] = -1.0  # Y1 = X2 - X4
    M[1, 2] = 1.0
    M[1, 0] = -1.0  # Y2 = X3 - X1
    M[2, 0] = 1.0
    M[2, 2] = 1.0   # Y3 = X1 + X3
    M[3, 1] = 1.0
    M[3, 3] = 1.0   # Y4 = X2 + X4
    M[4, 4] = 1.0   # Y5 = X5
    M[5, 5] = 1.0   # Y6 = X6
    M[6, 6] = 1.0 / f
    M[6, 4] = -0.5
    M[6, 7] = -1.0 / f  # Y7 = (X7 - f/2 X5 - X8) / f
    M[7, 6] = 1.0 / f
    M[7, 4] = -0.5
    M[7, 7] = 1.0 / f   # Y8 = (X7 - f/2 X5 + X8) / f
    M[8, 8] = -2.0 / f  # Y9 = -(2/f) X9
    return M


def generator_eval(gid: GeneratorId, p: JetPoint, params: FlowParameters) -> np.ndarray:
    """Coefficient 6-vector of a generator at a jet point."""
    arr = p.as_array()
    f = params.f
    if gid.family == "X":
        return _x_coeffs(gid.index, arr, f)
    if gid.family == "Z":
        return _z_coeffs(gid.index, arr, f)
    combo = _y_combo(f)[gid.index - 1]
    out = np.zeros(6)
    for j, w in enumerate(combo):
        if w != 0.0:
            out += w * _x_coeffs(j + 1, arr, f)
    return out


def generator_jacobian(
    gid: GeneratorId, p: JetPoint, params: FlowParameters
) -> np.ndarray:
    """Jacobian of the coefficient functions with respect to (t,x,y,u,v,h)."""
    arr = p.as_array()
    f = params.f
    if gid.family == "X":
        return _x_jac(gid.index, arr, f)
    if gid.family == "Z":
        return _z_jac(gid.index, arr, f)
    combo = _y_combo(f)[gid.index - 1]
    out = np.zeros((6, 6))
    for j, w in enumerate(combo):
        if w != 0.0:
            out += w * _x_jac(j + 1, arr, f)
    return out


CoeffFn = Callable[[np.ndarray], np.ndarray]
JacFn = Callable[[np.ndarray], np.ndarray]


def _field_closures(gid: GeneratorId, params: FlowParameters) -> tuple[CoeffFn, JacFn]:
    def coeff(arr: np.ndarray) -> np.ndarray:
        return generator_eval(gid, JetPoint.from_array(arr), params)

    def jac(arr: np.ndarray) -> np.ndarray:
        return generator_jacobian(gid, JetPoint.from_array(arr), params)

    return coeff, jac


def bracket_values(
    a_coeff: CoeffFn, a_jac: JacFn, b_coeff: CoeffFn, b_jac: JacFn, arr: np.ndarray
) -> np.ndarray:
    """[A, B] = A(B) - B(A) evaluated at a point from coefficient closures."""
    return b_jac(arr) @ a_coeff(arr) - a_jac(arr) @ b_coeff(arr)


def lie_bracket(
    a: GeneratorId, b: GeneratorId, p: JetPoint, params: FlowParameters
) -> np.ndarray:
    """Commutator of two generators of the same family at a jet point."""
    if a.family != b.family:
        raise InvalidParams("bracket requires generators from the same family")
    ac, aj = _field_closures(a, params)
    bc, bj = _field_closures(b, params)
    return bracket_values(ac, aj, bc, bj, p.as_array())


# ---------------------------------------------------------------------------
# Structure constants
# ---------------------------------------------------------------------------

#: Canonical commutator table in the Y basis (identical in the Z basis).
#: Upper-triangle entries only: (i, j) -> ((k, coefficient), ...) meaning
#: [G_i, G_j] = sum coeff * G_k; all other brackets vanish.
CANONICAL_TABLE: dict[tuple[int, int], tuple[tuple[int, float], ...]] = {
    (1, 5): ((2, 1.0),),
    (1, 6): ((1, 1.0),),
    (1, 8): ((3, 1.0),),
    (1, 9): ((1, 1.0),),
    (2, 5): ((1, -1.0),),
    (2, 6): ((2, 1.0),),
    (2, 8): ((4, 1.0),),
    (2, 9): ((2, 1.0),),
    (3, 5): ((4, 1.0),),
    (3, 6): ((3, 1.0),),
    (3, 7): ((1, -1.0),),
    (3, 9): ((3, -1.0),),
    (4, 5): ((3, -1.0),),
    (4, 6): ((4, 1.0),),
    (4, 7): ((2, -1.0),),
    (4, 9): ((4, -1.0),),
    (7, 8): ((9, 1.0),),
    (7, 9): ((7, 2.0),),
    (8, 9): ((8, -2.0),),
}


def canonical_structure_array() -> np.ndarray:
    """The canonical table as a dense antisymmetric (9, 9, 9) array."""
    c = np.zeros((9, 9, 9))
    for (i, j), terms in CANONICAL_TABLE.items():
        for k, w in terms:
            c[i - 1, j - 1, k - 1] = w
            c[j - 1, i - 1, k - 1] = -w
    return c


@dataclass(frozen=True)
class StructureTable:
    """Structure constants c[i, j, k] with [G_i, G_j] = sum_k c[i,j,k] G_k."""

    family: Family
    coeffs: np.ndarray
    fit_residual: float

    def max_antisymmetry_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs + np.transpose(self.coeffs, (1, 0, 2)))))

    def max_jacobi_defect(self) -> float:
        """Worst violation of the Jacobi identity at the level of constants."""
        c = self.coeffs
        # sum_m c[i,j,m] c[m,k,l] + cyclic permutations of (i, j, k)
        term = np.einsum("ijm,mkl->ijkl", c, c)
        total = term + np.transpose(term, (1, 2, 0, 3)) + np.transpose(term, (2, 0, 1, 3))
        return float(np.max(np.abs(total)))

    def matches_canonical(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.coeffs - canonical_structure_array())) <= tol)


def _snap(value: float, tol: float = 1e-9) -> float:
    """Snap to the nearest half-integer when within ``tol`` of it."""
    nearest = round(2.0 * value) / 2.0
    return nearest if abs(value - nearest) <= tol else value


def sample_jet_points(
    params: FlowParameters, n: int, seed: int = 0
) -> list[JetPoint]:
    """Generic sample points: coordinates uniform in [-2, 2], t away from
    the half-period endpoints where the trigonometric frame degenerates."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.1, math.pi / params.f - 0.1, size=n)
    rest = rng.uniform(-2.0, 2.0, size=(n, 5))
    return [JetPoint(t[i], *rest[i]) for i in range(n)]


def structure_constants(
    family: Family,
    params: FlowParameters,
    n_points: int = 12,
    seed: int = 0,
    points: Sequence[JetPoint] | None = None,
    snap_tol: float = 1e-9,
    max_retries: int = 5,
) -> StructureTable:
    """Fit every commutator onto the nine-generator frame by least squares.

    Generic points make the frame pointwise independent; a rank-deficient
    sample is retried with fresh points and ultimately raises
    :class:`FitDegenerate`.  Fitted coefficients within ``snap_tol`` of a
    half-integer are snapped, giving exact table entries.
    """
    if family == "X":
        raise InvalidParams("structure constants are tabulated for Y and Z bases")
    attempt = 0
    while True:
        pts = list(points) if points is not None else sample_jet_points(
            params, n_points, seed + attempt
        )
        arrs = [p.as_array() for p in pts]
        gens = [_field_closures(GeneratorId(family, k), params) for k in range(1, 10)]
        basis = np.zeros((6 * len(pts), 9))
        for k, (coeff, _) in enumerate(gens):
            basis[:, k] = np.concatenate([coeff(a) for a in arrs])
        if np.linalg.matrix_rank(basis) < 9:
            attempt += 1
            if points is not None or attempt > max_retries:
                raise FitDegenerate(
                    f"sample matrix rank deficient after {attempt} attempt(s)"
                )
            continue
        coeffs = np.zeros((9, 9, 9))
        worst = 0.0
        for i in range(9):
            for j in range(i + 1, 9):
                rhs = np.concatenate(
                    [
                        bracket_values(gens[i][0], gens[i][1], gens[j][0], gens[j][1], a)
                        for a in arrs
                    ]
                )
                sol, _, _, _ = np.linalg.lstsq(basis, rhs, rcond=None)
                worst = max(worst, float(np.max(np.abs(basis @ sol - rhs))))
                snapped = np.array([_snap(c, snap_tol) for c in sol])
                coeffs[i, j] = snapped
                coeffs[j, i] = -snapped
        return StructureTable(family=family, coeffs=coeffs, fit_residual=worst)


@dataclass(frozen=True)
class IsomorphismReport:
    """Outcome of comparing the Y- and Z-basis structure tables."""

    ok: bool
    max_difference: float
    mismatches: tuple[tuple[int, int, int, float, float], ...]
    nilradical_abelian: bool
    sl2_closed: bool
    y_matches_canonical: bool
    z_matches_canonical: bool


def verify_isomorphism(
    params: FlowParameters,
    n_points: int = 12,
    seed: int = 0,
    tol: float = 1e-9,
    _y_table: StructureTable | None = None,
) -> IsomorphismReport:
    """Check that both bases share one structure table with the expected shape.

    Besides elementwise equality this asserts the structural claims: the
    first four canonical generators commute pairwise (abelian nilradical)
    and the last three close among themselves (an sl(2) subalgebra).
    """
    ty = _y_table if _y_table is not None else structure_constants(
        "Y", params, n_points, seed
    )
    tz = structure_constants("Z", params, n_points, seed + 1)
    diff = np.abs(ty.coeffs - tz.coeffs)
    mismatches = tuple(
        (i + 1, j + 1, k + 1, float(ty.coeffs[i, j, k]), float(tz.coeffs[i, j, k]))
        for i, j, k in zip(*np.nonzero(diff > tol))
    )
    nil = bool(np.max(np.abs(ty.coeffs[0:4, 0:4, :])) <= tol)
    sl2 = bool(np.max(np.abs(ty.coeffs[6:9, 6:9, 0:6])) <= tol)
    return IsomorphismReport(
        ok=not mismatches,
        max_difference=float(diff.max()),
        mismatches=mismatches,
        nilradical_abelian=nil,
        sl2_closed=sl2,
        y_matches_canonical=ty.matches_canonical(tol),
        z_matches_canonical=tz.matches_canonical(tol),
    )


# ---------------------------------------------------------------------------
# Pushforward through the equivalence transformation
# ---------------------------------------------------------------------------

#: Multiplier m_k in  (pushforward of Y_k) = m_k * Z_k.
PUSHFORWARD_MULTIPLIER: dict[int, str] = {
    1: "one", 2: "one", 5: "one", 6: "one", 9: "one",
    3: "f", 4: "f", 8: "f",
    7: "inv_f",
}


def pushforward_multiplier(k: int, params: FlowParameters) -> float:
    kind = PUSHFORWARD_MULTIPLIER[k]
    if kind == "one":
        return 1.0
    if kind == "f":
        return params.f
    return 1.0 / params.f


@dataclass(frozen=True)
class PushforwardReport:
    index: int
    multiplier: float
    max_error: float
    ok: bool


def _jet_map_jacobian(func, arr: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a map of the six jet coordinates."""
    J = np.empty((6, 6))
    for j in range(6):
        delta = step * max(1.0, abs(arr[j]))
        hi = arr.copy()
        lo = arr.copy()
        hi[j] += delta
        lo[j] -= delta
        J[:, j] = (func(hi) - func(lo)) / (2.0 * delta)
    return J


def pushforward_check(
    k: int,
    params: FlowParameters,
    sample: Iterable[JetPoint] | None = None,
    n_points: int = 6,
    seed: int = 3,
    tol: float = 1e-6,
) -> PushforwardReport:
    """Push a canonical generator through the equivalence map numerically.

    The image must equal the stated multiple of the corresponding classical
    generator at the image point.  Sample points must stay away from the
    full-period times where the map is singular.
    """
    from .transforms import equiv_jet_array  # local import avoids a cycle

    f = params.f
    pts = list(sample) if sample is not None else sample_jet_points(params, n_points, seed)
    for p in pts:
        if abs(math.sin(f * p.t / 2.0)) < 1e-9:
            raise SingularTime(f"sample point at singular time t={p.t!r}")
    mult = pushforward_multiplier(k, params)
    yid = GeneratorId("Y", k)
    zid = GeneratorId("Z", k)
    worst = 0.0
    for p in pts:
        arr = p.as_array()
        J = _jet_map_jacobian(lambda a: equiv_jet_array(a, params), arr)
        pushed = J @ generator_eval(yid, p, params)
        image = JetPoint.from_array(equiv_jet_array(arr, params))
        expected = mult * generator_eval(zid, image, params)
        worst = max(worst, float(np.max(np.abs(pushed - expected))))
    return PushforwardReport(index=k, multiplier=mult, max_error=worst, ok=worst <= tol)
