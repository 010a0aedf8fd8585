import math

import numpy as np
import pytest

from rswlab.core import FlowParameters, PolarPoint, potential_vorticity
from rswlab.errors import InvalidParams, UnsupportedFamily, WindowViolation
from rswlab.solutions import (
    canonical_family_name,
    closure_condition,
    collapse_contact,
    collapse_contact_cubic,
    constant_sw_image,
    drop_base_depth,
    drop_swirl_coefficient,
    make_family,
    parse_profile,
    profile_solid,
    pulsating_cylinder,
    pulsating_drop,
    stationary_ring,
    swirl_constant,
    trajectory_formula,
)
from rswlab.verify import residual_report, sample_grid

P = FlowParameters(1.0, 1.0)
RING = FlowParameters(0.1, 1.0)


class TestFamilyNames:
    def test_aliases(self):
        assert canonical_family_name("drop") == "pulsating-drop"
        assert canonical_family_name("Cylinder") == "pulsating-cylinder"
        assert canonical_family_name("rest") == "rest"

    def test_unknown_family(self):
        with pytest.raises(UnsupportedFamily):
            canonical_family_name("vortex-street")

    def test_make_family_dispatch(self):
        field = make_family("ring", RING, c1=1.0, c2=1.0, c3=1.0)
        assert field.meta["family"] == "stationary-ring"


class TestResiduals:
    def test_every_family_solves_its_equations(self, catalog):
        for name, field in catalog.items():
            rep = residual_report(field)
            assert rep.max_residual < 1e-6, (name, rep.max_residual)

    def test_every_family_in_finite_difference_mode(self, catalog):
        for name, field in catalog.items():
            rep = residual_report(field.with_derivative_mode("fd"), shape=(5, 5, 4))
            assert rep.max_residual < 1e-4, (name, rep.max_residual)

    def test_rest_state_is_exact(self, catalog):
        rep = residual_report(catalog["rest"])
        assert rep.max_residual < 1e-12


class TestConstantImage:
    def test_window_is_one_period(self):
        field = constant_sw_image(1.0, 0.5, 1.0, P)
        with pytest.raises(WindowViolation):
            field.eval(0.0, 0.1, 0.1)
        with pytest.raises(WindowViolation):
            field.eval(2 * math.pi, 0.1, 0.1)
        field.eval(3.0, 0.1, 0.1)

    def test_residual_on_window(self):
        field = constant_sw_image(1.0, 0.5, 1.0, P)
        pts = [(t, x, y) for t in np.linspace(0.5, 5.0, 6)
               for x in np.linspace(-1.5, 1.5, 5) for y in np.linspace(-1.5, 1.5, 5)]
        from rswlab.verify import residual_cartesian

        rep = residual_cartesian(field, points=np.array(pts))
        assert rep.max_residual < 1e-6

    def test_circle_trajectory_data(self):
        u0, v0, f = 1.0, 0.5, 1.0
        field = constant_sw_image(u0, v0, 1.0, P)
        r0, th0 = 0.9, 0.4
        formula = trajectory_formula(field, r0, th0)
        x0, y0 = r0 * math.cos(th0), r0 * math.sin(th0)
        A, B, R = formula.circle
        assert A == pytest.approx(x0 / 2 + u0 / f)
        assert B == pytest.approx(y0 / 2 + v0 / f)
        assert R == pytest.approx(math.hypot(u0 / f - x0 / 2, v0 / f - y0 / 2))
        # the path parametrization stays on that circle and passes through
        # the anchor at the window midpoint
        assert formula.x_of_t(math.pi) == pytest.approx(x0)
        assert formula.y_of_t(math.pi) == pytest.approx(y0)
        for t in np.linspace(0.4, 5.9, 17):
            assert math.hypot(formula.x_of_t(t) - A, formula.y_of_t(t) - B) == pytest.approx(R, abs=1e-12)


class TestPulsatingCylinder:
    def test_values_at_reference_times(self):
        field = pulsating_cylinder(2.0, 1.0, P)
        for r in (0.4, 1.0, 1.7):
            U, V, h = field.eval(0.0, r, 0.3)
            assert U == pytest.approx(0.0, abs=1e-15)
            assert V == pytest.approx(r / 2)
            assert h == pytest.approx(2.0)
            U, V, h = field.eval(math.pi, r, 0.3)
            assert U == pytest.approx(0.0, abs=1e-12)
            assert V == pytest.approx(-r / 4)
            assert h == pytest.approx(0.5)

    def test_periodicity(self):
        field = pulsating_cylinder(2.0, 1.0, P)
        for t in (0.3, 1.9, 4.4):
            for r in (0.2, 1.5):
                a = field.eval(t, r, 0.0)
                b = field.eval(t + 2 * math.pi, r, 0.0)
                assert np.allclose(a, b, atol=1e-10)

    def test_potential_vorticity_everywhere(self):
        field = pulsating_cylinder(2.0, 1.0, P)
        rng = np.random.default_rng(2)
        for _ in range(100):
            t = rng.uniform(0.0, 2 * math.pi)
            r = rng.uniform(0.05, 2.0)
            th = rng.uniform(0, 2 * math.pi)
            assert potential_vorticity(field, PolarPoint(t, r, th)) == pytest.approx(
                1.0, abs=1e-10
            )

    def test_trajectory_formula_circle(self):
        field = pulsating_cylinder(2.0, 1.0, P)
        formula = trajectory_formula(field, 1.0, 0.0)
        A, B, R = formula.circle
        assert R == pytest.approx(0.5)
        assert math.hypot(A, B) == pytest.approx(1.5)
        assert formula.r_of_t(0.0) == pytest.approx(1.0)
        assert formula.r_of_t(math.pi) == pytest.approx(2.0)

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidParams):
            pulsating_cylinder(-1.0, 1.0, P)
        with pytest.raises(InvalidParams):
            pulsating_cylinder(2.0, 0.0, P)


class TestPulsatingDrop:
    def test_swirl_coefficient_and_depth(self):
        l = drop_swirl_coefficient(2.0, P)
        assert l == pytest.approx(-1.0 / math.sqrt(6.0))
        hbar = drop_base_depth(2.0, P)
        assert hbar(0.0) == pytest.approx(0.5)
        assert hbar(-1.0 / l) == pytest.approx(0.0, abs=1e-14)
        assert hbar(math.sqrt(6.0)) == pytest.approx(0.0, abs=1e-14)

    def test_boundary_depth_vanishes(self):
        field = pulsating_drop(2.0, P)
        R = field.meta["boundary_radius"]
        for t in (0.0, 0.8, math.pi, 4.9):
            _, _, h = field.values_unchecked(t, R(t), 0.0)
            assert abs(h) < 1e-9
            _, _, h_in = field.values_unchecked(t, 0.5 * R(t), 0.0)
            assert h_in > 0

    def test_periodicity(self):
        field = pulsating_drop(2.0, P)
        for t in (0.1, 2.2):
            for r in (0.3, 1.2):
                assert np.allclose(
                    field.eval(t, r, 0.0), field.eval(t + 2 * math.pi, r, 0.0),
                    atol=1e-10,
                )

    def test_depth_maximal_at_origin(self):
        field = pulsating_drop(2.0, P)
        for t in (0.0, math.pi / 2, math.pi):
            hs = [field.values_unchecked(t, r, 0.0)[2] for r in np.linspace(0.0, 0.95 * field.meta["boundary_radius"](t), 12)]
            assert hs[0] == max(hs)
            assert all(b <= a + 1e-12 for a, b in zip(hs, hs[1:]))


class TestStationaryRing:
    def test_lower_branch_supercritical_everywhere(self):
        lower = stationary_ring(1.0, 1.0, 1.0, RING, branch="lower")
        bounds = lower.meta["bounds"]
        from rswlab.core import diagnostics

        for r in np.linspace(bounds.r_inner * 1.001, bounds.r_outer * 0.999, 50):
            assert diagnostics(lower, PolarPoint(0.0, r, 0.0)).froude > 1.0

    def test_upper_branch_subcritical_between_critical_crossings(self):
        # the upper branch depth exceeds the critical depth h_s only on an
        # interior band; towards both sonic circles the flow is critical in
        # the radial speed alone, so every branch turns supercritical there
        from scipy.optimize import brentq

        from rswlab.core import diagnostics
        from rswlab.reduction import depth_cubic_coeffs

        upper = stationary_ring(1.0, 1.0, 1.0, RING, branch="upper")
        bounds = upper.meta["bounds"]
        h_s = (2 * 1.0 - 1.0 * RING.f) / (3 * RING.g)

        def gap(r):
            phi1, phi2 = depth_cubic_coeffs(r, 1.0, 1.0, 1.0, RING)
            return h_s ** 3 + phi1 * h_s ** 2 + phi2

        r_lo = brentq(gap, bounds.r_inner, 0.3 * bounds.r_outer, xtol=1e-12)
        r_hi = brentq(gap, 0.3 * bounds.r_outer, bounds.r_outer, xtol=1e-12)
        assert bounds.r_inner < r_lo < r_hi < bounds.r_outer
        for r in np.linspace(r_lo * 1.01, r_hi * 0.99, 25):
            assert diagnostics(upper, PolarPoint(0.0, r, 0.0)).froude < 1.0
        # just outside the band the upper branch is supercritical
        assert diagnostics(upper, PolarPoint(0.0, r_hi * 1.05, 0.0)).froude > 1.0

    def test_sonic_at_bounds(self):
        field = stationary_ring(1.0, 1.0, 1.0, RING)
        bounds = field.meta["bounds"]
        for r_star, h_c in ((bounds.r_inner, bounds.h_inner), (bounds.r_outer, bounds.h_outer)):
            U = 1.0 / (r_star * h_c)  # depth limit at the circle is h_c
            assert U * U == pytest.approx(RING.g * h_c, rel=1e-8)

    def test_no_ring_below_threshold(self):
        from rswlab.errors import NoRingExists

        with pytest.raises(NoRingExists):
            stationary_ring(0.05, 1.0, 1.0, RING)

    def test_throughput_continuity(self):
        # r U h is the same constant at every radius (mass flux invariant)
        field = stationary_ring(1.0, 1.0, 1.0, RING)
        bounds = field.meta["bounds"]
        for r in np.linspace(bounds.r_inner * 1.1, bounds.r_outer * 0.9, 9):
            U, V, h = field.values_unchecked(0.0, r, 0.0)
            assert r * U * h == pytest.approx(1.0, rel=1e-10)


class TestCollapseContact:
    def test_constant_swirl_depth_closed_form(self):
        g = P.g
        c, lam0, eta0 = 0.8, 1.0, 1.0
        field = collapse_contact(swirl_constant(c), lam0, eta0, P)
        eta = field.meta["eta_fn"]
        for lam in (0.5, 1.0, 2.0):
            expected = (lam0 * eta0 - c * c * (lam - lam0) / (2 * g)) / lam
            assert eta(lam) == pytest.approx(expected, rel=1e-10)

    def test_material_surfaces(self):
        # the similarity level of a particle stays constant along its path
        from rswlab.verify import integrate_trajectory

        field = collapse_contact(swirl_constant(0.8), 1.0, 1.0, P)
        f = P.f
        t0 = 1.2
        r0 = 1.4
        lam_start = (1 - math.cos(f * t0)) / r0 ** 2
        traj = integrate_trajectory(field, r0, 0.0, t0, 5.2, record=np.linspace(t0, 5.2, 9))
        for t, (r, _) in zip(traj.times, traj.positions):
            lam = (1 - math.cos(f * t)) / r ** 2
            assert lam == pytest.approx(lam_start, abs=1e-6)

    def test_piston_radii_scale_with_half_angle(self):
        field = collapse_contact(swirl_constant(0.8), 1.0, 1.0, P)
        from rswlab.verify import integrate_trajectory

        t0, r0 = 1.0, 1.2
        traj = integrate_trajectory(field, r0, 0.0, t0, 5.0, record=[5.0])
        expected = r0 * math.sin(P.f * 5.0 / 2) / math.sin(P.f * t0 / 2)
        assert traj.positions[-1][0] == pytest.approx(expected, abs=1e-8)


class TestCollapseContactCubic:
    def test_depth_positive_and_residual(self):
        field = collapse_contact_cubic(1.0, 1.0, 1.0, P)
        rep = residual_report(field, shape=(5, 6, 3))
        assert rep.max_residual < 1e-6
        pts = sample_grid(field, (4, 5, 2))
        for t, r, th in pts:
            _, _, h = field.values_unchecked(t, r, th)
            assert h > 0

    def test_branches_differ(self):
        lo = collapse_contact_cubic(1.0, 1.0, 1.0, P, branch="lower")
        hi = collapse_contact_cubic(1.0, 1.0, 1.0, P, branch="upper")
        t, r = 2.0, 9.0
        assert lo.values_unchecked(t, r, 0.0)[0] != pytest.approx(
            hi.values_unchecked(t, r, 0.0)[0]
        )

    def test_upper_branch_solves_too(self):
        field = collapse_contact_cubic(1.0, 1.0, 1.0, P, branch="upper")
        rep = residual_report(field, shape=(5, 6, 3))
        assert rep.max_residual < 1e-6

    def test_zero_c3_rejected(self):
        with pytest.raises(InvalidParams):
            collapse_contact_cubic(1.0, 1.0, 0.0, P)


class TestCollapseScaling:
    def test_monotone_regimes(self, catalog):
        field = catalog["collapse-scaling"]
        ic = field.meta["tabulation"]
        hs = [field.values_unchecked(t, 1.0, 0.0)[2] for t in np.linspace(0.0, 0.9 * ic.Tstar, 20)]
        assert all(b > a for a, b in zip(hs, hs[1:]))  # depth grows: collapse

    def test_spreading_then_collapse_depth(self):
        field = make_family("collapse-scaling", P, phi0=0.5, eta0=1.0)
        ic = field.meta["tabulation"]
        t1 = ic.t1
        before = [field.values_unchecked(t, 1.0, 0.0)[2] for t in np.linspace(0.0, t1 * 0.95, 8)]
        after = [field.values_unchecked(t, 1.0, 0.0)[2] for t in np.linspace(t1 * 1.05, 0.9 * ic.Tstar, 8)]
        assert all(b < a for a, b in zip(before, before[1:]))
        assert all(b > a for a, b in zip(after, after[1:]))


class TestTrajectoryFormulaDispatch:
    def test_transported_identity(self, params11):
        from rswlab.solutions import rest_state
        from rswlab.transforms import transport_solution

        moved = transport_solution(rest_state(1.0, params11), 1.0, params11)
        formula = trajectory_formula(moved, 0.7, 1.1)
        for t in (0.0, 1.0, 4.0):
            assert formula.r_of_t(t) == pytest.approx(0.7)
            assert formula.theta_of_t(t) == pytest.approx(1.1)

    def test_unsupported_family(self, catalog):
        with pytest.raises(UnsupportedFamily):
            trajectory_formula(catalog["stationary-ring"], 3.0, 0.0)


class TestClosure:
    def test_figure_radii(self):
        res = closure_condition(2.0, 1.0 / math.sqrt(3.0), P)
        assert res.closed and (res.m, res.M) == (1, 3)
        res = closure_condition(2.0, math.sqrt(3.0) / 6.0, P)
        assert res.closed and (res.m, res.M) == (1, 6)

    def test_irrational_ratio_is_quasi_closed(self):
        res = closure_condition(2.0, math.sqrt(3.0) / math.pi, P)
        assert not res.closed

    def test_boundary_particles_close_every_period(self):
        l = drop_swirl_coefficient(2.0, P)
        r_boundary = -P.f / (l * math.sqrt(2.0))
        res = closure_condition(2.0, r_boundary, P)
        assert res.closed and (res.m, res.M) == (1, 1)

    def test_outside_drop_rejected(self):
        with pytest.raises(InvalidParams):
            closure_condition(2.0, 10.0, P)


class TestProfiles:
    def test_parse(self):
        prof = parse_profile("solid:0.4")
        assert prof(2.0) == pytest.approx(0.8)
        with pytest.raises(InvalidParams):
            parse_profile("fourier:1")

    def test_stationary_profile_must_vanish_at_origin(self):
        from rswlab.solutions import RadialProfile, stationary_rotsym

        bad = RadialProfile(lambda r: 1.0, lambda r: 0.0, "offset")
        with pytest.raises(InvalidParams):
            stationary_rotsym(bad, 1.0, P)

    def test_draining_profile_rejected(self):
        # weak anticyclonic rotation: f V dominates V^2 / r, the balance
        # integral is negative and the depth runs out at finite radius
        from rswlab.solutions import stationary_rotsym

        with pytest.raises(InvalidParams):
            stationary_rotsym(profile_solid(-0.9), 0.01, P)
