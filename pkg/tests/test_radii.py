import numpy as np
import pytest

from covercert import (Box, BoxRegion, MuSpec, RadiusOracle,
                       RefinementRequiredError, boundary_family,
                       constant_exhaustion, constant_weight_family,
                       expanding_boxes, full_space, make_exp_family,
                       positivity_certificate, r_iter, schwartz_family)
import dataclasses


def brute_force_depth1(radius_fn, z, lo, hi, step):
    """Independent oracle: min of the radius over qualifying grid points."""
    etas = np.arange(lo, hi + step / 2, step)
    r_eta = radius_fn(etas)
    r_z = radius_fn(np.array([z]))[0]
    dist = np.abs(etas - z)
    qualify = (dist <= r_eta) | (dist <= r_z)
    return float(r_eta[qualify].min())


@pytest.fixture(scope="module")
def decaying_family():
    # scale-one rational decay: radius (1 + x^2)^(-1) on the whole line
    return make_exp_family(MuSpec("power_abs", power=1),
                           lambda n: float(n), full_space(1))


class TestClosedForm:
    def test_constant_radius_is_exact_at_every_depth(self):
        fam = schwartz_family(full_space(2))
        oracle = RadiusOracle(fam, fam.domain, 1, 0.1,
                              box=Box((-2.0, -2.0), (2.0, 2.0)))
        assert oracle.strategy == "closed_form_constant"
        for k in range(4):
            assert oracle.value(k, np.array([0.3, -1.1])) == 1.0

    def test_r_iter_shortcut(self):
        dom = expanding_boxes(1)
        fam = constant_weight_family(dom)
        assert r_iter(fam, dom, 1, 3, np.array([0.2]), 0.01,
                      box=Box((-1.0,), (1.0,))) == 0.5


class TestGridOracle:
    def test_rational_decay_depth1_at_origin(self, decaying_family):
        fam = decaying_family
        res = 1e-3
        oracle = RadiusOracle(fam, fam.domain, 1, res, box=Box((-1.5,), (1.5,)))
        value = oracle.value(1, np.array([0.0]))
        # independent brute force on its own grid
        brute = brute_force_depth1(
            lambda t: (1.0 + t * t) ** -1.0, 0.0, -1.5, 1.5, 1e-4)
        assert value == pytest.approx(brute, abs=2e-3)
        # the qualifying set is [-1, 1], so the infimum is r(1) = 1/2
        assert abs(value - 0.5) <= 2 * res

    def test_boundary_family_depth1_midpoint(self):
        dom = constant_exhaustion(BoxRegion(Box((0.0,), (1.0,))), name="unit")
        fam = boundary_family(dom)
        res = 1e-4
        # the qualifying set around 0.5 is [1/4, 3/4], well inside this box
        oracle = RadiusOracle(fam, dom, 1, res, box=Box((0.1,), (0.9,)))
        value = oracle.value(1, np.array([0.5]))

        def radius(t):
            return np.minimum(np.minimum(t, 1.0 - t) / 2.0, 1.0)

        brute = brute_force_depth1(radius, 0.5, 0.1, 0.9, 1e-5)
        assert value == pytest.approx(brute, abs=2e-4)
        # qualifying set is [1/4, 3/4]; infimum r(1/4) = 1/8
        assert value == pytest.approx(0.125, abs=2 * res)

    def test_sampled_value_is_upper_bound(self, decaying_family):
        fam = decaying_family
        coarse = RadiusOracle(fam, fam.domain, 1, 2e-2, box=Box((-1.5,), (1.5,)))
        fine = RadiusOracle(fam, fam.domain, 1, 2e-3, box=Box((-1.5,), (1.5,)))
        z = np.array([0.35])
        assert coarse.value(1, z) >= fine.value(1, z) - 1e-12

    def test_depth_monotone_on_lattice_and_off(self, decaying_family):
        fam = decaying_family
        oracle = RadiusOracle(fam, fam.domain, 1, 5e-3, box=Box((-1.5,), (1.5,)))
        for k in (0, 1, 2):
            assert (oracle.lattice_values(k + 1)
                    <= oracle.lattice_values(k) + 1e-15).all()
        for z in (np.array([0.1234]), np.array([-0.777]), np.array([1.01])):
            vals = [oracle.value(k, z) for k in range(4)]
            assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_refinement_required_when_grid_too_coarse(self):
        dom = constant_exhaustion(BoxRegion(Box((0.0,), (1.0,))), name="unit")
        fam = boundary_family(dom)
        # near the box edge the radius drops to ~2.5e-3 < resolution
        with pytest.raises(RefinementRequiredError):
            RadiusOracle(fam, dom, 1, 1e-2, box=Box((5e-3,), (1.0,)))


class TestLowerBoundWitness:
    def test_radius_dominates_weight_quotient(self):
        # the third comparison inequality rearranges to a radius lower bound
        dom = constant_exhaustion(BoxRegion(Box((0.0,), (1.0,))), name="unit")
        fam = boundary_family(dom)
        pts = np.linspace(0.03, 0.97, 95)[:, None]
        lhs = fam.radius_at(1, pts)
        a3 = fam.constant(3, 2)
        rhs = fam.nu_at(2, pts) / (a3 * fam.nu_at(fam.index(3, 2), pts))
        assert (lhs >= rhs - 1e-12).all()


class TestPositivityCertificate:
    def test_constant_radii_pass(self):
        fam = schwartz_family(full_space(1))
        cert = positivity_certificate(fam, fam.domain, 1, 3, 0.1,
                                      box=Box((-2.0,), (2.0,)))
        assert cert.verdict == "pass"
        assert cert.measured == 1.0

    def test_boundary_family_pass_on_compact_subgrid(self):
        dom = constant_exhaustion(BoxRegion(Box((0.0,), (1.0,))), name="unit")
        fam = boundary_family(dom)
        cert = positivity_certificate(fam, dom, 1, 3, 5e-3,
                                      box=Box((0.125,), (0.875,)))
        assert cert.verdict == "pass"
        assert cert.measured > 0
        assert cert.constants["s_condition"] == "s3"

    def test_untagged_family_not_certified(self):
        fam = schwartz_family(full_space(1))
        untagged = dataclasses.replace(fam, s_condition="none")
        cert = positivity_certificate(untagged, fam.domain, 1, 2, 0.1,
                                      box=Box((-2.0,), (2.0,)))
        assert cert.verdict == "not-certified"
