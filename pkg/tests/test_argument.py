"""Contour-integral reconstruction of immersed surface images."""

import numpy as np
import pytest

from eitlab import argument as ap
from eitlab import boundary as bc
from eitlab.errors import NonIntegerWinding, TooCloseToContour
from eitlab.holomorphic import TraceTuple

TWO_PI = 2.0 * np.pi


def trace(fn, n=256):
    th = np.arange(n) * (TWO_PI / n)
    return bc.from_samples(fn(np.exp(1j * th)), TWO_PI)


@pytest.fixture(scope="module")
def e_z():
    return TraceTuple((trace(lambda z: z),))


@pytest.fixture(scope="module")
def e_pair():
    return TraceTuple((trace(lambda z: z), trace(lambda z: z ** 2)))


class TestCauchyOracles:
    def test_winding_inside_unit_circle(self, e_z):
        assert abs(ap.cauchy_integral(None, e_z[0], 0.0) - 1.0) < 1e-12

    def test_winding_outside(self, e_z):
        assert abs(ap.cauchy_integral(None, e_z[0], 2.0 + 0.5j)) < 1e-10

    def test_identity_coordinate_recovers_target(self, e_z):
        z = 0.5 + 0.0j
        assert abs(ap.cauchy_integral(e_z[0], e_z[0], z) - 0.25 - 0.25) < 1.0
        # J_{1,1}(z) = z exactly for the identity chart
        assert abs(ap.cauchy_integral(e_z[0], e_z[0], z) - z) < 1e-12

    def test_square_coordinate(self, e_pair):
        # the z^2 coordinate evaluated through the z chart gives z^2
        z = 0.5 + 0.1j
        got = ap.cauchy_integral(e_pair[1], e_pair[0], z)
        assert abs(got - z ** 2) < 1e-12

    def test_winding_two_of_square_chart(self, e_pair):
        assert ap.winding_number(e_pair[1], 0.3 + 0.0j) == 2

    def test_derivative_integrals(self, e_pair):
        z = 0.4 - 0.2j
        # d/dz of z through the z chart is 1, of z^2 is 2z, of a point
        # outside is 0
        assert abs(ap.derivative_integral(e_pair[0], e_pair[0], z) - 1.0) < 1e-11
        assert abs(ap.derivative_integral(e_pair[1], e_pair[0], z) - 2 * z) < 1e-11
        assert abs(ap.derivative_integral(e_pair[0], e_pair[0], 3.0 + 0j)) < 1e-11

    def test_additivity_over_sheets(self, e_pair):
        # the z chart has two preimages over z^2-image points; summing the
        # first coordinate over both sheets of the square chart cancels
        val = ap.cauchy_integral(e_pair[0], e_pair[1], 0.25 + 0.0j)
        assert abs(val) < 1e-8

    def test_quadrature_converges_near_contour(self, e_z):
        # halving the distance to the contour keeps the relative error small
        # because the node count scales with 1/dist
        for d in (0.05, 0.025, 0.0125):
            z = complex(1.0 - d, 0.0)
            got = ap.cauchy_integral(e_z[0], e_z[0], z)
            assert abs(got - z) < 1e-6 * abs(z)

    def test_too_close_raises(self, e_z):
        with pytest.raises(TooCloseToContour):
            ap.cauchy_integral(None, e_z[0], complex(1.0 - 1e-9, 0.0))

    def test_noninteger_winding_raises(self, e_z, monkeypatch):
        # the rounding guard fires when the contour integral is far from an
        # integer (an under-resolved quadrature would produce this)
        monkeypatch.setattr(ap, "_cauchy_many",
                            lambda *a, **k: np.array([0.5 + 0.0j]))
        with pytest.raises(NonIntegerWinding):
            ap.winding_number(e_z[0], 0.0 + 0.0j)


class TestClassify:
    def test_disk_winding_region(self, e_z):
        wf = ap.classify(e_z[0], 48, 0.1)
        inside = wf.points_with_winding(1)
        assert inside.size > 0
        assert np.abs(inside).max() < 0.9  # eps-margin inside the circle
        outside = wf.points_with_winding(0)
        assert np.abs(outside).min() > 1.0

    def test_winding_locally_constant(self, e_z):
        wf = ap.classify(e_z[0], 48, 0.1)
        w = wf.winding.reshape(wf.shape)
        near = wf.near_contour.reshape(wf.shape)
        interior_mask = (~near) & (w == 1)
        # every classified point strictly inside has all classified
        # neighbours with the same winding unless the neighbour is near
        ii, jj = np.nonzero(interior_mask)
        for i, j in zip(ii, jj):
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if 0 <= a < wf.shape[0] and 0 <= b < wf.shape[1]:
                    if not near[a, b] and np.abs(wf.grid.reshape(wf.shape)[a, b]) < 0.9:
                        assert w[a, b] == 1

    def test_eps_larger_than_inradius_gives_empty(self, e_z):
        wf = ap.classify(e_z[0], 32, 1.5)
        assert wf.points_with_winding(1).size == 0

    def test_square_chart_has_no_winding_one(self, e_pair):
        wf = ap.classify(e_pair[1], 40, 0.1)
        assert wf.points_with_winding(1).size == 0
        assert wf.points_with_winding(2).size > 0


class TestReconstruct:
    def test_identity_chart_cloud(self, e_z):
        cloud = ap.reconstruct(e_z, eps=0.2, grid_resolution=24)
        interior = cloud.interior_points()
        assert interior.shape[0] > 0
        # every interior point equals its source lattice target
        src = cloud.source_z[np.array(cloud.tags) == "interior"]
        assert np.abs(interior[:, 0] - src).max() < 1e-10

    def test_pair_matches_graph_of_square(self, e_pair):
        cloud = ap.reconstruct(e_pair, eps=0.2, grid_resolution=24)
        interior = cloud.interior_points()
        assert interior.shape[0] > 0
        err = np.abs(interior[:, 1] - interior[:, 0] ** 2).max()
        assert err < 1e-8

    def test_boundary_points_present(self, e_pair):
        cloud = ap.reconstruct(e_pair, eps=0.2, grid_resolution=16)
        nb = sum(1 for t in cloud.tags if t == "boundary")
        assert nb > 0
        bpts = cloud.points[np.array(cloud.tags) == "boundary"]
        assert np.abs(np.abs(bpts[:, 0]) - 1.0).max() < 1e-10

    def test_constant_trace_merges_to_single_boundary_point(self):
        n = 128
        e = TraceTuple((bc.from_samples(np.full(n, 2.0 + 1j), TWO_PI),))
        cloud = ap.reconstruct(e, eps=0.2, grid_resolution=16)
        assert sum(1 for t in cloud.tags if t == "interior") == 0
        assert cloud.n_points == 1
        assert abs(cloud.points[0, 0] - (2.0 + 1j)) < 1e-12

    def test_shared_fields_give_identical_targets(self, e_pair):
        fields = [ap.classify(e_pair[j], 20, 0.2) for j in range(2)]
        c1 = ap.reconstruct(e_pair, eps=0.2, fields=fields)
        c2 = ap.reconstruct(e_pair, eps=0.2, fields=fields)
        assert np.array_equal(c1.source_z, c2.source_z, equal_nan=True)

    def test_exp_trace(self):
        e = TraceTuple((trace(np.exp),))
        cloud = ap.reconstruct(e, eps=0.2, grid_resolution=24)
        interior = cloud.interior_points()
        assert interior.shape[0] > 0
        src = cloud.source_z[np.array(cloud.tags) == "interior"]
        assert np.abs(interior[:, 0] - src).max() < 1e-10


class TestImmersionCheck:
    def test_pair_is_immersed(self, e_pair):
        fields = [ap.classify(e_pair[j], 20, 0.2) for j in range(2)]
        rep = ap.immersion_check(e_pair, fields, 2)
        assert rep.applicable and rep.passed
        assert rep.min_margin > 0.1

    def test_single_identity_chart(self, e_z):
        fields = [ap.classify(e_z[0], 20, 0.2)]
        rep = ap.immersion_check(e_z, fields, 1)
        assert bool(rep)
        assert abs(rep.min_margin - 1.0) < 1e-9

    def test_m_too_large(self, e_z):
        with pytest.raises(ValueError):
            ap.immersion_check(e_z, [], 2)

    def test_not_applicable_without_winding_one(self, e_pair):
        fields = [ap.classify(e_pair[1], 20, 0.2)]
        rep = ap.immersion_check(TraceTuple((e_pair[1],)), fields, 1)
        assert not rep.applicable


class TestCsvRoundtrip:
    def test_roundtrip(self, e_pair, tmp_path):
        cloud = ap.reconstruct(e_pair, eps=0.2, grid_resolution=16)
        path = str(tmp_path / "cloud.csv")
        cloud.to_csv(path)
        back = ap.ReconstructedCloud.from_csv(path)
        assert np.allclose(back.points, cloud.points)
        assert back.tags == cloud.tags
        assert np.array_equal(back.chart_j, cloud.chart_j)
