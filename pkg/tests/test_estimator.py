import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sacal.errors import DegenerateRotation, DomainError, NoCorrespondences
from sacal.estimator import (
    EPSILON_R,
    Aggregation,
    Correspondence,
    FocalAxis,
    FocalEstimate,
    aggregate,
    estimate_fu,
    estimate_fv,
    rate_of_change,
    select_center_correspondence,
)
from sacal.geometry import (
    Axis,
    CameraIntrinsics,
    ImagePoint,
    ImageSize,
    RotationAngle,
    inter_image_homography,
    map_point,
    rotation_matrix,
)
from sacal.scene import generate_points, synthesize_pair

SIZE = ImageSize(800, 600)
F = 772.55
K0 = CameraIntrinsics.centered(F, F, SIZE)


def exact_pair(K, angle, p):
    H = inter_image_homography(K, rotation_matrix(angle))
    return Correspondence(p, map_point(H, p))


angles = st.floats(0.1, 30).flatmap(lambda a: st.sampled_from([a, -a]))


class TestExactness:
    def test_center_pan(self):
        c = exact_pair(K0, RotationAngle.pan(1.0), K0.principal_point)
        est = estimate_fv(c, RotationAngle.pan(1.0), K0.c_v)
        # 772.55 / cos(1 deg), mpmath
        assert est.value == pytest.approx(772.6676810303208669, rel=1e-12)
        assert est.axis is FocalAxis.V and est.n_points == 1

    def test_center_tilt_is_negative(self):
        c = exact_pair(K0, RotationAngle.tilt(2.0), K0.principal_point)
        est = estimate_fu(c, RotationAngle.tilt(2.0), K0.c_u)
        assert est.value < 0
        assert est.magnitude == pytest.approx(F / math.cos(math.radians(2.0)), rel=1e-12)

    @given(st.floats(300, 2000), st.floats(300, 2000), angles)
    def test_law_pan(self, f_v, f_u, deg):
        K = CameraIntrinsics.centered(f_v, f_u, SIZE)
        pan = RotationAngle.pan(deg)
        est = estimate_fv(exact_pair(K, pan, K.principal_point), pan, K.c_v)
        assert est.magnitude == pytest.approx(f_v / math.cos(math.radians(deg)), rel=1e-6)

    @given(st.floats(300, 2000), st.floats(300, 2000), angles)
    def test_law_tilt(self, f_v, f_u, deg):
        K = CameraIntrinsics.centered(f_v, f_u, SIZE)
        tilt = RotationAngle.tilt(deg)
        est = estimate_fu(exact_pair(K, tilt, K.principal_point), tilt, K.c_u)
        assert est.magnitude == pytest.approx(f_u / math.cos(math.radians(deg)), rel=1e-6)

    @given(angles)
    def test_sign_flip(self, deg):
        a = estimate_fv(exact_pair(K0, RotationAngle.pan(deg), K0.principal_point), RotationAngle.pan(deg), K0.c_v)
        b = estimate_fv(exact_pair(K0, RotationAngle.pan(-deg), K0.principal_point), RotationAngle.pan(-deg), K0.c_v)
        assert a.magnitude == pytest.approx(b.magnitude, rel=1e-6)

    def test_bias_vanishes_with_angle(self):
        biases = [
            estimate_fv(exact_pair(K0, RotationAngle.pan(d), K0.principal_point), RotationAngle.pan(d), K0.c_v).value - F
            for d in (10.0, 3.0, 1.0, 0.3, 0.1)
        ]
        assert all(a > b > 0 for a, b in zip(biases, biases[1:]))


class TestDegenerate:
    @pytest.mark.parametrize("deg", [0.0, 0.005, -0.005])
    def test_pan(self, deg):
        c = Correspondence.from_coords(400, 300, 400, 300)
        with pytest.raises(DegenerateRotation) as info:
            estimate_fv(c, RotationAngle.pan(deg), 400)
        assert info.value.degrees == deg

    @pytest.mark.parametrize("deg", [0.0, 0.005, -0.005])
    def test_tilt(self, deg):
        c = Correspondence.from_coords(400, 300, 400, 300)
        with pytest.raises(DegenerateRotation):
            estimate_fu(c, RotationAngle.tilt(deg), 300)

    def test_threshold(self):
        assert EPSILON_R == pytest.approx(1.7453292e-4, rel=1e-6)
        c = exact_pair(K0, RotationAngle.pan(0.011), ImagePoint(400, 300))
        assert estimate_fv(c, RotationAngle.pan(0.011), 400).value == pytest.approx(F, rel=1e-6)

    def test_wrong_axis(self):
        c = Correspondence.from_coords(400, 300, 410, 300)
        with pytest.raises(DomainError):
            estimate_fv(c, RotationAngle.tilt(1.0), 400)
        with pytest.raises(DomainError):
            estimate_fu(c, RotationAngle.pan(1.0), 300)


@given(st.floats(-500, 500), st.floats(0, 800), st.floats(0, 800), angles)
def test_translation_equivariance(shift, v, v_prime, deg):
    pan = RotationAngle.pan(deg)
    a = estimate_fv(Correspondence.from_coords(v, 0, v_prime, 0), pan, 400)
    b = estimate_fv(Correspondence.from_coords(v + shift, 0, v_prime + shift, 0), pan, 400 + shift)
    assert b.value == pytest.approx(a.value, rel=1e-9, abs=1e-6)


def test_linear_in_transformed_coordinate():
    pan = RotationAngle.pan(2.0)
    r31 = rotation_matrix(pan).r(3, 1)
    base = Correspondence.from_coords(400, 300, 373.0, 300)
    for delta in (-2.0, 0.5, 3.0):
        moved = Correspondence.from_coords(400, 300, 373.0 + delta, 300)
        diff = estimate_fv(moved, pan, 400).value - estimate_fv(base, pan, 400).value
        assert diff == pytest.approx(delta / r31, rel=1e-9)


def test_random_scene_mean_within_a_pixel():
    cloud = generate_points(500, (5, 15), 0.05, K0, SIZE, seed=7)
    for angle, fn, c in (
        (RotationAngle.pan(1.0), estimate_fv, K0.c_v),
        (RotationAngle.tilt(-1.0), estimate_fu, K0.c_u),
    ):
        pair = synthesize_pair(cloud, K0, angle, SIZE)
        est = aggregate([fn(x, angle, c) for x in pair.correspondences])
        assert est.n_points == 500
        assert abs(est.magnitude - F) <= 1.0


class TestAggregate:
    def test_singleton(self):
        x = FocalEstimate(771.0, FocalAxis.V)
        assert aggregate([x]) == x

    def test_mean(self):
        es = [FocalEstimate(770.0, FocalAxis.V), FocalEstimate(774.0, FocalAxis.V)]
        out = aggregate(es)
        assert out.value == 772.0 and out.n_points == 2

    def test_median(self):
        es = [FocalEstimate(v, FocalAxis.U) for v in (770.0, 774.0, 10000.0)]
        assert aggregate(es, Aggregation.MEDIAN).value == 774.0
        assert aggregate(es, "median").value == sorted([770.0, 774.0, 10000.0])[1]

    def test_signed(self):
        es = [FocalEstimate(-770.0, FocalAxis.U), FocalEstimate(-774.0, FocalAxis.U)]
        out = aggregate(es)
        assert out.value == -772.0 and out.magnitude == 772.0

    def test_errors(self):
        with pytest.raises(NoCorrespondences):
            aggregate([])
        with pytest.raises(DomainError):
            aggregate([FocalEstimate(1.0, FocalAxis.V), FocalEstimate(1.0, FocalAxis.U)])

    @given(st.floats(-2000, 2000), st.integers(1, 30))
    def test_constant(self, x, n):
        assert aggregate([FocalEstimate(x, FocalAxis.V)] * n).value == pytest.approx(x, rel=1e-12)

    @given(st.lists(st.floats(500, 1000), min_size=3, max_size=15), st.floats(1e6, 1e12))
    def test_median_outlier(self, xs, big):
        xs = sorted(xs)
        es = [FocalEstimate(x, FocalAxis.V) for x in xs]
        before = aggregate(es, "median").value
        es[-1] = FocalEstimate(big, FocalAxis.V)
        assert aggregate(es, "median").value == before


class TestCenterSelection:
    center = ImagePoint(400.0, 300.0)

    def test_single(self):
        c = Correspondence.from_coords(1, 2, 3, 4)
        assert select_center_correspondence([c], self.center) is c

    def test_minimum(self):
        cs = [
            Correspondence.from_coords(410, 300, 0, 0),
            Correspondence.from_coords(400, 303, 1, 1),
            Correspondence.from_coords(350, 300, 2, 2),
        ]
        assert select_center_correspondence(cs, self.center) is cs[1]

    def test_tie_goes_to_first(self):
        cs = [
            Correspondence.from_coords(403, 304, 0, 0),
            Correspondence.from_coords(395, 300, 1, 1),
        ]
        assert select_center_correspondence(cs, self.center) is cs[0]

    def test_empty(self):
        with pytest.raises(NoCorrespondences):
            select_center_correspondence([], self.center)


class TestRateOfChange:
    def test_unchanged(self):
        c = Correspondence.from_coords(410, 250, 420, 250)
        assert rate_of_change(c, Axis.PAN, K0.principal_point).ratio == 1.0

    @pytest.mark.parametrize("deg", [0.5, 3.0, -7.0])
    def test_principal_column(self, deg):
        c = exact_pair(K0, RotationAngle.pan(deg), ImagePoint(K0.c_v, 120.0))
        r = rate_of_change(c, "pan", K0.principal_point)
        assert r.ratio == pytest.approx(math.cos(math.radians(deg)), abs=1e-12)

    def test_tilt_mirror(self):
        c = exact_pair(K0, RotationAngle.tilt(4.0), ImagePoint(150.0, K0.c_u))
        assert rate_of_change(c, Axis.TILT, K0.principal_point).ratio == pytest.approx(
            math.cos(math.radians(4.0)), abs=1e-12
        )

    def test_on_axis(self):
        c = Correspondence.from_coords(410, 250, 420, 300)
        with pytest.raises(ZeroDivisionError):
            rate_of_change(c, Axis.PAN, K0.principal_point)


def test_correspondence_must_be_finite():
    with pytest.raises(DomainError):
        Correspondence.from_coords(1.0, math.nan, 2.0, 3.0)


def test_vector_and_scalar_paths_agree():
    from sacal.estimator import fv_from_arrays

    pan = RotationAngle.pan(1.5)
    v = np.array([390.0, 401.5, 420.25])
    vp = np.array([370.0, 380.5, 399.0])
    vec = fv_from_arrays(v, vp, pan, 400.0)
    for a, b, x in zip(v, vp, vec):
        assert estimate_fv(Correspondence.from_coords(a, 0, b, 0), pan, 400.0).value == x
