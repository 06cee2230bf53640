import math

import numpy as np
import pytest

from spindir.frames import (
    AxisPairEstimate,
    EulerAngles,
    Frame,
    axes_to_euler,
    best_fit_frame,
    euler_to_axes,
    frame_infidelity,
    naive_euler_estimate,
)
from spindir.geometry import Direction

RNG = np.random.default_rng(977)


def random_euler() -> EulerAngles:
    return EulerAngles(
        phi=RNG.uniform(-math.pi, math.pi),
        theta=math.acos(RNG.uniform(-1.0, 1.0)),
        psi=RNG.uniform(-math.pi, math.pi),
    )


def test_euler_angle_ranges():
    e = EulerAngles(phi=3.0 * math.pi + 0.1, theta=1.0, psi=-5.0 * math.pi)
    assert -math.pi <= e.phi < math.pi
    assert e.phi == pytest.approx(math.pi + 0.1 - 2.0 * math.pi)
    assert e.psi == pytest.approx(-math.pi)
    with pytest.raises(ValueError):
        EulerAngles(phi=0.0, theta=-0.1, psi=0.0)
    with pytest.raises(ValueError):
        EulerAngles(phi=math.nan, theta=1.0, psi=0.0)
    with pytest.raises(ValueError):
        EulerAngles(phi=0.0, theta=1.0, psi=0.0, convention="zyz")


def test_frame_validation():
    eye = np.eye(3)
    Frame(z_axis=eye[2], x_axis=eye[0], y_axis=eye[1])
    with pytest.raises(ValueError, match="unit"):
        Frame(z_axis=2.0 * eye[2], x_axis=eye[0], y_axis=eye[1])
    with pytest.raises(ValueError, match="orthogonal"):
        v = np.array([0.1, 0.0, 1.0])
        Frame(z_axis=v / np.linalg.norm(v), x_axis=eye[0], y_axis=eye[1])
    with pytest.raises(ValueError, match="right-handed"):
        Frame(z_axis=-eye[2], x_axis=eye[0], y_axis=eye[1])


def test_forward_map_produces_orthonormal_frame():
    for _ in range(200):
        frame, pair = euler_to_axes(random_euler())
        m = frame.axes_matrix()
        np.testing.assert_allclose(m.T @ m, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(pair.z_dir.unit_vector, frame.z_axis, atol=1e-12)
        np.testing.assert_allclose(pair.x_dir.unit_vector, frame.x_axis, atol=1e-12)


def test_identity_angles_give_lab_frame():
    frame, _ = euler_to_axes(EulerAngles(phi=0.0, theta=0.0, psi=0.0))
    np.testing.assert_allclose(frame.z_axis, [0.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(frame.x_axis, [1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(frame.y_axis, [0.0, 1.0, 0.0], atol=1e-15)


def test_round_trip_away_from_poles():
    for _ in range(500):
        e = random_euler()
        if math.sin(e.theta) < 1e-6:
            continue
        frame, _ = euler_to_axes(e)
        back = axes_to_euler(frame)
        assert back.theta == pytest.approx(e.theta, abs=1e-9)
        assert _angle_diff(back.phi, e.phi) < 1e-9
        assert _angle_diff(back.psi, e.psi) < 1e-9


def _angle_diff(a: float, b: float) -> float:
    return abs((a - b + math.pi) % (2.0 * math.pi) - math.pi)


@pytest.mark.parametrize("theta", [0.0, math.pi])
def test_gimbal_pole_round_trip(theta):
    # at the poles only the sum (or difference) of the azimuths survives;
    # the extraction pins phi = 0 and must still reproduce the frame
    for phi, psi in [(0.3, 1.2), (-2.0, 0.7), (1.0, -1.0)]:
        frame, _ = euler_to_axes(EulerAngles(phi=phi, theta=theta, psi=psi))
        back = axes_to_euler(frame)
        assert back.phi == 0.0
        assert back.theta == pytest.approx(theta, abs=1e-9)
        frame2, _ = euler_to_axes(back)
        assert frame_infidelity(frame, frame2) < 1e-15


def test_naive_estimate_exact_on_clean_data():
    failures = 0
    for _ in range(300):
        e = random_euler()
        if math.sin(e.theta) < 1e-3:
            continue
        frame, pair = euler_to_axes(e)
        out = naive_euler_estimate(pair)
        assert not out.failed
        rec, _ = euler_to_axes(out.angles)
        assert frame_infidelity(frame, rec) < 1e-10
        assert _angle_diff(out.angles.phi, e.phi) < 1e-8
        assert _angle_diff(out.angles.psi, e.psi) < 1e-8
        failures += out.failed
    assert failures == 0


def test_naive_estimate_quadrant_choice():
    # |phi| beyond pi/2 exercises the branch that the bare arcsine misses
    for phi in (2.0, -2.5, 3.0):
        e = EulerAngles(phi=phi, theta=1.1, psi=0.4)
        _, pair = euler_to_axes(e)
        out = naive_euler_estimate(pair)
        assert not out.failed
        assert _angle_diff(out.angles.phi, phi) < 1e-9


def test_naive_estimate_failure_fixture():
    # phi = pi/2 puts the x axis at the pole and z on the equator; tilting the
    # measured z inward by 0.1 gives cos(theta_x)/sin(theta_z) = 1/cos(0.1) > 1
    z_dir = Direction(theta=0.5 * math.pi - 0.1, phi=0.0)
    x_dir = Direction(theta=0.0, phi=0.5 * math.pi)
    out = naive_euler_estimate(AxisPairEstimate(z_dir=z_dir, x_dir=x_dir))
    assert out.failed
    assert out.angles is None
    assert out.sin_phi == pytest.approx(1.0 / math.cos(0.1), abs=1e-12)


def test_naive_estimate_pole_raises():
    pair = AxisPairEstimate(
        z_dir=Direction(theta=0.0, phi=0.0), x_dir=Direction(theta=0.5, phi=0.2)
    )
    with pytest.raises(ValueError, match="pole"):
        naive_euler_estimate(pair)


def test_best_fit_recovers_exact_frame():
    for _ in range(300):
        e = random_euler()
        frame, pair = euler_to_axes(e)
        fit, angles = best_fit_frame(pair)
        assert frame_infidelity(frame, fit) < 1e-12
        rec, _ = euler_to_axes(angles)
        assert frame_infidelity(frame, rec) < 1e-12


def test_best_fit_splits_defect_evenly():
    # close the zx angle to pi/2 - delta; each fitted axis moves back delta/2
    for delta in (0.02, 0.1, 0.2):
        z = np.array([0.0, 0.0, 1.0])
        x = np.array([math.cos(delta), 0.0, math.sin(delta)])  # tilted toward z
        pair = AxisPairEstimate(
            z_dir=Direction.from_vector(z), x_dir=Direction.from_vector(x)
        )
        fit, _ = best_fit_frame(pair)
        gap_z = math.acos(float(np.dot(fit.z_axis, z)))
        gap_x = math.acos(float(np.dot(fit.x_axis, x)))
        assert gap_z == pytest.approx(delta / 2.0, abs=1e-6)
        assert gap_x == pytest.approx(delta / 2.0, abs=1e-6)
        assert float(np.dot(fit.z_axis, fit.x_axis)) == pytest.approx(0.0, abs=1e-12)


def test_best_fit_rejects_parallel_estimates():
    d = Direction(theta=0.7, phi=0.3)
    with pytest.raises(ValueError, match="plane"):
        best_fit_frame(AxisPairEstimate(z_dir=d, x_dir=d))
    anti = Direction(theta=math.pi - 0.7, phi=0.3 + math.pi)
    with pytest.raises(ValueError, match="plane"):
        best_fit_frame(AxisPairEstimate(z_dir=d, x_dir=anti))


def test_best_fit_beats_naive_on_noisy_data():
    # same noisy inputs; the geometric fit wins on average (per-trial wins are
    # not guaranteed, the naive branch choice sometimes lands closer)
    rng = np.random.default_rng(31)
    wins = 0
    total = 0
    fit_errs = []
    naive_errs = []
    for _ in range(200):
        e = EulerAngles(
            phi=rng.uniform(-math.pi, math.pi),
            theta=math.acos(rng.uniform(-0.95, 0.95)),
            psi=rng.uniform(-math.pi, math.pi),
        )
        frame, pair = euler_to_axes(e)
        noisy = AxisPairEstimate(
            z_dir=_jitter(pair.z_dir, 0.15, rng), x_dir=_jitter(pair.x_dir, 0.15, rng)
        )
        fit, _ = best_fit_frame(noisy)
        fit_err = frame_infidelity(frame, fit)
        out = naive_euler_estimate(noisy)
        if out.failed:
            continue
        rec, _ = euler_to_axes(out.angles)
        naive_err = frame_infidelity(frame, rec)
        wins += fit_err <= naive_err + 1e-12
        total += 1
        fit_errs.append(fit_err)
        naive_errs.append(naive_err)
    assert total > 100
    assert wins / total > 0.55
    assert np.mean(fit_errs) < np.mean(naive_errs)


def _jitter(d: Direction, eps: float, rng) -> Direction:
    v = d.unit_vector + eps * rng.standard_normal(3)
    return Direction.from_vector(v)


def test_infidelity_zero_on_identical_frames():
    frame, _ = euler_to_axes(random_euler())
    assert frame_infidelity(frame, frame) == pytest.approx(0.0, abs=1e-14)


def test_infidelity_maximal_on_flipped_frame():
    eye = np.eye(3)
    a = Frame(z_axis=eye[2], x_axis=eye[0], y_axis=eye[1])
    # rotate by pi about z: x and y flip, z stays
    b = Frame(z_axis=eye[2], x_axis=-eye[0], y_axis=-eye[1])
    assert frame_infidelity(a, b) == pytest.approx(2.0, abs=1e-15)


def test_infidelity_range_and_rotation_invariance():
    from scipy.spatial.transform import Rotation

    rng = np.random.default_rng(8)
    for _ in range(100):
        fa, _ = euler_to_axes(random_euler())
        fb, _ = euler_to_axes(random_euler())
        val = frame_infidelity(fa, fb)
        assert 0.0 <= val <= 3.0
        r = Rotation.random(random_state=rng).as_matrix()
        ra = Frame(z_axis=r @ fa.z_axis, x_axis=r @ fa.x_axis, y_axis=r @ fa.y_axis)
        rb = Frame(z_axis=r @ fb.z_axis, x_axis=r @ fb.x_axis, y_axis=r @ fb.y_axis)
        assert frame_infidelity(ra, rb) == pytest.approx(val, abs=1e-12)
