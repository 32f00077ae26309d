import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whichway import (ExperimentGeometry, IntensityProfile, OutOfRangeError,
                      SampledField, apply_dual_pinhole,
                      extract_profile, make_field, total_power)
from whichway.field import make_field_1d


def unit(field):
    return field.replace(np.ones(field.amplitudes.shape, complex))


@pytest.mark.parametrize("n, window, pitch", [
    (256, 0.04, 1.5625e-4),
    (4096, 0.02, 4.8828125e-6),
])
def test_make_field_pitch(n, window, pitch):
    f = make_field(n, n, window, window, 638e-9)
    assert f.dx == pytest.approx(pitch)
    assert f.dy == pytest.approx(pitch)
    assert total_power(f) == 0.0


def test_make_field_smallest():
    f = make_field(2, 2, 1.0, 1.0, 638e-9)
    assert f.amplitudes.shape == (2, 2)
    assert not np.any(f.amplitudes)
    assert total_power(f) == 0


@pytest.mark.parametrize("args", [
    (1, 4, 1.0, 1.0, 1e-6), (4, 4, 0.0, 1.0, 1e-6), (4, 4, 1.0, -1.0, 1e-6),
    (4, 4, 1.0, 1.0, 0.0), (6, 4, 1.0, 1.0, 1e-6),
])
def test_make_field_rejects(args):
    with pytest.raises(ValueError):
        make_field(*args)


def test_field_is_read_only():
    f = make_field(4, 4, 1.0, 1.0, 1e-6)
    with pytest.raises(ValueError):
        f.amplitudes[0, 0] = 1


def test_uniform_power():
    f = unit(make_field(64, 64, 0.01, 0.01, 638e-9))
    assert total_power(f) == pytest.approx(1e-4, rel=1e-12)


def test_dual_pinhole_power_matches_disk_area():
    geom = ExperimentGeometry()
    f = unit(make_field(1024, 1024, 1e-3, 1e-3, geom.wavelength))
    r = geom.pinhole_diameter / 2
    exact = 2 * np.pi * r ** 2
    # binary edge error is bounded by the perimeter band one pitch wide
    p = total_power(apply_dual_pinhole(f, geom))
    assert abs(p - exact) <= 2 * (2 * np.pi * r) * f.dx
    # area mode: the amplitude integral (on-axis far field) carries the area
    masked = apply_dual_pinhole(f, geom, edge="area")
    area = np.sum(masked.amplitudes).real * f.dx * f.dy
    assert area == pytest.approx(exact, rel=1e-3)


def test_profile_of_zero_field_is_zero():
    f = make_field(32, 16, 1e-3, 1e-3, 1e-6)
    for axis in "xy":
        p = extract_profile(f, axis, 0.0)
        assert not np.any(p.values)


def test_profile_coordinates_centered_and_uniform():
    f = make_field(64, 64, 1e-3, 1e-3, 1e-6)
    p = extract_profile(f, "x", 0.0)
    d = np.diff(p.coordinates)
    assert np.all(d > 0) and np.allclose(d, d[0])
    assert p.coordinates[32] == 0.0


def test_cos2_profile_period():
    b = 2.462e3
    f = make_field(4096, 8, 20e-3, 1e-3, 638e-9)
    amp = np.cos(b * f.x)[None, :] * np.ones((8, 1))
    p = extract_profile(f.replace(amp), "x", 0.0)
    # peaks by direct comparison with neighbours
    v = p.values
    peaks = np.nonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    period = np.mean(np.diff(p.coordinates[peaks]))
    assert period == pytest.approx(np.pi / b, rel=2e-3)


def test_profile_values_are_intensity_samples():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(16, 32)) + 1j * rng.normal(size=(16, 32))
    f = SampledField(a, 1e-5, 2e-5, 1e-6)
    row = extract_profile(f, "x", 3 * 2e-5)
    np.testing.assert_array_equal(row.values, np.abs(a[8 + 3]) ** 2)
    col = extract_profile(f, "y", -2e-5)
    np.testing.assert_array_equal(col.values, np.abs(a[:, 16 - 2]) ** 2)


def test_profile_offset_out_of_range():
    f = make_field(16, 16, 1e-3, 1e-3, 1e-6)
    with pytest.raises(OutOfRangeError):
        extract_profile(f, "x", 0.6e-3)
    with pytest.raises(OutOfRangeError):
        extract_profile(f, "y", -0.51e-3)


def test_profile_csv_round_trip(tmp_path):
    f = make_field_1d(64, 1e-3, 1e-6)
    f = f.replace(np.exp(-(f.x / 1e-4) ** 2)[None, :].astype(complex))
    p = extract_profile(f, "x")
    path = p.to_csv(tmp_path / "p.csv")
    assert path.read_text().splitlines()[0] == "x_m,intensity"
    back = IntensityProfile.from_csv(path)
    np.testing.assert_array_equal(back.values, p.values)
    np.testing.assert_array_equal(back.coordinates, p.coordinates)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 15), st.floats(0.1, 10), st.floats(0.1, 10))
def test_power_additive_for_disjoint_supports(split, s1, s2):
    rng = np.random.default_rng(split)
    a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    left = np.zeros_like(a)
    right = np.zeros_like(a)
    left[:, :split] = s1 * a[:, :split]
    right[:, split:] = s2 * a[:, split:]
    mk = lambda arr: SampledField(arr, 1e-5, 1e-5, 1e-6)
    total = total_power(mk(left) + mk(right))
    assert total == pytest.approx(total_power(mk(left)) + total_power(mk(right)),
                                  rel=1e-12)
