import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from risisac.channel import (
    PathlossModel,
    build_link,
    build_r2b,
    build_r2r,
    build_u2r,
    draw_channels,
    draw_gain,
    linear_path_gain,
)
from risisac.geometry import UlaGeometry, UraGeometry, Vec3, ura_steering, ula_steering

PL = PathlossModel()
pos = st.floats(-20, 20, allow_nan=False)


def test_pathloss_validation():
    with pytest.raises(ValueError):
        PathlossModel(pl0_db=0)
    with pytest.raises(ValueError):
        PathlossModel(exp_u2r=1.0)


def test_linear_path_gain_examples():
    assert linear_path_gain(1.0, 2.7, PL) == pytest.approx(1e-3)
    assert linear_path_gain(10.0, 2.0, PathlossModel(exp_u2r=2.0)) == pytest.approx(1e-5)
    assert linear_path_gain(5.0, 2.2, PL) == pytest.approx(1e-3 * 5 ** -2.2)
    with pytest.raises(ValueError, match="inside reference distance"):
        linear_path_gain(0.5, 2.2, PL)


def test_draw_gain_modulus_and_determinism():
    g1 = draw_gain(1.0, 2.2, PL, np.random.default_rng(7))
    g2 = draw_gain(1.0, 2.2, PL, np.random.default_rng(7))
    assert abs(g1) == pytest.approx(math.sqrt(1e-3))
    assert g1 == g2


def test_draw_gain_phase_uniform():
    rng = np.random.default_rng(3)
    z = np.array([draw_gain(1.0, 2.2, PL, rng) for _ in range(10_000)]) / math.sqrt(1e-3)
    # mean of unit phasors has std 1/sqrt(2n) per component
    assert abs(z.mean()) < 3 * math.sqrt(1 / 10_000)


def test_u2r_boresight_all_ones():
    h = build_u2r(UlaGeometry(4), UraGeometry(3, 3), Vec3(5, 0, 0), Vec3(0, 0, 0), 1.0)
    np.testing.assert_allclose(h.matrix, np.ones((9, 4)))


def test_u2r_column_space():
    g = UraGeometry(4, 4)
    h = build_u2r(UlaGeometry(4), g, Vec3(2 * math.sqrt(3), -2, 0), Vec3(0, 0, 0), 0.3)
    b = ura_steering(-math.pi / 2, 0.0, g)
    resid = h.matrix - np.outer(b, b.conj() @ h.matrix) / g.size
    assert np.linalg.norm(resid) < 1e-10


def test_r2b_boresight_and_shape():
    h = build_r2b(UlaGeometry(4), UraGeometry(2, 3), Vec3(10, 0, 0), Vec3(0, 0, 0), 1.0)
    assert h.shape == (4, 6)
    np.testing.assert_allclose(h.matrix, np.ones((4, 6)))


def test_r2b_row_space():
    h = build_r2b(UlaGeometry(4), UraGeometry(3, 3), Vec3(0, 0, 0), Vec3(2 * math.sqrt(3), 2, 0), 1.0)
    a = ula_steering(math.pi / 2, 4)
    resid = h.matrix - np.outer(a, a.conj() @ h.matrix) / 4
    assert np.linalg.norm(resid) < 1e-10


def test_r2r_boresight_and_shape():
    h = build_r2r(UraGeometry(2, 2), UraGeometry(3, 3), Vec3(0, 0, 0), Vec3(6, 0, 0), 1.0)
    assert h.shape == (9, 4)
    np.testing.assert_allclose(h.matrix, np.ones((9, 4)))


@given(pos, pos, pos, pos, pos, pos, st.floats(0.01, 2.0))
def test_rank_one_and_norm(x1, y1, z1, x2, y2, z2, mag):
    a, b = Vec3(x1, y1, z1), Vec3(x2, y2, z2)
    if a.distance_to(b) < 1e-3:
        return
    gain = mag * np.exp(0.7j)
    for h in (
        build_u2r(UlaGeometry(4), UraGeometry(3, 2), a, b, gain),
        build_r2b(UlaGeometry(5), UraGeometry(2, 2), a, b, gain),
        build_r2r(UraGeometry(2, 3), UraGeometry(3, 3), a, b, gain),
    ):
        s = np.linalg.svd(h.matrix, compute_uv=False)
        assert s[1] < 1e-10 * s[0]
        rows, cols = h.shape
        assert np.linalg.norm(h.matrix) == pytest.approx(mag * math.sqrt(rows * cols), rel=1e-10)


@given(pos, pos, pos, pos, pos, pos)
def test_reciprocity(x1, y1, z1, x2, y2, z2):
    a, b = Vec3(x1, y1, z1), Vec3(x2, y2, z2)
    if a.distance_to(b) < 1e-3:
        return
    ga, gb = UraGeometry(2, 3), UlaGeometry(4)
    fwd = build_link(ga, gb, a, b, 0.5)
    back = build_link(gb, ga, b, a, 0.5)
    np.testing.assert_allclose(back.matrix, fwd.matrix.conj().T, atol=1e-12)


def _dep(d_s2s=5.0):
    from risisac.harness import ScenarioConfig

    return ScenarioConfig(d_s2s=d_s2s).deployment()


def test_draw_channels_shapes_and_gains():
    dep = _dep()
    ue = Vec3(3.46, -2, 0)
    ch = draw_channels(dep, ue, np.random.default_rng(0))
    assert ch.n_bs == 16 and ch.n_ue == 8 and ch.m1 == 400
    assert ch.r2r[0].shape == (36, 400)
    assert abs(ch.u2r[0].gain) ** 2 == pytest.approx(linear_path_gain(ue.distance_to(dep.ris_pos), 2.2, PL))
    assert abs(ch.r2b.gain) ** 2 == pytest.approx(linear_path_gain(50.0, 2.3, PL))


def test_close_panels_use_reference_distance():
    ch = draw_channels(_dep(0.5), Vec3(4, 0, 0), np.random.default_rng(0))
    assert abs(ch.r2r[0].gain) ** 2 == pytest.approx(1e-3)
