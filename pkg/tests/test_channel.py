import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riswpt.channel import (AntennaPattern, ChannelTensor, LinkGains, build_channel,
                            cascaded_gain, direct_gain, far_field_distance, pairwise_gain,
                            receive_wave_elementwise, receive_wave_loops, ris_rx_gain, tx_ris_gain)
from riswpt.geometry import Pose, SpatialLink, UvDirection

from .conftest import LAM, make_scene, random_scene


def test_pairwise_gain_examples():
    h = pairwise_gain(LAM, 1, 1, LAM)
    assert abs(h) == pytest.approx(1 / (4 * math.pi))
    assert h.imag == pytest.approx(0, abs=1e-15)
    assert abs(pairwise_gain(2.0, 1, 1, LAM)) == pytest.approx(abs(pairwise_gain(1.0, 1, 1, LAM)) / 2)
    assert np.angle(pairwise_gain(LAM / 2, 1, 1, LAM)) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        pairwise_gain(0.0, 1, 1, LAM)


def test_far_field_distance_examples():
    link = SpatialLink(2.0, UvDirection(1 / math.sqrt(2), 0), UvDirection(0, 0))
    assert far_field_distance(link, [0, 0], [0, 0]) == 2.0
    assert far_field_distance(link, [0.0129, 0], [0, 0]) == pytest.approx(2 - 0.00912, abs=1e-5)
    bore = SpatialLink(3.0, UvDirection(0, 0), UvDirection(0, 0))
    assert far_field_distance(bore, [0.1, -0.2], [0.3, 0.3]) == 3.0


def test_link_gain_identities():
    link = SpatialLink(1.0, UvDirection(0.3, -0.1), UvDirection(-0.2, 0.4))
    h = tx_ris_gain(link, [[0, 0]], [[0, 0]], 0.0517)
    assert h[0, 0] == pytest.approx(pairwise_gain(1.0, 1, 1, 0.0517))
    assert abs(h[0, 0]) == pytest.approx(0.0517 / (4 * math.pi), rel=1e-12)
    ua = np.array([[0.01, -0.02], [0.03, 0.0]])
    ub = np.array([[0.0, 0.02], [-0.01, 0.01], [0.02, 0.02]])
    h = ris_rx_gain(link, ua, ub, LAM)
    d = far_field_distance(link, ua[:, None, :], ub[None, :, :])
    # amplitude frozen at the center distance, phase from the linearized distance
    expected = LAM / (4 * math.pi * link.r) * np.exp(-2j * math.pi * d / LAM)
    np.testing.assert_allclose(h, expected, rtol=1e-12)


def test_cascade():
    h1, h2 = 0.3 * np.exp(0.4j), 0.2 * np.exp(-1.1j)
    assert cascaded_gain(h1, 0, h2) == 0
    g = cascaded_gain(h1, np.exp(0.7j), h2)
    assert abs(g) == pytest.approx(0.06)
    assert np.angle(g) == pytest.approx(0.4 + 0.7 - 1.1)


def test_direct_gain():
    link = SpatialLink(2.5, UvDirection(0, 0), UvDirection(0, 0))
    assert np.all(direct_gain(link, [[0, 0]], [[0, 0]], LAM, blocked=True) == 0)
    assert abs(direct_gain(link, [[0, 0]], [[0, 0]], LAM)[0, 0]) == pytest.approx(LAM / (4 * math.pi * 2.5))
    sym = SpatialLink(2.0, UvDirection(0.2, 0.1), UvDirection(-0.3, 0.05))
    ua, ub = np.array([[0.01, 0.02]]), np.array([[-0.02, 0.01]])
    fwd = direct_gain(sym, ua, ub, LAM)
    back = direct_gain(sym.reversed(), ub, ua, LAM)
    np.testing.assert_allclose(fwd, back.T, rtol=1e-12)


def test_elementwise_examples():
    scene = make_scene(tx=(2, 2), rx=(2, 1), ris=(4, 4), tile=(2, 2))
    ch = build_channel(scene)
    n_tx, k, cells, n_rx = ch.shape
    masks = np.exp(1j * np.random.default_rng(0).uniform(0, 6.28, (k, cells)))
    assert np.all(receive_wave_elementwise(ch, masks, np.zeros(n_tx)) == 0)
    blocked = build_channel(make_scene(tx=(2, 2), rx=(2, 1), ris=(4, 4), tile=(2, 2), direct_blocked=True))
    assert np.all(receive_wave_elementwise(blocked, np.zeros((k, cells)), np.ones(n_tx)) == 0)
    with pytest.raises(ValueError):
        receive_wave_elementwise(ch, masks, np.ones(n_tx + 1))
    with pytest.raises(ValueError):
        receive_wave_elementwise(ch, masks[:, :1], np.ones(n_tx))


def test_two_path_toy():
    scene = make_scene(tx=(1, 1), rx=(1, 1), ris=(1, 1), tile=(1, 1))
    ch = build_channel(scene)
    g = np.exp(0.3j)
    y = receive_wave_elementwise(ch, np.array([[g]]), np.array([2.0]))
    expected = ch.h_tx_ris[0, 0, 0] * g * ch.h_ris_rx[0, 0, 0] * 2 + ch.h_tx_rx[0, 0] * 2
    assert y[0] == pytest.approx(expected)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_elementwise_matches_loops(seed):
    rng = np.random.default_rng(seed)
    ch = build_channel(random_scene(rng))
    n_tx, k, cells, _ = ch.shape
    masks = np.exp(1j * rng.uniform(0, 2 * np.pi, (k, cells)))
    x = rng.normal(size=n_tx) + 1j * rng.normal(size=n_tx)
    np.testing.assert_allclose(receive_wave_elementwise(ch, masks, x),
                               receive_wave_loops(ch, masks, x), rtol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    ch = build_channel(random_scene(rng))
    n_tx, k, cells, _ = ch.shape
    m1 = rng.normal(size=(k, cells)) + 1j * rng.normal(size=(k, cells))
    m2 = rng.normal(size=(k, cells)) + 1j * rng.normal(size=(k, cells))
    x1, x2 = rng.normal(size=n_tx) + 0j, rng.normal(size=n_tx) + 1j
    a, b = rng.normal(size=2)
    lhs = receive_wave_elementwise(ch, m1, a * x1 + b * x2)
    rhs = a * receive_wave_elementwise(ch, m1, x1) + b * receive_wave_elementwise(ch, m1, x2)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-15)
    # linear in the RIS masks once the direct term is removed
    direct = x1 @ ch.h_tx_rx
    lhs = receive_wave_elementwise(ch, a * m1 + b * m2, x1) - direct
    rhs = a * (receive_wave_elementwise(ch, m1, x1) - direct) + b * (receive_wave_elementwise(ch, m2, x1) - direct)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-15)


def test_reciprocity_single_elements():
    fwd = make_scene(tx_pos=(-0.4, 0.1, 1.5), rx_pos=(0.7, -0.2, 2.0), ris=(4, 4), tile=(2, 2))
    back = make_scene(tx_pos=(0.7, -0.2, 2.0), rx_pos=(-0.4, 0.1, 1.5), ris=(4, 4), tile=(2, 2))
    mask = np.exp(1j * np.random.default_rng(3).uniform(0, 6.28, (4, 4)))
    y1 = receive_wave_elementwise(build_channel(fwd), mask, np.ones(1))
    y2 = receive_wave_elementwise(build_channel(back), mask, np.ones(1))
    assert abs(y1[0]) == pytest.approx(abs(y2[0]), rel=1e-12)


def test_distance_scaling():
    s = 2.0
    a = make_scene(tx_pos=(-0.4, 0.1, 1.5), rx_pos=(0.7, -0.2, 2.0), ris=(1, 1), tile=(1, 1))
    b = make_scene(tx_pos=(-0.8, 0.2, 3.0), rx_pos=(1.4, -0.4, 4.0), ris=(1, 1), tile=(1, 1))
    ca, cb = build_channel(a), build_channel(b)
    tile_a = abs(ca.h_tx_ris[0, 0, 0] * ca.h_ris_rx[0, 0, 0])
    tile_b = abs(cb.h_tx_ris[0, 0, 0] * cb.h_ris_rx[0, 0, 0])
    assert tile_b == pytest.approx(tile_a / s**2)
    assert abs(cb.h_tx_rx[0, 0]) == pytest.approx(abs(ca.h_tx_rx[0, 0]) / s)


def test_blocked_tiles_zero_tx_paths():
    scene = make_scene(ris=(4, 4), tile=(2, 2), blocked_tiles=frozenset({1, 3}))
    ch = build_channel(scene)
    assert np.all(ch.h_tx_ris[:, [1, 3], :] == 0)
    assert np.all(ch.h_tx_ris[:, [0, 2], :] != 0)
    with pytest.raises(IndexError):
        build_channel(make_scene(ris=(4, 4), tile=(2, 2), blocked_tiles=frozenset({9})))


def test_exact_mode_close_to_far_field_for_small_tiles():
    ff = build_channel(make_scene(tx=(2, 2), rx=(2, 2), ris=(2, 2), tile=(2, 2)))
    ex = build_channel(make_scene(tx=(2, 2), rx=(2, 2), ris=(2, 2), tile=(2, 2), exact=True))
    assert np.max(np.abs(ff.h_tx_ris - ex.h_tx_ris)) / np.max(np.abs(ex.h_tx_ris)) < 0.1
    assert ex.frequency == pytest.approx(5.8e9)


def test_antenna_pattern():
    p = AntennaPattern.cosine(2)
    assert p.peak == 6 and p.toward(UvDirection(0, 0)) == 6
    assert p.toward(UvDirection(0.6, 0)) == pytest.approx(6 * 0.64)
    assert AntennaPattern(3.0).toward(UvDirection(0.9, 0)) == 3.0
    with pytest.raises(ValueError):
        AntennaPattern(0.0)
    # pattern gains enter each link through the partner's direction
    gains = LinkGains(AntennaPattern.cosine(1), 1.0, AntennaPattern.cosine(1))
    link = gains.link(Pose.facing([-1, 0, 1], [0, 0, 0]), Pose(np.zeros(3)), "tx", "cell")
    assert link.gain_a == pytest.approx(4.0)
    assert link.gain_b == pytest.approx(4 * math.cos(math.pi / 4))


def test_direct_link_behind_pattern_is_zero():
    # transmitter level with the receiver plane: edge-on direct path
    scene = make_scene(tx_pos=(-1.0, 0.0, 2.0), rx_pos=(0.0, 0.0, 2.0),
                       gains=LinkGains(AntennaPattern.cosine(2), AntennaPattern.cosine(2), 1.0))
    assert np.all(build_channel(scene).h_tx_rx == 0)
    iso = make_scene(tx_pos=(-1.0, 0.0, 2.0), rx_pos=(0.0, 0.0, 2.0))
    assert np.all(build_channel(iso).h_tx_rx != 0)


def test_tensor_shape():
    ch = build_channel(make_scene(tx=(2, 3), rx=(2, 2), ris=(4, 6), tile=(2, 3)))
    assert isinstance(ch, ChannelTensor)
    assert ch.shape == (6, 4, 6, 4)
