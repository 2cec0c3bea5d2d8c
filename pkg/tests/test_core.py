import numpy as np
import pytest

from lfsr.core import LightField, ViewIndex, extract_epi, get_view, round_half_away, to_uint8
from lfsr.errors import DimensionError, EmptySlotError, ViewIndexError
from lfsr.synthetic import Layer, SyntheticSceneSpec, generate_synthetic_lf

from .helpers import random_view


@pytest.fixture
def random_lf(rng):
    data = rng.integers(0, 256, size=(9, 9, 12, 14, 3), dtype=np.uint8)
    return data, LightField.from_array(data)


def test_get_view_returns_stored_bytes(random_lf):
    data, lf = random_lf
    assert np.array_equal(get_view(lf, (0, 0)), data[0, 0])
    for u in range(9):
        for v in range(9):
            assert get_view(lf, ViewIndex(u, v)).tobytes() == data[u, v].tobytes()


def test_stored_views_are_private_and_read_only(rng):
    img = random_view(rng)
    lf = LightField(2, 2, {(0, 0): img})
    img[:] = 0
    assert lf[0, 0].any()
    with pytest.raises(ValueError):
        lf[0, 0][0, 0, 0] = 1


def test_get_view_out_of_range(random_lf):
    _, lf = random_lf
    with pytest.raises(ViewIndexError):
        get_view(lf, (9, 0))
    with pytest.raises(IndexError):
        get_view(lf, (0, -1))


def test_get_view_empty_slot(rng):
    corners = {(u, v): random_view(rng) for u in (0, 8) for v in (0, 8)}
    lf = LightField(9, 9, corners)
    with pytest.raises(EmptySlotError):
        get_view(lf, (4, 4))
    assert not lf.is_complete
    assert len(lf.empty_slots()) == 77


def test_rejects_mixed_shapes_and_tiny_grids(rng):
    with pytest.raises(DimensionError):
        LightField(2, 2, {(0, 0): random_view(rng, 8, 8), (0, 1): random_view(rng, 8, 9)})
    with pytest.raises(DimensionError):
        LightField(1, 5)
    with pytest.raises(DimensionError):
        LightField(2, 2, {(0, 0): np.zeros((4, 4, 4), np.uint8)})


def test_transpose_swaps_angular_and_spatial_axes(random_lf):
    data, lf = random_lf
    t = lf.transpose()
    assert np.array_equal(t[3, 5], data[5, 3].transpose(1, 0, 2))
    assert t.transpose() == lf


def test_round_half_away():
    x = np.array([0.5, 1.5, 2.5, -0.5, -1.5, 0.49999])
    assert round_half_away(x).tolist() == [1, 2, 3, -1, -2, 0]
    assert to_uint8(np.array([-3.0, 255.5, 127.5])).tolist() == [0, 255, 128]


def test_epi_shape(random_lf):
    _, lf = random_lf
    epi = extract_epi(lf, "horizontal", 4, 10)
    assert epi.pixels.shape == (9, 14, 3)
    epi = extract_epi(lf, "vertical", 2, 13)
    assert epi.pixels.shape == (9, 12, 3)


def test_epi_rows_are_view_rows(random_lf):
    data, lf = random_lf
    epi = extract_epi(lf, "horizontal", 3, 7)
    for k in range(9):
        assert np.array_equal(epi.pixels[k], data[3, k, 7])
    epi = extract_epi(lf, "vertical", 6, 2)
    for k in range(9):
        assert np.array_equal(epi.pixels[k], data[k, 6, :, 2])


def test_epi_reassembly_reproduces_views(random_lf):
    data, lf = random_lf
    for u in range(9):
        stack = np.stack([extract_epi(lf, "horizontal", u, y).pixels for y in range(12)])
        # stack is (y, v, x, c); views are (v, y, x, c)
        assert np.array_equal(stack.transpose(1, 0, 2, 3), data[u])


def test_epi_zero_disparity_is_constant_along_angle():
    scene = SyntheticSceneSpec([Layer(0, {"kind": "noise"})], seed=3)
    lf = generate_synthetic_lf(scene, 9, 9, 16, 16)
    for y in (0, 7, 15):
        px = extract_epi(lf, "horizontal", 4, y).pixels
        assert (px == px[0]).all()
        px = extract_epi(lf, "vertical", 2, y).pixels
        assert (px == px[0]).all()


def _rising_edges(row):
    """Columns x where the dark half ends and the bright half begins."""
    lum = row.astype(int).sum(axis=-1)
    bright = lum > lum.mean()
    return [x for x in range(len(row)) if bright[x] and not bright[x - 1]]


def test_epi_slope_matches_disparity():
    W = 64
    scene = SyntheticSceneSpec([Layer(1, {"kind": "stripes", "period": W, "duty": 0.5})])
    lf = generate_synthetic_lf(scene, 9, 9, W, 16)
    epi = extract_epi(lf, "horizontal", 4, 5).pixels
    # stripe edge sits at x = W/2 in the central view and moves +1 px per step
    edges = [_rising_edges(epi[k]) for k in range(9)]
    assert edges == [[W // 2 + (k - 4)] for k in range(9)]
    slopes = np.diff([e[0] for e in edges])
    assert (slopes == 1).all()


def test_epi_errors(random_lf, rng):
    _, lf = random_lf
    with pytest.raises(ViewIndexError):
        extract_epi(lf, "horizontal", 9, 0)
    with pytest.raises(ViewIndexError):
        extract_epi(lf, "horizontal", 0, 12)
    with pytest.raises(ValueError):
        extract_epi(lf, "diagonal", 0, 0)
    sparse = lf.restricted([(0, v) for v in range(8)])
    with pytest.raises(EmptySlotError):
        extract_epi(sparse, "horizontal", 0, 0)
