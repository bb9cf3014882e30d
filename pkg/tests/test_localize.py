import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from oracles import brute_counts, gaussian_sum
from fsgraph.localize import (
    build_pixel_maps,
    gaussian_kernel,
    mask_to_gray8,
    select_alpha,
    smooth,
    smooth_and_threshold,
    to_gray8,
)
from fsgraph.patching import PatchGeometry, PatchSet, sample_patches


def patch_set(geoms, w, h):
    size = geoms[0][2]
    return PatchSet(tuple(PatchGeometry(*g) for g in geoms), w, h, size, 0.0, size)




def test_full_cover_patch():
    ps = patch_set([(0, 0, 4)], 4, 4)
    m = build_pixel_maps(ps, np.array([1]), 1)
    assert np.all(m.P == 1) and np.all(m.T == 1) and np.all(m.P_norm == 1)


def test_half_overlap_grid_counts():
    ps = sample_patches(np.zeros((64, 64), np.uint8), 16, 0.5)
    T = build_pixel_maps(ps, np.ones(len(ps), int), 1).T
    assert T[0, 0] == T[0, -1] == T[-1, 0] == T[-1, -1] == 1
    assert np.all(T[8:-8, 8:-8] == 4)
    assert T.min() == 1 and T.max() == 4


def test_side_by_side():
    ps = patch_set([(0, 0, 4), (4, 0, 4)], 8, 4)
    pn = build_pixel_maps(ps, np.array([1, 2]), 1).P_norm
    assert np.all(pn[:, :4] == 1) and np.all(pn[:, 4:] == 0)


def test_uncovered_is_zero():
    ps = patch_set([(0, 0, 2)], 5, 5)
    m = build_pixel_maps(ps, np.array([1]), 1)
    assert m.P_norm[4, 4] == 0 and m.T[4, 4] == 0
    assert smooth_and_threshold(m, window=3, thresh=0.0)[4, 4] == 0


def test_rasterization_vs_brute_force(rng):
    for _ in range(100):
        w, h = rng.integers(4, 12, 2)
        size = int(rng.integers(1, min(w, h) + 1))
        count = int(rng.integers(1, 7))
        geoms = [(int(rng.integers(0, w - size + 1)), int(rng.integers(0, h - size + 1)), size) for _ in range(count)]
        labels = rng.integers(1, 3, count)
        m = build_pixel_maps(patch_set(geoms, w, h), labels, 1)
        P, T = brute_counts(geoms, labels, 1, w, h)
        assert np.array_equal(m.P, P) and np.array_equal(m.T, T)


@pytest.mark.parametrize("labels, alpha", [((1, 1, 1, 2), 2), ((2, 2, 1, 1), 2), ((1, 2, 2, 2), 1)])
def test_select_alpha(labels, alpha):
    assert select_alpha(np.array(labels)) == alpha


def test_select_alpha_needs_two():
    with pytest.raises(ValueError):
        select_alpha(np.array([1, 2, 3]))


def test_kernel():
    g = gaussian_kernel(32)
    assert g.size == 33 and g.sum() == pytest.approx(1.0)
    assert g[16] == g.max()
    assert np.allclose(g, g[::-1])


def test_constant_invariance():
    v = np.full((40, 40), 0.37)
    assert np.all(smooth(v, 9) == 0.37)
    assert np.all(smooth_and_threshold(v, 9, thresh=0.37) == 1)
    assert np.all(smooth_and_threshold(v, 9, thresh=0.38) == 0)


def test_zero_threshold_marks_everything(rng):
    assert np.all(smooth_and_threshold(rng.random((20, 20)), 5, thresh=0.0) == 1)


def test_step_midpoint():
    v = np.zeros((64, 64))
    v[:, :32] = 1.0
    sm = smooth(v, 33, 8.0)
    mid = sm[32, 31:33]
    assert mid.mean() == pytest.approx(0.5, abs=0.02)
    # continuous Gaussian CDF at half a pixel from the edge
    assert mid[0] == pytest.approx(norm.cdf(0.5 / 8.0), abs=0.02)
    assert mid[1] == pytest.approx(norm.sf(0.5 / 8.0), abs=0.02)


def test_smooth_matches_gaussian_sum(rng):
    v = rng.random((14, 11))
    assert np.allclose(smooth(v, 6, 1.7), gaussian_sum(v, 6, 1.7), atol=1e-12)


def test_window_too_large():
    with pytest.raises(ValueError):
        smooth(np.zeros((10, 10)), 32)


def test_gray8():
    assert to_gray8(np.array([0.0, 0.5, 1.0, 1 / 255 * 0.5])).tolist() == [0, 128, 255, 1]
    assert mask_to_gray8(np.array([0, 1])).tolist() == [0, 255]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_alpha_swap_is_complement(seed):
    rng = np.random.default_rng(seed)
    ps = sample_patches(np.zeros((24, 24), np.uint8), 8, float(rng.choice([0.0, 0.5, 0.75])))
    labels = rng.integers(1, 3, len(ps))
    a = build_pixel_maps(ps, labels, 1).P_norm
    b = build_pixel_maps(ps, labels, 2).P_norm
    assert np.allclose(a + b, 1.0)
    sa, sb = smooth(a, 5), smooth(b, 5)
    assert np.allclose(sa + sb, 1.0)
    assert np.all((sa >= 0) & (sa <= 1))
