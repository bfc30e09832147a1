"""Smoke tests for the Python bindings."""

import numpy as np
import pytest

import bbinit


def make_scene(frame=100, square=30, seed=7):
    rng = np.random.default_rng(seed)
    img = np.empty((frame, frame, 3), dtype=np.int16)
    img[:, :] = (30, 30, 225)
    lo = (frame - square) // 2
    hi = lo + square
    img[lo:hi, lo:hi] = (225, 30, 30)
    img += rng.integers(-8, 9, img.shape, dtype=np.int16)
    gt = np.zeros((frame, frame), dtype=np.uint8)
    gt[lo:hi, lo:hi] = 1
    pad = 0.05 * square
    bbox = (lo - pad, lo - pad, square + 2 * pad, square + 2 * pad)
    return np.clip(img, 0, 255).astype(np.uint8), bbox, gt


def test_entire_bb_segment():
    img, bbox, gt = make_scene()
    mask = bbinit.segment(img, bbox, "entire-bb")
    assert mask.shape == gt.shape and mask.dtype == np.uint8
    assert bbinit.iou(gt, mask) > 0.7
    assert bbinit.iou_bb(gt, mask, bbox) > 0.75


def test_lbdm_segment_and_matte():
    img, bbox, gt = make_scene()
    params = {"rho_minus": 0.8, "rho_plus": 1.2, "tau": 0.85, "lambda": 1e-2}
    mask = bbinit.segment(img, bbox, "lbdm", params)
    assert bbinit.iou(gt, mask) >= 0.9
    alpha, (x0, y0) = bbinit.matte(img, bbox)
    assert alpha.ndim == 2 and np.isfinite(alpha).all()
    assert 0 <= x0 < img.shape[1] and 0 <= y0 < img.shape[0]


def test_sbbm_determinism():
    img, bbox, _ = make_scene()
    params = {"delta": 0.5, "eta": 0.8}
    a = bbinit.segment(img, bbox, "sbbm", params, seed=3)
    b = bbinit.segment(img, bbox, "sbbm", params, seed=3)
    assert np.array_equal(a, b)


def test_slic0_labels():
    img, _, _ = make_scene()
    labels = bbinit.slic0(img)
    assert labels.shape == img.shape[:2] and labels.dtype == np.int32
    assert labels.min() == 0
    assert 100 <= labels.max() + 1 <= 500


def test_metric_values():
    g = np.zeros((8, 8), np.uint8)
    p = np.zeros((8, 8), np.uint8)
    g[:4], p[2:6] = 1, 1
    assert bbinit.iou(g, p) == pytest.approx(2 / 6)
    assert bbinit.dsc_from_iou(0.5) == pytest.approx(2 / 3)


def test_parse_region_and_lab():
    assert bbinit.parse_region("1,2,3,4") == (1, 2, 3, 4)
    l, a, b = bbinit.srgb_to_lab(255, 255, 255)
    assert l == pytest.approx(100.0, abs=0.1)
    assert a == pytest.approx(0.0, abs=0.1)
    assert b == pytest.approx(0.0, abs=0.1)


def test_exception_mapping():
    img, bbox, _ = make_scene()
    params = {"rho_minus": 0.8, "rho_plus": 1.2, "tau": 0.85, "lambda": 1e-2}
    with pytest.raises(ValueError):
        bbinit.segment(img, bbox, "lbdm", dict(params, tau=0.3))
    with pytest.raises(ValueError):
        bbinit.segment(img, bbox, "no-such-method")
    with pytest.raises(ValueError):
        bbinit.segment(img, (200, 200, 10, 10), "lbdm", params)
    with pytest.raises(ValueError):
        bbinit.iou(np.zeros((4, 4), np.uint8), np.zeros((5, 5), np.uint8))
