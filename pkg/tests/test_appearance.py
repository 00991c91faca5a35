import math

import numpy as np
import pytest

from ghosttrack.appearance import (
    appearance_cost,
    cosine_distance,
    cosine_distance_matrix,
    normalize,
    proxy_distance_mean,
    proxy_feature,
    renormalize_frame,
)
from ghosttrack.core import (
    BoundingBox,
    Detection,
    ProxyMethod,
    Track,
    TrackStatus,
    TrackerConfig,
)
from ghosttrack.errors import (
    DimensionMismatch,
    EmptyGallery,
    MissingEmaState,
    MissingEmbedding,
    ZeroVector,
)


def e(i, dim=4):
    v = np.zeros(dim)
    v[i] = 1.0
    return v


# -- cosine distance -----------------------------------------------------------

def test_cosine_identical():
    f = normalize(np.array([1.0, 2.0, 3.0]))
    assert cosine_distance(f, f) == pytest.approx(0.0, abs=1e-12)


def test_cosine_orthogonal_and_antiparallel():
    assert cosine_distance(e(0), e(1)) == pytest.approx(1.0, abs=1e-12)
    f = normalize(np.array([0.3, -0.4, 1.0]))
    assert cosine_distance(f, -f) == pytest.approx(2.0, abs=1e-12)


def test_cosine_scale_invariant():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = rng.normal(size=8)
        b = rng.normal(size=8)
        s, t = rng.uniform(0.1, 100, size=2)
        assert cosine_distance(s * a, t * b) == pytest.approx(
            cosine_distance(a, b), abs=1e-9
        )


def test_cosine_zero_vector():
    with pytest.raises(ZeroVector):
        cosine_distance(np.zeros(3), e(0, 3))


# -- proxy distances -----------------------------------------------------------

def test_proxy_mean_single_identical():
    f = e(0)
    assert proxy_distance_mean(f, [f]) == pytest.approx(0.0, abs=1e-12)


def test_proxy_mean_opposite_pair():
    f = e(0)
    assert proxy_distance_mean(f, [f, -f]) == pytest.approx(1.0, abs=1e-12)


def test_proxy_mean_orthogonal_pair():
    assert proxy_distance_mean(e(0), [e(0), e(1)]) == pytest.approx(0.5, abs=1e-12)


def test_proxy_mean_empty():
    with pytest.raises(EmptyGallery):
        proxy_distance_mean(e(0), [])


def test_proxy_mean_two_expansions_agree():
    # 1/N * sum d(f, g) == 1 - 1/N * sum f.g for unit vectors
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = rng.integers(1, 21)
        gallery = [normalize(rng.normal(size=32)) for _ in range(n)]
        query = normalize(rng.normal(size=32))
        direct = proxy_distance_mean(query, gallery)
        dot_form = 1.0 - np.mean([query @ g for g in gallery])
        assert abs(direct - dot_form) < 1e-12


def test_mean_feature_relation_to_mean_distance():
    # 1 - d_meanfeat == (1 - d_meandist) * N / ||sum g||
    rng = np.random.default_rng(13)
    for _ in range(200):
        n = int(rng.integers(1, 21))
        gallery = [normalize(rng.normal(size=32)) for _ in range(n)]
        query = normalize(rng.normal(size=32))
        d_md = proxy_distance_mean(query, gallery)
        d_mf = cosine_distance(query, proxy_feature(gallery, ProxyMethod.MEAN_FEATURE))
        norm_sum = np.linalg.norm(np.sum(gallery, axis=0))
        assert (1 - d_mf) == pytest.approx((1 - d_md) * n / norm_sum, abs=1e-9)


# -- proxy features ------------------------------------------------------------

def test_mean_of_identical_vectors():
    f = normalize(np.array([1.0, 2.0, 2.0]))
    out = proxy_feature([f, f], ProxyMethod.MEAN_FEATURE)
    np.testing.assert_allclose(out, f, atol=1e-12)


def test_ema_fixed_point():
    f = normalize(np.array([3.0, 4.0]))
    out = proxy_feature([f], ProxyMethod.EMA_FEATURE, ema_state=f, alpha=0.9)
    np.testing.assert_allclose(out, f, atol=1e-12)


def test_ema_fold_order():
    a, b = e(0), e(1)
    out = proxy_feature([a, b], ProxyMethod.EMA_FEATURE, alpha=0.9)
    expected = normalize(0.9 * a + 0.1 * b)
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_ema_missing_state():
    with pytest.raises(MissingEmaState):
        proxy_feature([], ProxyMethod.EMA_FEATURE)


def test_median_per_dimension():
    gallery = [np.array([0.0, 1.0]), np.array([0.0, 3.0]), np.array([0.0, 2.0])]
    out = proxy_feature(gallery, ProxyMethod.MEDIAN_FEATURE)
    np.testing.assert_allclose(out, normalize(np.array([0.0, 2.0])), atol=1e-12)


def test_mode_majority_and_tie():
    gallery = [np.array([1.0, 5.0]), np.array([1.0, 7.0]), np.array([2.0, 7.0])]
    out = proxy_feature(gallery, ProxyMethod.MODE_FEATURE)
    np.testing.assert_allclose(out, normalize(np.array([1.0, 7.0])), atol=1e-9)
    # two-way tie resolves toward the smaller value
    tied = [np.array([1.0, 2.0]), np.array([3.0, 2.0])]
    out = proxy_feature(tied, ProxyMethod.MODE_FEATURE)
    np.testing.assert_allclose(out, normalize(np.array([1.0, 2.0])), atol=1e-9)


def test_feature_proxy_empty_gallery():
    with pytest.raises(EmptyGallery):
        proxy_feature([], ProxyMethod.MEAN_FEATURE)


# -- per-frame renormalization ---------------------------------------------------

def test_single_detection_passthrough():
    feats = np.array([[1.0], [2.0], [3.0]])
    out = renormalize_frame(feats)
    np.testing.assert_array_equal(out, feats)


def test_batch_mean_zero_and_unit_variance():
    rng = np.random.default_rng(7)
    feats = rng.normal(3.0, 2.0, size=(16, 48))  # D x M
    out = renormalize_frame(feats, eps=1e-5)
    assert np.max(np.abs(out.mean(axis=1))) < 1e-9
    sigma = feats.var(axis=1)
    np.testing.assert_allclose(out.var(axis=1), sigma / (sigma + 1e-5), atol=1e-9)


def test_constant_dimension_maps_to_zero():
    feats = np.vstack([np.full(5, 2.5), np.arange(5.0)])
    out = renormalize_frame(feats, eps=1e-5)
    np.testing.assert_allclose(out[0], 0.0, atol=1e-12)


def test_gamma_beta_applied():
    feats = np.array([[0.0, 2.0], [1.0, 3.0]])
    out = renormalize_frame(feats, gamma=np.array([2.0, 1.0]), beta=np.array([0.5, 0.0]))
    # dim 0: values (0,2), mean 1, var 1 -> (x-1)/sqrt(1+eps) * 2 + 0.5
    assert out[0, 0] == pytest.approx(2 * (-1) / math.sqrt(1 + 1e-5) + 0.5, abs=1e-12)


def test_permutation_equivariance():
    rng = np.random.default_rng(9)
    feats = rng.normal(size=(8, 12))
    perm = rng.permutation(12)
    out = renormalize_frame(feats)
    out_perm = renormalize_frame(feats[:, perm])
    np.testing.assert_allclose(out_perm, out[:, perm], atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        renormalize_frame(np.zeros((4, 3)), gamma=np.ones(5))
    with pytest.raises(DimensionMismatch):
        renormalize_frame(np.zeros(4))


# -- appearance cost against tracks ----------------------------------------------

def _track_with(embeddings, active=True):
    box = BoundingBox(0, 0, 10, 10)
    track = Track(id=1, detections=[Detection(frame=1, box=box)])
    track.embeddings = list(embeddings)
    track.status = TrackStatus.active() if active else TrackStatus.inactive(1)
    return track


def test_active_track_uses_last_embedding():
    f = normalize(np.array([1.0, 1.0, 0.0, 0.0]))
    track = _track_with([e(1), f], active=True)
    det = Detection(frame=2, box=BoundingBox(0, 0, 10, 10), embedding=f)
    cfg = TrackerConfig()
    assert appearance_cost(track, det, cfg) == pytest.approx(0.0, abs=1e-12)


def test_inactive_mean_of_distances():
    track = _track_with([e(0), e(1)], active=False)
    det = Detection(frame=5, box=BoundingBox(0, 0, 10, 10), embedding=e(0))
    cfg = TrackerConfig(proxy_method=ProxyMethod.MEAN_OF_DISTANCES)
    assert appearance_cost(track, det, cfg) == pytest.approx(0.5, abs=1e-12)


def test_inactive_mean_feature():
    track = _track_with([e(0), e(1)], active=False)
    det = Detection(frame=5, box=BoundingBox(0, 0, 10, 10), embedding=e(0))
    cfg = TrackerConfig(proxy_method=ProxyMethod.MEAN_FEATURE)
    assert appearance_cost(track, det, cfg) == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-9)


def test_missing_embedding():
    track = _track_with([e(0)])
    det = Detection(frame=2, box=BoundingBox(0, 0, 10, 10))
    with pytest.raises(MissingEmbedding):
        appearance_cost(track, det, TrackerConfig())


def test_cosine_matrix_matches_scalar():
    rng = np.random.default_rng(21)
    q = rng.normal(size=(4, 16))
    g = rng.normal(size=(6, 16))
    mat = cosine_distance_matrix(q, g)
    for i in range(4):
        for j in range(6):
            assert mat[i, j] == pytest.approx(cosine_distance(q[i], g[j]), abs=1e-12)
