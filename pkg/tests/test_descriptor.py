import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from keypoint_ad.descriptor import (
    LabeledDataset,
    apply_normalizer,
    build_vector,
    fit_normalizer,
    invert_normalizer,
    read_features_csv,
    top_k,
    write_features_csv,
)
from keypoint_ad.detector import Keypoint
from oracles import two_pass_mean_std


def kp(x=0.0, y=0.0, scale=1.0, response=1.0):
    return Keypoint(x=x, y=y, scale=scale, response=response, detector="dog")


keypoint_lists = st.lists(
    st.builds(
        kp,
        x=st.floats(0, 100),
        y=st.floats(0, 100),
        scale=st.floats(0.1, 50),
        response=st.floats(0, 10),
    ),
    min_size=0,
    max_size=20,
)


# ---------------------------------------------------------------------------
# top_k / build_vector


def test_top_k_returns_all_when_fewer():
    kps = [kp(response=0.3), kp(response=0.9), kp(response=0.5)]
    out = top_k(kps, 5)
    assert [k.response for k in out] == [0.9, 0.5, 0.3]


def test_top_k_tie_breaks_by_scale():
    kps = [
        kp(scale=1.0, response=2.0),
        kp(scale=3.0, response=9.0),
        kp(scale=7.0, response=9.0),
        kp(scale=2.0, response=1.0),
    ]
    out = top_k(kps, 2)
    assert [k.response for k in out] == [9.0, 9.0]
    assert [k.scale for k in out] == [7.0, 3.0]


def test_top_k_rejects_bad_k():
    with pytest.raises(ValueError):
        top_k([], 0)


@settings(max_examples=200)
@given(keypoint_lists)
def test_top_k_matches_full_sort_truncation(kps):
    full = sorted(kps, key=lambda k: (-k.response, -k.scale, k.y, k.x))
    assert top_k(kps, 5) == full[:5]


def test_build_vector_empty_list_pads_to_zero():
    assert np.array_equal(build_vector([], 5), np.zeros(10))


def test_build_vector_single_keypoint():
    vec = build_vector([kp(scale=3.2, response=0.07)], 5)
    assert vec.tolist() == [3.2, 0.07, 0, 0, 0, 0, 0, 0, 0, 0]


def test_build_vector_truncates_to_strongest():
    kps = [kp(scale=float(i + 1), response=float(i)) for i in range(7)]
    vec = build_vector(kps, 5)
    expected = []
    for k in sorted(kps, key=lambda k: -k.response)[:5]:
        expected += [k.scale, k.response]
    assert vec.tolist() == expected


@settings(max_examples=200)
@given(keypoint_lists, st.randoms(use_true_random=False))
def test_build_vector_contract(kps, rnd):
    vec = build_vector(kps, 5)
    assert vec.shape == (10,)
    # tail-only zero padding: once a (0,0) pair appears, everything after is zero
    pairs = vec.reshape(5, 2)
    seen_pad = False
    for scale, response in pairs:
        if seen_pad:
            assert scale == 0.0 and response == 0.0
        if scale == 0.0 and response == 0.0:
            seen_pad = True
    # permutation invariance
    shuffled = list(kps)
    rnd.shuffle(shuffled)
    assert np.array_equal(build_vector(shuffled, 5), vec)
    # responses non-increasing over the filled prefix
    filled = pairs[: len(kps)] if len(kps) < 5 else pairs
    responses = [r for s, r in filled if not (s == 0.0 and r == 0.0)]
    assert responses == sorted(responses, reverse=True)


# ---------------------------------------------------------------------------
# normalizer


def test_fit_normalizer_two_point_column():
    norm = fit_normalizer(np.array([[1.0], [3.0]]))
    assert norm.means[0] == pytest.approx(2.0)
    assert norm.stds[0] == pytest.approx(1.0)
    assert not norm.constant[0]


def test_fit_normalizer_constant_column_flagged():
    norm = fit_normalizer(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]))
    assert norm.means[0] == pytest.approx(5.0)
    assert norm.stds[0] == 1.0
    assert norm.constant[0]
    assert not norm.constant[1]


def test_fit_normalizer_matches_two_pass_oracle():
    rng = np.random.default_rng(9)
    matrix = rng.normal(size=(50, 10)) * rng.uniform(0.1, 5.0, size=10)
    norm = fit_normalizer(matrix)
    means, stds = two_pass_mean_std(matrix)
    np.testing.assert_allclose(norm.means, means, atol=1e-12)
    np.testing.assert_allclose(norm.stds, stds, atol=1e-12)


def test_fit_normalizer_rejects_degenerate_input():
    with pytest.raises(ValueError):
        fit_normalizer(np.array([[1.0, 2.0]]))
    with pytest.raises(ValueError):
        fit_normalizer(np.array([[1.0], [np.nan]]))


def test_apply_normalizer_self_normalization():
    rng = np.random.default_rng(10)
    matrix = rng.normal(loc=3.0, scale=2.0, size=(40, 6))
    norm = fit_normalizer(matrix)
    z = apply_normalizer(norm, matrix)
    assert np.max(np.abs(z.mean(axis=0))) < 1e-10
    assert np.max(np.abs(z.std(axis=0) - 1.0)) < 1e-10


def test_apply_normalizer_zero_row():
    norm = fit_normalizer(np.array([[1.0, 10.0], [3.0, 30.0], [5.0, 20.0]]))
    row = apply_normalizer(norm, np.zeros((1, 2)))[0]
    np.testing.assert_allclose(row, -norm.means / norm.stds, atol=1e-15)


def test_apply_normalizer_held_out_rows():
    rng = np.random.default_rng(11)
    train = rng.normal(size=(30, 4))
    held = rng.normal(size=(7, 4))
    norm = fit_normalizer(train)
    z = apply_normalizer(norm, held)
    np.testing.assert_allclose(z, (held - norm.means) / norm.stds, atol=1e-12)


def test_apply_normalizer_dimension_mismatch():
    norm = fit_normalizer(np.zeros((3, 4)) + np.arange(3)[:, None])
    with pytest.raises(ValueError):
        apply_normalizer(norm, np.zeros((2, 5)))


@settings(max_examples=100)
@given(st.integers(2, 20), st.integers(1, 8), st.integers(0, 10_000))
def test_normalizer_round_trip(n, d, seed):
    rng = np.random.default_rng(seed)
    matrix = rng.normal(scale=rng.uniform(0.5, 20.0), size=(n, d))
    norm = fit_normalizer(matrix)
    back = invert_normalizer(norm, apply_normalizer(norm, matrix))
    np.testing.assert_allclose(back, matrix, atol=1e-10)


# ---------------------------------------------------------------------------
# labeled dataset + CSV


def test_labeled_dataset_validation():
    with pytest.raises(ValueError):
        LabeledDataset(matrix=np.zeros((2, 4)), labels=np.array(["OK"], dtype=object))
    with pytest.raises(ValueError):
        LabeledDataset(matrix=np.full((2, 4), np.inf), labels=np.array(["OK", "NOK"], dtype=object))
    with pytest.raises(ValueError):
        LabeledDataset(matrix=np.zeros((1, 4)), labels=np.array(["weird"], dtype=object))


def test_features_csv_round_trip(tmp_path):
    rng = np.random.default_rng(12)
    ds = LabeledDataset(
        matrix=rng.random((6, 10)),
        labels=np.array(["OK", "NOK", "OK", "OK", "NOK", "OK"], dtype=object),
        sample_ids=[f"img_{i}" for i in range(6)],
    )
    path = tmp_path / "features.csv"
    write_features_csv(path, ds)
    header = path.read_text().splitlines()[0]
    assert header == "id,label,s1,r1,s2,r2,s3,r3,s4,r4,s5,r5"
    back = read_features_csv(path)
    assert back.sample_ids == ds.sample_ids
    assert list(back.labels) == list(ds.labels)
    np.testing.assert_array_equal(back.matrix, ds.matrix)  # repr round-trips exactly
