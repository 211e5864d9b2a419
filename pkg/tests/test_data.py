import numpy as np
import pytest

from adflsim.data import (ClassHistogram, dirichlet_partition, emd, emd_matrix,
                          class_mean_vertices, histograms_to_csv,
                          iid_exact_partition, synth_dataset)


def hist(*counts):
    return ClassHistogram(np.array(counts, dtype=np.int64))


def test_histogram_rejects_negative_counts():
    with pytest.raises(ValueError):
        hist(3, -1)


def test_partition_single_worker_gets_everything():
    counts = np.array([10, 20, 30])
    parts = dirichlet_partition(counts, 1, phi=0.4, rng=np.random.default_rng(0))
    assert len(parts) == 1
    assert np.array_equal(parts[0].counts, counts)


def test_partition_rejects_nonpositive_phi():
    with pytest.raises(ValueError):
        dirichlet_partition(np.array([10]), 2, phi=0.0, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        dirichlet_partition(np.array([10]), 2, phi=-1.0, rng=np.random.default_rng(0))


@pytest.mark.parametrize("phi", [0.4, 0.7, 1.0])
@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_partition_conserves_class_totals(phi, seed):
    counts = np.array([100, 50, 7, 333, 1])
    parts = dirichlet_partition(counts, 9, phi, np.random.default_rng(seed))
    table = np.stack([p.counts for p in parts])
    assert np.array_equal(table.sum(axis=0), counts)


def test_partition_high_phi_is_nearly_even():
    counts = np.full(10, 1000)
    parts = dirichlet_partition(counts, 10, phi=1e6, rng=np.random.default_rng(12))
    table = np.stack([p.counts for p in parts])
    assert np.abs(table - 100).max() < 10  # within 10% of the even share


def test_partition_never_leaves_a_worker_empty():
    counts = np.array([3, 2])  # 5 samples over 5 workers under heavy skew
    for seed in range(30):
        parts = dirichlet_partition(counts, 5, phi=0.05, rng=np.random.default_rng(seed))
        assert all(p.total > 0 for p in parts)
        assert sum(p.total for p in parts) == 5


def test_partition_deterministic_for_fixed_seed():
    counts = np.array([40, 40, 40])
    a = dirichlet_partition(counts, 6, 0.4, np.random.default_rng(5))
    b = dirichlet_partition(counts, 6, 0.4, np.random.default_rng(5))
    assert all(np.array_equal(x.counts, y.counts) for x, y in zip(a, b))


def test_iid_exact_partition_is_even():
    parts = iid_exact_partition(np.array([10, 11]), 5)
    table = np.stack([p.counts for p in parts])
    assert np.array_equal(table.sum(axis=0), [10, 11])
    assert table[:, 0].max() - table[:, 0].min() <= 1
    assert table[:, 1].max() - table[:, 1].min() <= 1


def test_emd_identical_histograms():
    h = hist(5, 5, 10)
    assert emd(h, h) == 0.0


def test_emd_disjoint_single_classes():
    assert emd(hist(10, 0), hist(0, 7)) == pytest.approx(2.0, abs=1e-12)


def test_emd_worked_example():
    assert emd(hist(60, 40), hist(25, 75)) == pytest.approx(0.70, abs=1e-9)


def test_emd_rejects_empty_histogram():
    with pytest.raises(ValueError):
        emd(hist(0, 0), hist(1, 1))


def test_emd_symmetric_and_bounded():
    rng = np.random.default_rng(8)
    for _ in range(100):
        a = ClassHistogram(rng.integers(0, 50, 6) + 1)
        b = ClassHistogram(rng.integers(0, 50, 6) + 1)
        d = emd(a, b)
        assert d == emd(b, a)
        assert 0.0 <= d <= 2.0


def test_emd_matrix_matches_pairwise():
    rng = np.random.default_rng(4)
    hists = [ClassHistogram(rng.integers(1, 30, 4)) for _ in range(5)]
    mat = emd_matrix(hists)
    for i in range(5):
        for j in range(5):
            assert mat[i, j] == pytest.approx(emd(hists[i], hists[j]), abs=1e-12)


def test_mean_emd_nonincreasing_in_phi():
    # stronger concentration (small phi) spreads classes less evenly
    counts = np.full(10, 200)
    means = []
    for phi in (0.4, 0.7, 1.0):
        vals = []
        for seed in range(20):
            parts = dirichlet_partition(counts, 12, phi, np.random.default_rng(seed))
            mat = emd_matrix(parts)
            vals.append(mat[np.triu_indices(12, k=1)].mean())
        means.append(np.mean(vals))
    assert means[0] >= means[1] >= means[2]


def test_synth_dataset_empty_histogram():
    means = class_mean_vertices(3, 4, 2.0)
    ds = synth_dataset(hist(0, 0, 0), 4, means, 0.5, np.random.default_rng(0))
    assert len(ds) == 0
    assert ds.features.shape == (0, 4)


def test_synth_dataset_zero_noise_hits_class_means():
    means = class_mean_vertices(3, 5, 2.0)
    ds = synth_dataset(hist(2, 0, 3), 5, means, 0.0, np.random.default_rng(0))
    assert len(ds) == 5
    for x, y in zip(ds.features, ds.labels):
        assert np.array_equal(x, means[y])


def test_synth_dataset_deterministic():
    means = class_mean_vertices(2, 3, 1.0)
    a = synth_dataset(hist(4, 6), 3, means, 0.5, np.random.default_rng(9))
    b = synth_dataset(hist(4, 6), 3, means, 0.5, np.random.default_rng(9))
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_synth_dataset_label_counts_match_histogram():
    means = class_mean_vertices(4, 6, 2.0)
    h = hist(3, 0, 7, 2)
    ds = synth_dataset(h, 6, means, 0.3, np.random.default_rng(2))
    assert np.array_equal(np.bincount(ds.labels, minlength=4), h.counts)


def test_class_mean_vertices_requires_enough_dims():
    with pytest.raises(ValueError):
        class_mean_vertices(5, 4, 1.0)


def test_histogram_csv_roundtrip_shape():
    text = histograms_to_csv([hist(1, 2), hist(3, 4)])
    lines = text.strip().split("\n")
    assert lines[0] == "worker,class_0,class_1,total"
    assert lines[1] == "0,1,2,3"
    assert lines[2] == "1,3,4,7"
