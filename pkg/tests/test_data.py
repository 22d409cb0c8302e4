"""Dataset construction, synthetic generation, CSV round-trips and splits."""

import numpy as np
import pytest

from counterattr import (
    Dataset,
    SyntheticSpec,
    ValidationError,
    generate_synthetic,
    load_dataset,
    save_dataset,
    split_dataset,
)


def small_dataset():
    return Dataset(
        features=np.array([[0.5, 1.0], [2.0, -1.0], [0.25, 0.75]]),
        labels=np.array([0, 1, 0]),
        class_attributes=np.array([[1.0, 0.0], [0.0, 1.0]]),
        class_names=("zero", "one"),
        attribute_names=("a", "b"),
    )


class TestDatasetInvariants:
    def test_shapes_and_counts(self):
        ds = small_dataset()
        assert ds.num_samples == 3
        assert ds.feature_dim == 2
        assert ds.num_classes == 2
        assert ds.num_attributes == 2
        assert [s.label for s in ds.samples] == [0, 1, 0]

    def test_label_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            Dataset(
                features=np.zeros((2, 2)),
                labels=np.array([0, 5]),
                class_attributes=np.eye(2),
                class_names=("zero", "one"),
                attribute_names=("a", "b"),
            )

    def test_nonfinite_features_rejected(self):
        with pytest.raises(ValidationError):
            Dataset(
                features=np.array([[np.nan, 0.0]]),
                labels=np.array([0]),
                class_attributes=np.eye(2),
                class_names=("zero", "one"),
                attribute_names=("a", "b"),
            )

    def test_name_count_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            Dataset(
                features=np.zeros((1, 2)),
                labels=np.array([0]),
                class_attributes=np.eye(2),
                class_names=("only-one",),
                attribute_names=("a", "b"),
            )

    def test_bounds_checked_against_features(self):
        with pytest.raises(ValidationError):
            Dataset(
                features=np.array([[2.0, 0.0]]),
                labels=np.array([0]),
                class_attributes=np.eye(2),
                class_names=("zero", "one"),
                attribute_names=("a", "b"),
                feature_bounds=(np.array([0.0, 0.0]), np.array([1.0, 1.0])),
            )

    def test_arrays_read_only(self):
        ds = small_dataset()
        with pytest.raises(ValueError):
            ds.features[0, 0] = 9.0
        with pytest.raises(ValueError):
            ds.class_attributes[0, 0] = 9.0


class TestSyntheticSpec:
    def test_invalid_dimensions_rejected(self):
        with pytest.raises(ValidationError):
            SyntheticSpec(num_classes=1, num_attributes=2, feature_dim=2,
                          samples_per_class=1)
        with pytest.raises(ValidationError):
            SyntheticSpec(num_classes=2, num_attributes=4, feature_dim=2,
                          samples_per_class=1)
        with pytest.raises(ValidationError):
            SyntheticSpec(num_classes=2, num_attributes=2, feature_dim=2,
                          samples_per_class=1, noise_sigma=-0.1)
        with pytest.raises(ValidationError):
            SyntheticSpec(num_classes=2, num_attributes=2, feature_dim=2,
                          samples_per_class=1, class_similarity=1.5)


class TestGenerateSynthetic:
    def test_zero_noise_orthogonal_two_point_clusters(self):
        """similarity=0, noise=0 puts every sample exactly on its class point."""
        spec = SyntheticSpec(num_classes=2, num_attributes=2, feature_dim=2,
                             samples_per_class=5, noise_sigma=0.0,
                             class_similarity=0.0, seed=3)
        ds = generate_synthetic(spec)
        assert np.array_equal(ds.class_attributes, np.eye(2))
        for c in range(2):
            rows = ds.features[ds.labels == c]
            assert np.all(rows == rows[0])
        # the two cluster points are distinct, hence linearly separable
        assert not np.allclose(ds.features[ds.labels == 0][0],
                               ds.features[ds.labels == 1][0])

    def test_determinism(self):
        spec = SyntheticSpec(num_classes=3, num_attributes=4, feature_dim=6,
                             samples_per_class=7, noise_sigma=0.2,
                             class_similarity=0.4, seed=12)
        a = generate_synthetic(spec)
        b = generate_synthetic(spec)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.class_attributes, b.class_attributes)

    def test_different_seeds_differ(self):
        base = dict(num_classes=3, num_attributes=4, feature_dim=6,
                    samples_per_class=7, noise_sigma=0.2, class_similarity=0.4)
        a = generate_synthetic(SyntheticSpec(seed=1, **base))
        b = generate_synthetic(SyntheticSpec(seed=2, **base))
        assert not np.array_equal(a.features, b.features)

    def test_similarity_blends_toward_shared_base(self):
        base = dict(num_classes=4, num_attributes=4, feature_dim=4,
                    samples_per_class=1, noise_sigma=0.0, seed=5)
        spreads = []
        for sim in (0.0, 0.5, 0.95):
            ds = generate_synthetic(SyntheticSpec(class_similarity=sim, **base))
            rows = ds.class_attributes
            dists = [np.linalg.norm(rows[i] - rows[j])
                     for i in range(4) for j in range(i + 1, 4)]
            spreads.append(np.mean(dists))
        assert spreads[0] > spreads[1] > spreads[2]
        # exact scaling for the blend: pairwise distance shrinks by (1 - sim)
        assert spreads[1] == pytest.approx(spreads[0] * 0.5, rel=1e-12)

    def test_signatures_in_unit_interval(self):
        spec = SyntheticSpec(num_classes=12, num_attributes=8, feature_dim=10,
                             samples_per_class=2, class_similarity=0.3, seed=9)
        ds = generate_synthetic(spec)
        assert ds.class_attributes.min() >= 0.0
        assert ds.class_attributes.max() <= 1.0

    def test_features_are_mixing_of_attributes_plus_noise(self):
        """With zero noise, features of a class equal M @ phi(class) for fixed M."""
        spec = SyntheticSpec(num_classes=5, num_attributes=4, feature_dim=7,
                             samples_per_class=3, noise_sigma=0.0,
                             class_similarity=0.25, seed=21)
        ds = generate_synthetic(spec)
        # recover M by least squares from the class means, then check exactly
        phi = ds.class_attributes
        means = np.array([ds.features[ds.labels == c][0] for c in range(5)])
        mixing, *_ = np.linalg.lstsq(phi, means, rcond=None)
        assert np.allclose(phi @ mixing, means, atol=1e-10)


class TestSaveLoadRoundTrip:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        ds = Dataset(
            features=rng.normal(size=(3, 2)),
            labels=np.array([0, 1, 1]),
            class_attributes=rng.uniform(size=(2, 2)),
            class_names=("cat", "dog"),
            attribute_names=("furry", "striped"),
        )
        paths = (tmp_path / "f.csv", tmp_path / "a.csv", tmp_path / "n.txt")
        save_dataset(ds, *paths)
        back = load_dataset(*paths)
        assert np.array_equal(back.features, ds.features)
        assert np.array_equal(back.labels, ds.labels)
        assert np.array_equal(back.class_attributes, ds.class_attributes)
        assert back.class_names == ds.class_names
        assert back.attribute_names == ds.attribute_names
        assert back.feature_bounds is None

    def test_round_trip_with_bounds(self, tmp_path):
        ds = Dataset(
            features=np.array([[0.5, 0.5]]),
            labels=np.array([0]),
            class_attributes=np.eye(2),
            class_names=("zero", "one"),
            attribute_names=("a", "b"),
            feature_bounds=(np.array([0.0, 0.0]), np.array([1.0, 1.0])),
        )
        paths = (tmp_path / "f.csv", tmp_path / "a.csv", tmp_path / "n.txt")
        save_dataset(ds, *paths)
        back = load_dataset(*paths)
        low, high = back.feature_bounds
        assert np.array_equal(low, np.zeros(2))
        assert np.array_equal(high, np.ones(2))

    def test_round_trip_synthetic(self, tmp_path):
        spec = SyntheticSpec(num_classes=4, num_attributes=3, feature_dim=5,
                             samples_per_class=6, noise_sigma=0.3, seed=2)
        ds = generate_synthetic(spec)
        paths = (tmp_path / "f.csv", tmp_path / "a.csv", tmp_path / "n.txt")
        save_dataset(ds, *paths)
        back = load_dataset(*paths)
        assert np.array_equal(back.features, ds.features)
        assert np.array_equal(back.class_attributes, ds.class_attributes)

    def _write_default(self, tmp_path):
        ds = small_dataset()
        paths = (tmp_path / "f.csv", tmp_path / "a.csv", tmp_path / "n.txt")
        save_dataset(ds, *paths)
        return paths

    def test_wrong_row_length_names_line(self, tmp_path):
        f, a, n = self._write_default(tmp_path)
        lines = f.read_text().splitlines()
        lines[2] = "1.0,2.0"  # drop the label field from sample row 2
        f.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValidationError, match=r":3"):
            load_dataset(f, a, n)

    def test_nan_attribute_rejected(self, tmp_path):
        f, a, n = self._write_default(tmp_path)
        lines = a.read_text().splitlines()
        lines[1] = "nan,0.0"
        a.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValidationError, match="non-finite"):
            load_dataset(f, a, n)

    def test_unknown_label_rejected(self, tmp_path):
        f, a, n = self._write_default(tmp_path)
        lines = f.read_text().splitlines()
        lines[1] = lines[1].rsplit(",", 1)[0] + ",7"
        f.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValidationError, match="label"):
            load_dataset(f, a, n)

    def test_malformed_float_rejected(self, tmp_path):
        f, a, n = self._write_default(tmp_path)
        lines = f.read_text().splitlines()
        lines[1] = "bogus," + lines[1].split(",", 1)[1]
        f.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValidationError, match="malformed"):
            load_dataset(f, a, n)


class TestSplit:
    def _dataset(self, per_class=10, classes=10):
        spec = SyntheticSpec(num_classes=classes, num_attributes=4,
                             feature_dim=4, samples_per_class=per_class,
                             noise_sigma=0.1, seed=4)
        return generate_synthetic(spec)

    def test_all_train(self):
        ds = self._dataset()
        split = split_dataset(ds, (1.0, 0.0, 0.0), seed=0)
        assert sorted(split.train) == list(range(ds.num_samples))
        assert split.val == () and split.test == ()

    def test_same_seed_identical(self):
        ds = self._dataset()
        a = split_dataset(ds, (0.6, 0.2, 0.2), seed=42)
        b = split_dataset(ds, (0.6, 0.2, 0.2), seed=42)
        assert a == b

    def test_exact_per_class_counts(self):
        """100 samples over 10 classes at (0.6, 0.1, 0.3) puts 6/1/3 per class."""
        ds = self._dataset(per_class=10, classes=10)
        split = split_dataset(ds, (0.6, 0.1, 0.3), seed=1)
        for c in range(10):
            members = set(np.flatnonzero(ds.labels == c))
            assert len(members & set(split.train)) == 6
            assert len(members & set(split.val)) == 1
            assert len(members & set(split.test)) == 3

    def test_disjoint_cover(self):
        ds = self._dataset(per_class=7, classes=5)
        split = split_dataset(ds, (0.5, 0.25, 0.25), seed=3)
        union = list(split.train) + list(split.val) + list(split.test)
        assert sorted(union) == list(range(ds.num_samples))
        assert len(set(union)) == len(union)

    def test_stratification_within_one_sample(self):
        ds = self._dataset(per_class=13, classes=6)
        ratios = (0.5, 0.3, 0.2)
        split = split_dataset(ds, ratios, seed=8)
        for c in range(6):
            members = set(np.flatnonzero(ds.labels == c))
            for part, ratio in zip((split.train, split.val, split.test), ratios):
                got = len(members & set(part))
                assert abs(got - ratio * 13) < 1.0

    def test_every_class_in_train(self):
        ds = self._dataset(per_class=3, classes=4)
        split = split_dataset(ds, (0.34, 0.33, 0.33), seed=5)
        train_labels = {int(ds.labels[i]) for i in split.train}
        assert train_labels == {0, 1, 2, 3}

    def test_bad_ratios_rejected(self):
        ds = self._dataset(per_class=4, classes=3)
        with pytest.raises(ValidationError):
            split_dataset(ds, (0.5, 0.5, 0.5), seed=0)
        with pytest.raises(ValidationError):
            split_dataset(ds, (0.8, -0.1, 0.3), seed=0)

    def test_too_few_samples_per_class_rejected(self):
        ds = self._dataset(per_class=2, classes=3)
        with pytest.raises(ValidationError):
            split_dataset(ds, (0.4, 0.3, 0.3), seed=0)

    def test_part_lookup(self):
        ds = self._dataset(per_class=4, classes=3)
        split = split_dataset(ds, (0.5, 0.25, 0.25), seed=2)
        assert split.part("train") == split.train
        with pytest.raises(ValidationError):
            split.part("bogus")
