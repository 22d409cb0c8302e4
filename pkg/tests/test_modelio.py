"""Tests for the flat-file model format: round-trips for every model kind
and map kind, dataset validation on load, and corruption detection.
"""

import numpy as np
import pytest

from counterattr import (
    EmbeddingModel,
    FeatureMap,
    GeneralClassifier,
    SyntheticSpec,
    ValidationError,
    generate_synthetic,
    load_model,
    predict_attributes,
    predict_class_general,
    save_model,
)


def _rewrite(src, dst, transform):
    """Re-serialize a model file after editing its header or payload."""
    blob = src.read_bytes()
    idx = blob.index(b"\nend\n") + len(b"\nend\n")
    header = blob[:idx].decode("ascii").splitlines()
    payload = blob[idx:]
    header, payload = transform(header, payload)
    dst.write_bytes(("\n".join(header) + "\n").encode("ascii") + payload)
    return dst


def _embedding(rng, d=4, a=3, **kwargs):
    return EmbeddingModel(weights=rng.normal(size=(d, a)), **kwargs)


class TestRoundTrip:
    def test_embedding_identity(self, tmp_path):
        rng = np.random.default_rng(31)
        model = _embedding(rng, margin_scale=0.7, normalize_class_attributes=True,
                           prediction_rule="nearest-attribute")
        dmap = FeatureMap.identity(4)
        path = tmp_path / "m.model"
        save_model(model, dmap, path)
        loaded, lmap = load_model(path)
        assert isinstance(loaded, EmbeddingModel)
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.margin_scale == 0.7
        assert loaded.normalize_class_attributes is True
        assert loaded.prediction_rule == "nearest-attribute"
        assert lmap.kind == "identity" and lmap.input_dim == 4

    def test_embedding_margin_exact_float(self, tmp_path):
        # repr-based header must survive values with no short decimal form
        rng = np.random.default_rng(32)
        margin = float(np.pi / 7)
        model = _embedding(rng, margin_scale=margin)
        path = tmp_path / "m.model"
        save_model(model, FeatureMap.identity(4), path)
        loaded, _ = load_model(path)
        assert loaded.margin_scale == margin

    def test_general_identity(self, tmp_path):
        rng = np.random.default_rng(33)
        clf = GeneralClassifier(weights=rng.normal(size=(5, 3)),
                                bias=rng.normal(size=3))
        path = tmp_path / "g.model"
        save_model(clf, FeatureMap.identity(5), path)
        loaded, lmap = load_model(path)
        assert isinstance(loaded, GeneralClassifier)
        assert np.array_equal(loaded.weights, clf.weights)
        assert np.array_equal(loaded.bias, clf.bias)
        assert lmap.input_dim == 5

    def test_embedding_hidden_map(self, tmp_path):
        rng = np.random.default_rng(34)
        dmap = FeatureMap.random_hidden(6, 9, 4, seed=7)
        model = _embedding(rng, d=4, a=3)
        path = tmp_path / "h.model"
        save_model(model, dmap, path)
        loaded, lmap = load_model(path)
        assert lmap.kind == "hidden"
        assert (lmap.input_dim, lmap.hidden_dim, lmap.output_dim) == (6, 9, 4)
        assert np.array_equal(lmap.w1, dmap.w1)
        assert np.array_equal(lmap.b1, dmap.b1)
        assert np.array_equal(lmap.w2, dmap.w2)
        assert np.array_equal(loaded.weights, model.weights)

    def test_general_hidden_map(self, tmp_path):
        rng = np.random.default_rng(35)
        dmap = FeatureMap.random_hidden(6, 5, 4, seed=8)
        clf = GeneralClassifier(weights=rng.normal(size=(4, 3)),
                                bias=rng.normal(size=3))
        path = tmp_path / "gh.model"
        save_model(clf, dmap, path)
        loaded, lmap = load_model(path)
        x = rng.normal(size=6)
        assert predict_class_general(lmap, loaded, x) == predict_class_general(dmap, clf, x)
        assert np.array_equal(lmap.w2, dmap.w2)

    def test_trained_models_predict_identically(self, tmp_path, suite):
        dataset, split, dmap, model, general = suite
        pm = tmp_path / "att.model"
        pg = tmp_path / "gen.model"
        save_model(model, dmap, pm)
        save_model(general, dmap, pg)
        lm, lmap = load_model(pm, dataset=dataset)
        lg, _ = load_model(pg, dataset=dataset)
        for i in split.test[:10]:
            x = dataset.features[i]
            assert np.array_equal(predict_attributes(lmap, lm, x),
                                  predict_attributes(dmap, model, x))
            assert predict_class_general(lmap, lg, x) == \
                predict_class_general(dmap, general, x)

    def test_unserializable_object_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="cannot serialize"):
            save_model({"weights": 1}, FeatureMap.identity(2), tmp_path / "x")


class TestDatasetValidation:
    @pytest.fixture()
    def small(self):
        spec = SyntheticSpec(num_classes=3, num_attributes=4, feature_dim=5,
                             samples_per_class=4, noise_sigma=0.1, seed=1)
        return generate_synthetic(spec)

    def test_matching_dataset_accepted(self, tmp_path, small):
        rng = np.random.default_rng(41)
        model = _embedding(rng, d=5, a=4)
        path = tmp_path / "m.model"
        save_model(model, FeatureMap.identity(5), path)
        load_model(path, dataset=small)

    def test_wrong_input_dim(self, tmp_path, small):
        rng = np.random.default_rng(42)
        model = _embedding(rng, d=6, a=4)
        path = tmp_path / "m.model"
        save_model(model, FeatureMap.identity(6), path)
        with pytest.raises(ValidationError, match="input dim"):
            load_model(path, dataset=small)

    def test_wrong_attribute_count(self, tmp_path, small):
        rng = np.random.default_rng(43)
        model = _embedding(rng, d=5, a=6)
        path = tmp_path / "m.model"
        save_model(model, FeatureMap.identity(5), path)
        with pytest.raises(ValidationError, match="attributes"):
            load_model(path, dataset=small)

    def test_wrong_class_count(self, tmp_path, small):
        rng = np.random.default_rng(44)
        clf = GeneralClassifier(weights=rng.normal(size=(5, 7)),
                                bias=rng.normal(size=7))
        path = tmp_path / "g.model"
        save_model(clf, FeatureMap.identity(5), path)
        with pytest.raises(ValidationError, match="classes"):
            load_model(path, dataset=small)


class TestCorruption:
    @pytest.fixture()
    def saved(self, tmp_path):
        rng = np.random.default_rng(51)
        model = _embedding(rng, d=4, a=3, margin_scale=0.5)
        path = tmp_path / "base.model"
        save_model(model, FeatureMap.identity(4), path)
        return path

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad"
        path.write_bytes(b"not a model\nend\n")
        with pytest.raises(ValidationError, match="bad magic"):
            load_model(path)

    def test_unterminated_header(self, tmp_path):
        path = tmp_path / "bad"
        path.write_bytes(b"counterattr-model 1\nkind embedding")
        with pytest.raises(ValidationError, match="unterminated"):
            load_model(path)

    def test_non_ascii_header(self, saved, tmp_path):
        blob = saved.read_bytes().replace(b"kind", b"k\xffnd")
        path = tmp_path / "bad"
        path.write_bytes(blob)
        with pytest.raises(ValidationError, match="non-ASCII"):
            load_model(path)

    def test_unsupported_encoding(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line.replace("float64", "float32") for line in h], p))
        with pytest.raises(ValidationError, match="encoding"):
            load_model(path)

    def test_unknown_kind(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line.replace("kind embedding", "kind tree") for line in h], p))
        with pytest.raises(ValidationError, match="unknown model kind"):
            load_model(path)

    def test_bad_shape(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line.replace("shape 4 3", "shape four three") for line in h], p))
        with pytest.raises(ValidationError, match="shape"):
            load_model(path)

    def test_missing_shape(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line for line in h if not line.startswith("shape")], p))
        with pytest.raises(ValidationError, match="shape"):
            load_model(path)

    def test_missing_margin(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line for line in h if not line.startswith("margin")], p))
        with pytest.raises(ValidationError, match="embedding header"):
            load_model(path)

    def test_truncated_payload(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (h, p[:-8]))
        with pytest.raises(ValidationError, match="truncated"):
            load_model(path)

    def test_partial_float_payload(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (h, p + b"xyz"))
        with pytest.raises(ValidationError, match="whole number"):
            load_model(path)

    def test_trailing_values(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (h, p + b"\0" * 8))
        with pytest.raises(ValidationError, match="trailing"):
            load_model(path)

    def test_missing_map(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line for line in h if not line.startswith("map ")], p))
        with pytest.raises(ValidationError, match="feature map"):
            load_model(path)

    def test_unknown_map_kind(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line.replace("map identity 4", "map spline 4") for line in h], p))
        with pytest.raises(ValidationError, match="feature map kind"):
            load_model(path)

    def test_map_output_mismatch(self, saved, tmp_path):
        path = _rewrite(saved, tmp_path / "bad", lambda h, p: (
            [line.replace("map identity 4", "map identity 5") for line in h], p))
        with pytest.raises(ValidationError, match="model dim"):
            load_model(path)
