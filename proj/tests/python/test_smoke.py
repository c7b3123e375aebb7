import json
import math
import random

import pytest

import permsig


def test_ordinal_patterns():
    assert permsig.pattern_of_window([1, 4, 3, 2]) == [0, 3, 2, 1]
    assert permsig.pattern_of_window([2, 2]) == [0, 1]
    assert permsig.lehmer_rank([1, 0, 2]) == 2
    p = permsig.bandt_pompe_pdf([1, 2, 3, 2], dimension=2, lag=1)
    assert p == pytest.approx([2 / 3, 1 / 3], abs=1e-15)


def test_quantifiers():
    assert permsig.quantify([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]) == (0.0, 0.0, 1.0)
    h, c, f = permsig.quantify([1 / 6] * 6)
    assert h == pytest.approx(1.0, abs=1e-12)
    assert c == pytest.approx(0.0, abs=1e-12)
    assert f == pytest.approx(0.0, abs=1e-12)
    assert permsig.fisher_information([0.0, 1.0, 0.0]) == 1.0
    with pytest.raises(permsig.PermsigError):
        permsig.shannon_entropy([0.5, 0.6])
    with pytest.raises(ValueError):
        permsig.normalized_entropy([1.0])


def test_features_of_a_raw_trace():
    rng = random.Random(3)
    x = [i + rng.random() for i in range(400)]
    y = [math.sin(i / 20) + 0.05 * rng.random() for i in range(400)]
    f = permsig.extract_features(x, y)
    assert set(permsig.FEATURE_NAMES) <= set(f)
    for name in permsig.FEATURE_NAMES:
        assert 0.0 <= f[name] <= 1.0
    px, py = permsig.preprocess(x, y, 100)
    assert len(px) == 100 and min(px) >= 0.0 and max(px) <= 1.0
    with pytest.raises(permsig.PermsigError):
        permsig.extract_features([1.0], [1.0])


def test_model_and_metrics():
    rng = random.Random(5)
    pts = [[0.5 + 0.02 * rng.gauss(0, 1) for _ in range(6)] for _ in range(30)]
    model = permsig.train(pts, nu=0.1, sigma_sq=10.0)
    assert sum(model.alphas) == pytest.approx(1.0, abs=1e-9)
    assert model.kkt_residual < 1e-6
    far = [100.0] * 6
    assert model.decision_value(far) == pytest.approx(-model.offset, abs=1e-12)
    assert not model.is_genuine(far)
    again = permsig.OcSvmModel.from_json(model.to_json())
    assert again.decision_value(pts[0]) == model.decision_value(pts[0])
    assert json.loads(model.to_json())["nu"] == 0.1

    assert permsig.accuracy([1, 1, -1, -1], [True, True, True, False]) == 0.75
    assert permsig.auc([0.9, 0.4, 0.6, 0.1], [True, True, False, False]) == 0.75
    assert permsig.eer([3, 4, 0, 1], [True, True, False, False]) == 0.0
    roc = permsig.roc_curve([0.9, 0.3, 0.7, 0.1], [True, True, False, False])
    assert roc[0][1:] == (1.0, 0.0) and roc[-1][1:] == (0.0, 1.0)


def test_clustering():
    d = permsig.hierarchical_cluster({"a": [0.0], "b": [1.0], "c": [10.0]})
    assert d.heights == [1.0, 9.5]
    assert d.to_newick() == "((a:1,b:1):8.5,c:9.5);"
    assert d.cut(2) == {"a": 0, "b": 0, "c": 1}


def test_synthetic_pipeline(tmp_path):
    manifest = permsig.write_synthetic_dataset(tmp_path, subjects=3, genuine=8, forgeries=4, seed=11)
    feats, failures = permsig.extract_manifest_features(manifest, jobs=2)
    assert failures == []
    assert len(feats) == 3 * 12
    report = permsig.run_protocol(feats, n=5, seed=1)
    assert report["protocol"]["n"] == 5
    assert len(report["per_subject"]) == 3
    assert 0.0 <= report["auc"] <= 1.0
    assert permsig.run_protocol(feats, n=5, seed=1) == report
    with pytest.raises(permsig.PermsigError):
        permsig.run_protocol(feats, n=8)
