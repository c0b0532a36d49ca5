import math

import pytest

import cloudrca


def topology():
    return {
        "platform_id": "p",
        "modules": ["host", "storage"],
        "metric_owner": {"cpu": "host", "iops": "storage"},
        "pattern_owner": {},
        "cause_types": {"oom": "host", "disk_full": "storage"},
        "module_dependencies": [],
    }


def dataset():
    samples = []
    for i in range(60):
        if i % 3 == 0:
            label, bits = {"module_id": "host", "type_id": "oom"}, "10"
        elif i % 3 == 1:
            label, bits = {"module_id": "storage", "type_id": "disk_full"}, "01"
        else:
            label, bits = None, "00"
        samples.append({
            "window_start": i * 600,
            "window_end": i * 600 + 600,
            "polarity": "positive" if label is None else "negative",
            "label": label,
            "bits": bits,
        })
    return {"platform_id": "p", "feature_ids": ["kpi:cpu", "kpi:iops"], "samples": samples}


def test_preprocess_masks_variables():
    assert cloudrca.preprocess("Connect to 10.0.0.1 failed") == ["connect", "to", "<*>", "fail"]
    assert cloudrca.preprocess("12345 0xdeadbeef") is None


def test_mann_kendall_counts_pairs():
    assert cloudrca.mann_kendall_s([1.0, 2.0, 3.0, 4.0]) == 6
    assert cloudrca.mann_kendall_s([4.0, 3.0, 3.0, 1.0]) == -5


def test_decompose_is_additive():
    values = [10.0 + 3.0 * math.sin(2 * math.pi * i / 12) + 0.01 * i for i in range(96)]
    trend, seasonal, remainder = cloudrca.decompose(values, 12)
    assert all(t + s + r == x for t, s, r, x in zip(trend, seasonal, remainder, values))
    assert cloudrca.detect_period(values) == 12


def test_detect_flags_level_shift():
    values = [float(i % 2) for i in range(80)] + [30.0 + i % 2 for i in range(40)]
    report = cloudrca.detect(values, split=80)
    assert "mean_change" in report["findings"]
    assert set(report["statistics"]) >= {"esd", "f_test", "t_test", "mann_kendall"}


def test_train_and_infer_round_trip():
    model = cloudrca.train_khbn(topology(), dataset())
    assert model["format"] == "khbn-1"
    diag = cloudrca.infer(model, [1, 0])
    assert diag["best_type"] == "oom"
    assert diag["best_module"] == "host"
    assert diag["types"][0]["score"] >= diag["types"][1]["score"]
    assert cloudrca.infer(model, [0, 1], confidence_floor=0.0)["novel_type"] is False


def test_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        cloudrca.normalize_config({"features": {"k": 0}})
    with pytest.raises(cloudrca.ValidationError):
        cloudrca.infer(cloudrca.train_khbn(topology(), dataset()), [1, 0, 1])


def test_normalize_config_fills_defaults():
    cfg = cloudrca.normalize_config({"seed": 3})
    assert cfg["seed"] == 3
    assert cfg["features"]["k"] >= 1
    assert set(cfg) >= {"detection", "templates", "clustering", "khbn", "split", "stages"}


def test_corpus_save_load(tmp_path):
    corpora = cloudrca.standard_benchmark(1)
    assert [c.platform_id for c in corpora] == ["batch", "stream", "olap"]
    small = corpora[-1]
    small.save(tmp_path / "olap")
    back = cloudrca.load_corpus(tmp_path / "olap")
    assert (back.platform_id, back.n_windows, back.n_metrics, back.n_logs) == (
        small.platform_id, small.n_windows, small.n_metrics, small.n_logs)
