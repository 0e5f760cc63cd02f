import math

import pytest

from steertest.errors import InputError
from steertest.oracle import (LabeledSet, check_metamorphic, count_errors,
                              filter_transform, mse, violation_category,
                              violation_from_json, violation_to_json)
from steertest.rng import SplitMix64
from steertest.transforms import TransformSpec


def test_mse_cases():
    assert mse([0.2, -0.4], [0.2, -0.4]) == 0.0
    assert mse([0.5], [0.0]) == 0.25
    assert mse([0.1, -0.3], [0.0, 0.1]) == pytest.approx(0.085)
    with pytest.raises(InputError):
        mse([0.1], [0.1, 0.2])
    with pytest.raises(InputError):
        mse([], [])


def test_oracle_config_defaults():
    from steertest.oracle import OracleConfig
    cfg = OracleConfig()
    assert cfg.relaxation == 5.0
    assert cfg.closeness == 0.03
    with pytest.raises(InputError):
        OracleConfig(relaxation=-1.0)


def test_labeled_set_validation():
    with pytest.raises(InputError):
        LabeledSet((), (), ())
    with pytest.raises(InputError):
        LabeledSet(("a",), (1.5,), (0.0,))
    with pytest.raises(InputError):
        LabeledSet(("a", "b"), (0.0,), (0.0, 0.0))


def _baseline(stream, n=6):
    labels = tuple(stream.uniform(-0.9, 0.9) for _ in range(n))
    preds = tuple(max(-1.0, min(1.0, l + stream.uniform(-0.2, 0.2)))
                  for l in labels)
    return LabeledSet(tuple(f"f{i}" for i in range(n)), labels, preds)


def test_unchanged_predictions_with_generous_lambda():
    base = _baseline(SplitMix64(60))
    errs = [(l - p) ** 2 for l, p in zip(base.labels, base.predictions)]
    lam = len(errs) * max(errs) / sum(errs)  # threshold == max error
    assert check_metamorphic(base, base.predictions, lam) == []


def test_lambda_beyond_output_range_never_violates():
    base = LabeledSet(("a", "b"), (0.9, -0.9), (0.0, 0.0))
    # worst possible squared error on [-1, 1] outputs is 4
    lam = 4.0 / base.baseline_mse + 1.0
    assert lam * base.baseline_mse > 4
    worst = check_metamorphic(base, (-1.0, 1.0), lam)
    assert worst == []


def test_reported_error_magnitudes_flag_violation():
    # baseline error level 0.035 vs transformed squared error 0.41 at lambda 5
    base = LabeledSet(("x",), (0.0,), (math.sqrt(0.035),))
    assert base.baseline_mse == pytest.approx(0.035)
    theta_t = math.sqrt(0.41)
    records = check_metamorphic(base, (theta_t,), 5.0,
                                provenance=(TransformSpec("rain", (1, 0.5)),),
                                model="m")
    assert len(records) == 1
    rec = records[0]
    assert rec.squared_error == pytest.approx(0.41)
    assert rec.threshold == pytest.approx(0.175)
    assert rec.category == "rain"


def test_boundary_equality_is_no_violation():
    base = LabeledSet(("x", "y"), (0.5, -0.5), (0.0, 0.0))  # mse 0.25
    # squared error exactly lambda * mse -> allowed
    lam = 1.0
    theta_t = 0.0  # (0.5 - 0)^2 == 0.25 == 1 * 0.25
    assert check_metamorphic(base, (theta_t, -0.0), lam) == []


def test_degenerate_baseline_flags_any_deviation():
    base = LabeledSet(("x",), (0.3,), (0.3,))
    assert base.baseline_mse == 0.0
    for lam in (0.0, 1.0, 100.0):
        assert len(check_metamorphic(base, (0.300001,), lam)) == 1
        assert check_metamorphic(base, (0.3,), lam) == []


def test_lambda_monotone_violation_sets():
    stream = SplitMix64(61)
    base = _baseline(stream, n=12)
    transformed = [max(-1.0, min(1.0, p + stream.uniform(-0.8, 0.8)))
                   for p in base.predictions]
    previous = None
    for lam in range(1, 11):
        ids = {v.image_id for v in check_metamorphic(base, transformed, float(lam))}
        if previous is not None:
            assert ids <= previous
        previous = ids


def test_identity_transform_violations_independent_of_machinery():
    stream = SplitMix64(62)
    base = _baseline(stream, n=10)
    records = check_metamorphic(base, base.predictions, 0.5)
    threshold = 0.5 * base.baseline_mse
    expected = {i for i, (l, p) in enumerate(zip(base.labels, base.predictions))
                if (l - p) ** 2 > threshold}
    assert {v.image_id for v in records} == {f"f{i}" for i in expected}


def test_filter_transform():
    assert filter_transform(0.06, 0.06, 0.0)
    assert not filter_transform(0.10, 0.06, 0.03)
    assert filter_transform(0.10, 0.06, 0.05)
    # epsilon monotone: passing a tighter gate implies passing a looser one
    stream = SplitMix64(63)
    for _ in range(100):
        a, b = stream.next_float(), stream.next_float()
        e1 = stream.next_float() * 0.5
        e2 = e1 + stream.next_float() * 0.5
        if filter_transform(a, b, e1):
            assert filter_transform(a, b, e2)


def test_count_errors_dedup():
    assert count_errors([]) == {}
    spec = (TransformSpec("brightness", (50,)),)
    records = check_metamorphic(LabeledSet(("img1",), (0.9,), (0.0,)),
                                (-0.9,), 1.0, provenance=spec, model="m1")
    assert len(records) == 1
    doubled = records + records
    assert count_errors(doubled) == {("brightness", "m1"): 1}
    other = check_metamorphic(LabeledSet(("img2",), (0.9,), (0.0,)),
                              (-0.9,), 1.0, provenance=spec, model="m1")
    assert count_errors(doubled + other) == {("brightness", "m1"): 2}


def test_violation_category_rules():
    assert violation_category((TransformSpec("fog", (1, 0.5)),)) == "fog"
    assert violation_category((TransformSpec("blur", ("median", 3)),)) == "blur"
    chain = (TransformSpec("rotation", (6,)), TransformSpec("brightness", (20,)))
    assert violation_category(chain) == "guided"


def test_violation_json_roundtrip():
    base = LabeledSet(("img9",), (0.8,), (0.1,))
    rec = check_metamorphic(base, (-0.8,), 1.0,
                            provenance=(TransformSpec("blur", ("gaussian", 5)),),
                            model="cnn-0")[0]
    again = violation_from_json(violation_to_json(rec))
    assert again == rec


def test_misaligned_inputs():
    base = LabeledSet(("a", "b"), (0.1, 0.2), (0.1, 0.2))
    with pytest.raises(InputError):
        check_metamorphic(base, (0.1,), 1.0)
    with pytest.raises(InputError):
        check_metamorphic(base, (0.1, 0.2), 1.0,
                          provenance=[(TransformSpec("rotation", (3,)),)])
