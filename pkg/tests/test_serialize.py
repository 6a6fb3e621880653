import json
import logging
import math
from fractions import Fraction
from pathlib import Path

import pytest

from bidisc import (
    ExactRatio,
    FileFormatError,
    SparsePoly,
    construct_level,
    verify_conditions,
)
from bidisc.serialize import (
    conditions_from_obj,
    conditions_to_obj,
    kappa_from_str,
    kappa_to_str,
    load_bundle,
    load_certificate,
    load_conditions,
    load_schedule,
    loaded_bundle_text,
    norm_table_text,
    poly_from_obj,
    poly_to_obj,
    save_bundle,
    save_certificate,
    save_conditions,
    save_scan_csv,
    scan_csv_text,
    schedule_text,
)


@pytest.fixture(scope="module")
def result6():
    return construct_level(6)


def test_certificate_roundtrip_bit_exact(tmp_path):
    p = SparsePoly({
        (1 << 400, 3): 0.1 - 0.3j,          # survives any integer-size limit
        (7, 0): 1 / 3,
        (0, 0): -2.5,
    })
    path = tmp_path / "poly.json"
    save_certificate(p, path)
    q = load_certificate(path)
    assert q == p
    assert q.analytic == p.analytic
    # exponents serialized as decimal strings in canonical order
    obj = json.loads(path.read_text())
    assert obj["vars"] == 2
    assert obj["terms"][0]["e"] == ["0", "0"]
    assert obj["terms"][-1]["e"][0] == str(1 << 400)


def test_certificate_rejects_wrong_vars():
    with pytest.raises(FileFormatError):
        poly_from_obj({"vars": 3, "analytic": True, "terms": []})


def test_certificate_warns_on_foreign_field(caplog):
    obj = poly_to_obj(SparsePoly({(1, 2): 1.0}))
    obj["future_extension"] = {"x": 1}
    with caplog.at_level(logging.WARNING, logger="bidisc"):
        p = poly_from_obj(obj)
    assert p.term_count == 1
    assert any("future_extension" in r.message for r in caplog.records)


def test_kappa_string_roundtrip():
    text = kappa_to_str(Fraction(741455, 2 ** 20), 20)
    assert text == "741455/2^20"
    kappa, bits = kappa_from_str(text)
    assert kappa == Fraction(741455, 2 ** 20) and bits == 20
    assert kappa_to_str(Fraction(1, 2), 20) == "524288/2^20"
    with pytest.raises(FileFormatError):
        kappa_from_str("741455/10^6")


def test_schedule_roundtrip(tmp_path, result6):
    from bidisc.serialize import save_schedule
    path = tmp_path / "schedule.json"
    save_schedule(result6.freqs, 20, path)
    sched, bits = load_schedule(path)
    assert sched == result6.freqs
    assert bits == 20
    assert path.read_text() == schedule_text(result6.freqs, 20)


def test_conditions_roundtrip(tmp_path, result6):
    path = tmp_path / "conditions.json"
    save_conditions(result6.report, path)
    stored = load_conditions(path)
    for name in ("sum_i", "sum_ii", "sum_iii"):
        assert getattr(stored, name) == getattr(result6.report, name)
    assert stored.passed == result6.report.passed
    assert stored.counts == result6.report.counts


def test_bundle_roundtrip_bit_exact(tmp_path, result6):
    paths = save_bundle(result6, tmp_path)
    loaded = load_bundle(paths["bundle"])
    assert loaded.f_source == result6.bundle.f_source
    assert loaded.g_source == result6.bundle.g_source
    assert loaded.kappa == result6.bundle.kappa
    assert loaded.A == result6.selection.A
    assert loaded.branch == result6.selection.branch
    assert loaded.bounds == result6.bundle.bounds
    assert loaded.schedule == result6.freqs
    # byte-identical re-serialization
    assert loaded_bundle_text(loaded).encode() == paths["bundle"].read_bytes()


def test_bundle_kappa_mismatch_detected(tmp_path, result6):
    paths = save_bundle(result6, tmp_path)
    obj = json.loads(paths["bundle"].read_text())
    obj["kappa"] = "1/2^1"
    paths["bundle"].write_text(json.dumps(obj))
    with pytest.raises(FileFormatError):
        load_bundle(paths["bundle"])


def test_truncated_bundle_raises(tmp_path, result6):
    paths = save_bundle(result6, tmp_path)
    data = paths["bundle"].read_text()
    paths["bundle"].write_text(data[: len(data) // 2])
    with pytest.raises(FileFormatError):
        load_bundle(paths["bundle"])


def test_atomic_write_leaves_no_droppings(tmp_path, result6):
    save_bundle(result6, tmp_path)
    assert not [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]


def test_norm_table_columns(result6):
    from bidisc import GridSpec, norm_report
    text = norm_table_text(norm_report(result6.bundle, GridSpec(size=64)))
    header = text.splitlines()[0].split("\t")
    assert header == ["polynomial", "operator", "grid_sup", "argmax_j1",
                      "argmax_j2", "l1_bound", "value_at_1_re", "value_at_1_im"]
    assert len(text.splitlines()) == 8  # header + 6 rows + ratio footer


def test_scan_csv_header_and_parse(tmp_path):
    from bidisc import growth_scan
    table = growth_scan([100], scalar_only=True)
    path = tmp_path / "scan.csv"
    save_scan_csv(table, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ("n,deg1,upper_pure1,upper_pure2,mixed_best,"
                        "chain_lower,ratio_c,base_B,ref_c,status")
    fields = lines[1].split(",")
    assert fields[0] == "100"
    assert float(fields[5]) == pytest.approx(100 ** 0.75 / (2 * math.pi) - 2)


def test_exact_ratio_string_not_reduced_is_fine():
    r = ExactRatio(2, 4)
    assert ExactRatio.from_string(r.as_string()) == Fraction(1, 2)
