import math
from fractions import Fraction

import numpy as np
import pytest

from bidisc import (
    CoeffSchedule,
    EulerOp,
    FreqSchedule,
    GridPoint,
    GridSpec,
    RSPair,
    SparsePoly,
    antiderivative_view,
    build_rs_pair,
    coeff_l1,
    eval_at_grid_point,
    flatness_residual,
    grid_sup,
    grid_values,
    growth_scan,
    norm_report,
    value_at_one,
)


def raw_freqs(pairs):
    return FreqSchedule(n=len(pairs), freqs=tuple(pairs), kappa=Fraction(1, 2),
                        A=(), base=1, mode="standard")


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(size=100)
    with pytest.raises(ValueError):
        GridSpec(samples=0)


def test_grid_sup_monomial_is_flat():
    est, arg = grid_sup(SparsePoly({(5, 3): 1.0}), GridSpec(size=64))
    assert est == pytest.approx(1.0, abs=1e-12)
    assert (arg.j1, arg.j2) == (0, 0)          # first point in scan order


def test_grid_sup_huge_exponent_monomial():
    est, _ = grid_sup(SparsePoly({(3 ** 100, 7): 2.0}), GridSpec(size=64))
    assert est == pytest.approx(2.0, abs=1e-12)


def test_grid_sup_one_plus_z1():
    est, arg = grid_sup(SparsePoly({(0, 0): 1.0, (1, 0): 1.0}), GridSpec())
    assert est == pytest.approx(2.0, abs=1e-10)
    assert (arg.j1, arg.j2) == (0, 0)


def test_grid_values_agree_with_direct_eval(constructed):
    result = constructed(8)
    size = 512
    values = grid_values(result.pair.p, size)
    rng = np.random.default_rng(11)
    for j1, j2 in rng.integers(0, size, size=(32, 2)):
        direct = eval_at_grid_point(result.pair.p, GridPoint(size, int(j1), int(j2)))
        assert abs(values[j1, j2] - direct) <= 1e-10


def test_grid_sup_monotone_under_refinement(constructed):
    result = constructed(6)
    view = antiderivative_view(result.bundle.f_source, EulerOp.D1D2)
    coarse, _ = grid_sup(view, GridSpec(size=64))
    fine, _ = grid_sup(view, GridSpec(size=128))
    assert fine >= coarse - 1e-12


def test_flatness_residual_two_unimodular_terms():
    pair = build_rs_pair(CoeffSchedule(1, (1.0,)), raw_freqs([(4, 1)]))
    assert flatness_residual(pair, GridSpec(samples=50, seed=3)) <= 1e-12


def test_flatness_residual_paper_level_ten(constructed):
    result = constructed(10)
    assert flatness_residual(result.pair, GridSpec()) <= 1e-9


def test_flatness_residual_detects_corruption(constructed):
    result = constructed(10)
    terms = dict(result.pair.p.iter_terms())
    e = next(iter(terms))
    terms[e] = terms[e] + 0.01
    corrupted = RSPair(
        p=SparsePoly(terms), q=result.pair.q,
        schedule=result.schedule, freqs=result.freqs,
    )
    assert flatness_residual(corrupted, GridSpec()) > 1e-4


def test_unimodular_pair_respects_flatness_everywhere():
    sched = CoeffSchedule(4, (1.0,) * 4)
    freqs = raw_freqs([(10, 1), (100, 20), (1000, 300), (10000, 4000)])
    pair = build_rs_pair(sched, freqs)
    flat = 2.0 ** 4
    mags = np.abs(grid_values(pair.p, 128))
    assert (mags ** 2 <= flat + 1e-9).all()


def test_norm_report_invariants(constructed):
    result = constructed(6)
    report = norm_report(result.bundle, GridSpec(), pair=result.pair)
    assert set(report.entries) == {
        (poly, op) for poly in ("F", "G") for op in ("d1sq", "d2sq", "d1d2")
    }
    for entry in report.entries.values():
        assert entry.grid_sup <= entry.l1_bound + 1e-9
        assert abs(entry.value_at_1) <= entry.grid_sup + 1e-12
    bounds = result.bundle.bounds
    assert report.ratio == pytest.approx(
        bounds.mixed_best / max(bounds.upper_pure1, bounds.upper_pure2)
    )
    flat = math.prod(1 + a * a for a in result.schedule.a)
    assert report.entries[("F", "d1sq")].grid_sup <= math.sqrt(flat) + 1e-6


def test_norm_report_single_term_values():
    pair = build_rs_pair(CoeffSchedule(1, (1.0,)), raw_freqs([(4, 1)]))
    from bidisc import assemble_counterexamples
    bundle = assemble_counterexamples(pair, Fraction(1, 4))
    report = norm_report(bundle, GridSpec(size=64))
    assert report.entries[("F", "d1d2")].value_at_1 == pytest.approx(0.25)
    assert report.entries[("F", "d2sq")].value_at_1 == pytest.approx(1 / 16)


def test_mixed_view_two_path_agreement(constructed):
    result = constructed(10)
    view = antiderivative_view(result.bundle.f_source, EulerOp.D1D2)
    per_term = 0.0
    for (m1, m2), c in result.bundle.f_source.iter_terms():
        per_term += (c * (Fraction(m2, m1).numerator / Fraction(m2, m1).denominator)).real
    assert abs(value_at_one(view).real - per_term) <= 1e-10


def test_growth_scan_scalar_rows():
    table = growth_scan([100, 1000], scalar_only=True)
    by_n = {r.n: r for r in table.rows}
    assert by_n[100].status == "scalar"
    assert by_n[100].chain_lower == pytest.approx(100 ** 0.75 / (2 * math.pi) - 2,
                                                  abs=1e-9)
    assert by_n[1000].chain_lower == pytest.approx(1000 ** 0.75 / (2 * math.pi) - 2,
                                                   abs=1e-9)
    assert by_n[100].ratio_c is None and by_n[100].deg1 is None
    assert table.completed


def test_growth_scan_full_row_degree_metadata():
    table = growth_scan([6])
    row = table.rows[0]
    assert row.status == "ok"
    assert row.deg1 == row.base ** 6
    assert row.ratio_c == pytest.approx(row.mixed_best
                                        / max(row.upper_pure1, row.upper_pure2))
    assert row.ref_c == pytest.approx(6 ** 0.25 / (2 * math.sqrt(2) * math.pi))


def test_growth_scan_falls_back_to_scalar_beyond_limit():
    from bidisc import SchedulerConfig
    table = growth_scan([4, 30], scheduler=SchedulerConfig(enum_limit=20))
    by_n = {r.n: r for r in table.rows}
    assert by_n[4].status == "ok"
    assert by_n[30].status == "scalar"
    assert table.completed
