from __future__ import annotations

import pytest

from s3ai.bench import BenchError, BenchReport, BenchPoint, LinearFit, linear_fit, run_bench


def test_linear_fit_perfect_line():
    fit = linear_fit([1, 2, 4, 8], [10, 20, 40, 80])
    assert fit is not None
    assert abs(fit.slope - 10) < 1e-9
    assert abs(fit.r_squared - 1.0) < 1e-9


def test_linear_fit_needs_two_distinct_points():
    assert linear_fit([1], [10]) is None
    assert linear_fit([2, 2], [10, 20]) is None


def test_fit_r_squared_in_range():
    fit = linear_fit([1, 2, 3, 4], [3, 9, 4, 12])
    assert fit is not None and 0.0 <= fit.r_squared <= 1.0


def test_site_counts_must_increase(tmp_path):
    with pytest.raises(BenchError):
        run_bench([2, 1], triples_per_site=100, dest=tmp_path)


def test_report_formats():
    report = BenchReport(
        points=[BenchPoint(1, 500, 30_000_000, 12.5, 14.0),
                BenchPoint(2, 1000, 60_000_000, 24.0, 29.0)],
        fits={"memory_vs_sites": LinearFit(3e7, 0.0, 0.999),
              "latency_vs_sites": None},
    )
    csv = report.to_csv()
    assert csv.splitlines()[0] == "N,triples,memBytes,meanMs,p95Ms"
    assert "1,500,30000000,12.50,14.00" in csv
    table = report.table()
    assert "sites" in table and "undefined" in table


def test_single_point_run_flags_fit_undefined(tmp_path):
    report = run_bench([1], triples_per_site=300, repetitions=1, dest=tmp_path / "b")
    assert len(report.points) == 1
    assert report.fits["memory_vs_sites"] is None
    assert report.fits["latency_vs_sites"] is None
    point = report.points[0]
    assert point.peak_memory_bytes > 0
    assert point.mean_ms > 0
    assert point.total_triples > 0


def test_two_point_smoke_run(tmp_path):
    report = run_bench([1, 2], triples_per_site=400, repetitions=2, dest=tmp_path / "b")
    assert [p.sites for p in report.points] == [1, 2]
    assert report.points[1].peak_memory_bytes > report.points[0].peak_memory_bytes
    assert report.points[1].total_triples > report.points[0].total_triples
    assert report.fits["memory_vs_sites"] is not None
