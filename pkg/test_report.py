import json
from fractions import Fraction

import pytest

from app.services.report_service import full_report, report_service


@pytest.fixture(scope="module")
def report():
    return full_report(seed=12345, n=100_000)


def test_report_recovers_twelve_distributions_with_ratio_two(report):
    assert len(report.distributions) == 12
    assert all(r.ratio == 2 for r in report.ratios.values())
    for t in report.tallies:
        assert report.distributions[t.relation].by_label() == t.column_draws


def test_report_case_b_fractions_near_three_eighths(report):
    for fraction in report.case_b_fractions.values():
        assert 0.37 <= float(fraction) <= 0.38
    for label, parts in report.decompositions.items():
        assert parts.total == report.case_b_fractions[label]


def test_report_hull_verdicts(report):
    assert not report.hull["quantum"].feasible
    assert report.hull["quantum"].certificate == "w1 = -1/8"
    assert report.hull["bell_bound"].feasible
    assert report.hull["lad_expected"].weights == (Fraction(1, 16), Fraction(5, 16), Fraction(5, 16), Fraction(5, 16))
    for t in report.tallies:
        verdict = report.hull[f"relation_{t.relation}"]
        assert verdict.feasible
        assert verdict.weights == tuple(Fraction(v, t.n_vectors) for v in t.column_draws.values())


def test_report_device_sections(report):
    assert report.n_trials == 900_000
    assert report.quantum.case_a_same_fraction == 1.0
    assert abs(report.quantum.case_b_same_fraction - 0.25) < 0.003
    assert report.quantum_exact_same[1] == Fraction(1, 4)
    assert all(f in (Fraction(1, 3), Fraction(1)) for f in report.bell.values())
    assert [str(f) for f in report.table_2] == ["1", "1/4", "1/4", "1/4", "1", "1/2", "1/4", "1/2", "1"]
    assert [r.label for r in report.relations] == list(report.distributions)


def test_report_renderings(report):
    payload = json.loads(report.to_json())
    assert payload["seed"] == 12345
    assert payload["table_2"]["matches_published"] is True
    assert len(payload["monte_carlo"]) == 12
    assert payload["hull"]["quantum"]["certificate"] == "w1 = -1/8"
    markdown = report.to_markdown()
    for title in ("Table 1", "Table 2", "Table 3", "Table 4", "Facts 1 and 2", "Convex hull"):
        assert title in markdown


def test_same_seed_same_report():
    a = report_service.full_report(seed=99, n=5_000, chunk_size=2_000)
    b = report_service.full_report(seed=99, n=5_000, chunk_size=2_000, threads=3)
    assert a.to_json() == b.to_json()
