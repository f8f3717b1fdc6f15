import pytest

from defiers.core import Bernoulli, CompletelyRandomized, ExperimentData, Theta
from defiers.evaluation import heatmap, rule_comparison_curve
from defiers.frechet import (
    estimate_marginals,
    frechet_profile,
    frechet_set,
    profile_level_flags,
)
from defiers.reports import (
    AnalysisRequest,
    analyze,
    design_from_dict,
    design_to_dict,
    fmt_float,
    heatmap_csv,
    heatmap_svg,
    profile_csv,
    profile_svg,
    render_text,
    report_from_json,
    report_to_json,
    rule_comparison_csv,
    rule_comparison_svg,
)

SIX = ExperimentData(2, 1, 1, 2)
CR6 = CompletelyRandomized(3, 6)


@pytest.fixture(scope="module")
def six_report():
    return analyze(AnalysisRequest(design=CR6, data=SIX, exact_arithmetic=True))


def test_analyze_six_person(six_report):
    rep = six_report
    assert rep.mle.maximizers == (Theta(0, 4, 2, 0),)
    assert rep.average_effect == pytest.approx(1 / 3)
    assert rep.marginals == (4, 2)
    assert rep.estimated_defier_bounds == (0, 2)
    assert rep.absolute_defier_bounds == (0, 2)  # i0 + c1
    assert [r.mass for r in rep.profile] == pytest.approx([8 / 26, 6 / 26, 12 / 26])
    assert rep.exact_counts == ("12",)


def test_report_json_roundtrip(six_report):
    text = report_to_json(six_report)
    parsed = report_from_json(text)
    assert parsed == six_report
    # emitting again is byte-identical
    assert report_to_json(parsed) == text


def test_analyze_deterministic():
    a = analyze(AnalysisRequest(design=CR6, data=SIX))
    b = analyze(AnalysisRequest(design=CR6, data=SIX))
    assert report_to_json(a) == report_to_json(b)
    assert render_text(a) == render_text(b)


def test_render_text_percentages(six_report):
    text = render_text(six_report)
    assert "33%" in text  # average effect 1/3
    assert "defiers 2 (33%)" in text
    assert "dependent" in text  # per-type range caveat


def test_design_dict_roundtrip():
    for design in (CR6, Bernoulli(0.25)):
        assert design_from_dict(design_to_dict(design)) == design
    with pytest.raises(ValueError):
        design_from_dict({"type": "matched_pairs"})


def test_fmt_float_full_precision():
    v = 0.1234567890123456789
    assert float(fmt_float(v)) == v
    assert fmt_float(1.0) == "1"


def test_profile_csv_columns():
    fs = frechet_set(estimate_marginals(SIX, CR6))
    rows = frechet_profile(fs, SIX, CR6)
    flags = profile_level_flags(rows)
    text = profile_csv(rows, flags)
    lines = text.strip().split("\n")
    assert lines[0] == "defiers,log_likelihood,mass,in_95_set"
    assert len(lines) == 1 + len(rows)
    assert lines[1].startswith("0,")
    assert lines[1].endswith(",true")
    assert lines[2].endswith(",false")


def test_heatmap_csv_shape():
    cells = heatmap(6, 3)
    text = heatmap_csv(cells)
    lines = text.strip().split("\n")
    assert (
        lines[0]
        == "i1,c1,mle_at,mle_co,mle_de,mle_nt,tie_count,types,defiers,fisher_p,fisher_reject_5"
    )
    # unique maximizers at n=6: exactly one row per cell
    assert len(lines) == 1 + 4 * 4
    # row-major ordering by (i1, c1)
    keys = [tuple(map(int, line.split(",")[:2])) for line in lines[1:]]
    assert keys == sorted(keys)


def test_rule_comparison_csv():
    rows = rule_comparison_curve([2, 4])
    text = rule_comparison_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "n,eu_mle,eu_frechet,eu_mono,ratio_frechet,ratio_mono"
    assert len(lines) == 3
    assert lines[1].startswith("2,")


def test_heatmap_svg_structure():
    cells = heatmap(6, 3)
    svg = heatmap_svg(cells)
    assert svg.count("<rect ") == 16  # one per cell
    assert svg.count("data-types=") == 16
    assert 'class="fisher-boundary"' in svg
    assert 'class="type-regions"' in svg
    assert svg.startswith("<svg ")
    assert svg.rstrip().endswith("</svg>")


def test_profile_svg_structure():
    fs = frechet_set(estimate_marginals(SIX, CR6))
    rows = frechet_profile(fs, SIX, CR6)
    flags = profile_level_flags(rows)
    svg = profile_svg(rows, flags)
    assert svg.count("<rect ") == len(rows)
    assert svg.count('data-in-level="false"') == flags.count(False)


def test_rule_comparison_svg_structure():
    rows = rule_comparison_curve([2, 4, 6])
    svg = rule_comparison_svg(rows)
    assert svg.count("<polyline ") == 2
    assert "ratio-frechet" in svg and "ratio-mono" in svg


def test_request_validation():
    with pytest.raises(ValueError):
        AnalysisRequest(design=CR6, data=SIX, credible_level=1.5)


def test_heatmap_csv_emits_each_tied_estimate():
    from defiers.evaluation import HeatmapCell

    cell = HeatmapCell(
        i1=1,
        c1=2,
        mle_set=(Theta(0, 3, 1, 2), Theta(1, 2, 0, 3)),
        defier_count=1,
        type_signature="ACDN",
        fisher_p=1.0,
        fisher_reject_5=False,
    )
    lines = heatmap_csv([[cell]]).strip().split("\n")
    assert len(lines) == 3  # header plus one row per tied estimate
    assert lines[1].startswith("1,2,0,3,1,2,2,")
    assert lines[2].startswith("1,2,1,2,0,3,2,")
