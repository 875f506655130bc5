import pytest

from ammknn.errors import MalformedReport
from ammknn.svgplot import render_plot


def report(subjects):
    return {
        "subjects": subjects,
        "bounds": {
            "actual": {"fail_below": 350.0, "at_risk_upper": 375.0},
            "predicted": {"fail_below": 350.0, "at_risk_upper": 385.0},
        },
    }


def subject(actual, predicted, outlier=0.0):
    return {"actual": actual, "predicted": predicted, "outlier_value": outlier}


class TestRenderPlot:
    def test_point_and_line_counts(self):
        svg = render_plot(report([subject(400, 390), subject(300, 310)]), "scatter")
        assert svg.count('class="pt"') == 2
        assert svg.count('class="ref"') == 4

    def test_packrat_variant_single_line(self):
        svg = render_plot(report([subject(400, 390, -1.2)]), "packrat_scatter")
        assert svg.count('class="pt"') == 1
        assert svg.count('class="ref"') == 1

    def test_empty_report_axes_and_lines_only(self):
        svg = render_plot(report([]), "scatter")
        assert svg.count('class="pt"') == 0
        assert svg.count('class="ref"') == 4
        assert "n = 0" in svg

    def test_caption_correlation_format(self):
        subjects = [subject(300, 300), subject(400, 400), subject(500, 500)]
        svg = render_plot(report(subjects), "scatter")
        assert "r = 1" in svg

    def test_unknown_kind(self):
        with pytest.raises(MalformedReport):
            render_plot(report([]), "pie")

    def test_missing_sections(self):
        with pytest.raises(MalformedReport):
            render_plot({"subjects": []}, "scatter")

    def test_packrat_needs_outlier_values(self):
        doc = report([{"actual": 400.0, "predicted": 390.0}])
        with pytest.raises(MalformedReport):
            render_plot(doc, "packrat_scatter")

    def test_deterministic_output(self):
        doc = report([subject(412, 395, 0.4), subject(333, 341, -2.3)])
        assert render_plot(doc, "scatter") == render_plot(doc, "scatter")
