"""Analysis orchestration and report/CSV/SVG emission.

Reports are plain dataclasses with deterministic dict/JSON forms: running the
same analysis twice produces byte-identical output, including tie ordering.
CSV numeric fields use 17-significant-digit formatting; SVG output is
generated directly with no plotting dependency.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from .core import (
    Bernoulli,
    CompletelyRandomized,
    Design,
    ExperimentData,
    Theta,
)
from .frechet import (
    ProfileRow,
    estimate_marginals,
    frechet_profile,
    frechet_set,
    profile_level_flags,
)
from .inference import (
    CredibleSummary,
    MleResult,
    mle,
    monotonicity_mle,
    posterior,
    smallest_credible_set,
)
from .evaluation import HeatmapCell, RuleComparisonRow


def fmt_float(v: float) -> str:
    """Full-precision float formatting used by every CSV field."""
    return format(v, ".17g")


def _pct(v: float) -> str:
    return f"{round(100 * v)}%"


@dataclass(frozen=True)
class AnalysisRequest:
    design: Design
    data: ExperimentData
    credible_level: float = 0.95
    with_frechet_profile: bool = True
    with_monotonicity: bool = True
    exact_arithmetic: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.credible_level < 1.0:
            raise ValueError(
                f"credible level must be in (0,1), got {self.credible_level}"
            )


@dataclass(frozen=True)
class AnalysisReport:
    n: int
    design: Design
    data: ExperimentData
    average_effect: float
    marginals: tuple[int, int]
    estimated_defier_bounds: tuple[int, int]
    absolute_defier_bounds: tuple[int, int]
    mle: MleResult
    credible: CredibleSummary
    monotonicity: MleResult | None = None
    profile: tuple[ProfileRow, ...] | None = None
    profile_in_level: tuple[bool, ...] | None = None
    exact_counts: tuple[str, ...] | None = None  # assignment counts of MLE ties


def analyze(
    request: AnalysisRequest, *, progress: Callable[[str], None] | None = None
) -> AnalysisReport:
    """Run the full single-experiment analysis pipeline."""
    x, design = request.data, request.design

    def note(msg: str) -> None:
        if progress is not None:
            progress(msg)

    note("estimating marginals and defier bounds")
    marginals = estimate_marginals(x, design)
    fs = frechet_set(marginals)
    note(f"grid search over {x.n}-subject parameter space")
    mle_result = mle(x, design)
    mono = monotonicity_mle(x, design) if request.with_monotonicity else None
    note("posterior and smallest credible set")
    post = posterior(x, design)
    credible = smallest_credible_set(post, request.credible_level)
    rows = None
    flags = None
    if request.with_frechet_profile:
        note("profile across the estimated Fréchet set")
        rows = tuple(frechet_profile(fs, x, design))
        flags = tuple(profile_level_flags(list(rows), request.credible_level))
    exact = None
    if request.exact_arithmetic:
        from .likelihood import exact_assignment_count

        exact = tuple(
            str(exact_assignment_count(t, x)) for t in mle_result.maximizers
        )
    return AnalysisReport(
        n=x.n,
        design=design,
        data=x,
        average_effect=x.average_effect(),
        marginals=(marginals.m1, marginals.mc),
        estimated_defier_bounds=(fs.defier_lo, fs.defier_hi),
        absolute_defier_bounds=(0, x.i0 + x.c1),
        mle=mle_result,
        credible=credible,
        monotonicity=mono,
        profile=rows,
        profile_in_level=flags,
        exact_counts=exact,
    )


# ---------------------------------------------------------------------------
# JSON round trip


def design_to_dict(design: Design) -> dict:
    if isinstance(design, CompletelyRandomized):
        return {"type": "completely_randomized", "m": design.m, "n": design.n}
    return {"type": "bernoulli", "p": design.p}


def design_from_dict(d: dict) -> Design:
    if d["type"] == "completely_randomized":
        return CompletelyRandomized(m=d["m"], n=d["n"])
    if d["type"] == "bernoulli":
        return Bernoulli(p=d["p"])
    raise ValueError(f"unknown design type {d.get('type')!r}")


def _theta_dict(t: Theta) -> dict:
    return {"at": t.at, "co": t.co, "de": t.de, "nt": t.nt}


def _theta_from(d: dict) -> Theta:
    return Theta(d["at"], d["co"], d["de"], d["nt"])


def _mle_dict(r: MleResult) -> dict:
    return {
        "maximizers": [_theta_dict(t) for t in r.maximizers],
        "log_likelihood": r.log_likelihood,
        "tie_verified_exact": r.tie_verified_exact,
    }


def _mle_from(d: dict) -> MleResult:
    return MleResult(
        maximizers=tuple(_theta_from(t) for t in d["maximizers"]),
        log_likelihood=d["log_likelihood"],
        tie_verified_exact=d["tie_verified_exact"],
    )


def report_to_dict(report: AnalysisReport) -> dict:
    out = {
        "n": report.n,
        "design": design_to_dict(report.design),
        "data": {
            "i1": report.data.i1,
            "i0": report.data.i0,
            "c1": report.data.c1,
            "c0": report.data.c0,
        },
        "average_effect": report.average_effect,
        "marginals": {"m1": report.marginals[0], "mc": report.marginals[1]},
        "estimated_defier_bounds": list(report.estimated_defier_bounds),
        "absolute_defier_bounds": list(report.absolute_defier_bounds),
        "mle": _mle_dict(report.mle),
        "credible": {
            "level": report.credible.level,
            "member_count": report.credible.member_count,
            "achieved_mass": report.credible.achieved_mass,
            "at_range": list(report.credible.at_range),
            "co_range": list(report.credible.co_range),
            "de_range": list(report.credible.de_range),
            "nt_range": list(report.credible.nt_range),
        },
        "monotonicity": _mle_dict(report.monotonicity)
        if report.monotonicity is not None
        else None,
        "profile": [
            {"defiers": r.defiers, "log_likelihood": r.log_likelihood, "mass": r.mass}
            for r in report.profile
        ]
        if report.profile is not None
        else None,
        "profile_in_level": list(report.profile_in_level)
        if report.profile_in_level is not None
        else None,
        "exact_counts": list(report.exact_counts)
        if report.exact_counts is not None
        else None,
    }
    return out


def report_from_dict(d: dict) -> AnalysisReport:
    cred = d["credible"]
    return AnalysisReport(
        n=d["n"],
        design=design_from_dict(d["design"]),
        data=ExperimentData(**d["data"]),
        average_effect=d["average_effect"],
        marginals=(d["marginals"]["m1"], d["marginals"]["mc"]),
        estimated_defier_bounds=tuple(d["estimated_defier_bounds"]),
        absolute_defier_bounds=tuple(d["absolute_defier_bounds"]),
        mle=_mle_from(d["mle"]),
        credible=CredibleSummary(
            level=cred["level"],
            member_count=cred["member_count"],
            achieved_mass=cred["achieved_mass"],
            at_range=tuple(cred["at_range"]),
            co_range=tuple(cred["co_range"]),
            de_range=tuple(cred["de_range"]),
            nt_range=tuple(cred["nt_range"]),
        ),
        monotonicity=_mle_from(d["monotonicity"])
        if d["monotonicity"] is not None
        else None,
        profile=tuple(
            ProfileRow(r["defiers"], r["log_likelihood"], r["mass"])
            for r in d["profile"]
        )
        if d["profile"] is not None
        else None,
        profile_in_level=tuple(d["profile_in_level"])
        if d["profile_in_level"] is not None
        else None,
        exact_counts=tuple(d["exact_counts"])
        if d["exact_counts"] is not None
        else None,
    )


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_from_json(text: str) -> AnalysisReport:
    return report_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Human-readable text


def _describe_design(design: Design) -> str:
    if isinstance(design, CompletelyRandomized):
        return f"completely randomized, {design.m} of {design.n} in intervention"
    return f"Bernoulli randomization, intervention probability {design.p}"


def _theta_line(t: Theta, n: int) -> str:
    parts = [
        f"{label} {count} ({_pct(count / n)})"
        for label, count in zip(
            ("always takers", "compliers", "defiers", "never takers"), t.counts()
        )
    ]
    return ", ".join(parts)


def render_text(report: AnalysisReport) -> str:
    n = report.n
    lines = [
        "Design-based analysis of the joint distribution of potential outcomes",
        "=" * 70,
        f"design: {_describe_design(report.design)}",
        f"data: i1={report.data.i1} i0={report.data.i0} "
        f"c1={report.data.c1} c0={report.data.c0} (n={n})",
        f"estimated average effect: {report.average_effect:+.4f} "
        f"({_pct(report.average_effect)})",
        "",
        f"estimated marginal takeup counts: {report.marginals[0]} in intervention, "
        f"{report.marginals[1]} in control (of {n})",
        f"absolute defier bounds: {report.absolute_defier_bounds[0]}..."
        f"{report.absolute_defier_bounds[1]} "
        f"(max {_pct(report.absolute_defier_bounds[1] / n)} of the sample)",
        f"estimated defier bounds: {report.estimated_defier_bounds[0]}..."
        f"{report.estimated_defier_bounds[1]} "
        f"(upper bound {_pct(report.estimated_defier_bounds[1] / n)})",
        "",
        "maximum likelihood estimate"
        + (
            ""
            if len(report.mle.maximizers) == 1
            else f" ({len(report.mle.maximizers)}-way tie, equal weights)"
        )
        + ":",
    ]
    for t in report.mle.maximizers:
        lines.append(f"  {_theta_line(t, n)}")
    lines.append(f"  log likelihood: {report.mle.log_likelihood:.6f}")
    if report.exact_counts is not None:
        for t, c in zip(report.mle.maximizers, report.exact_counts):
            lines.append(f"  exact assignment count of {t.counts()}: {c}")
    if report.monotonicity is not None:
        lines.append("")
        lines.append("maximum likelihood under monotonicity (no defiers or no compliers):")
        for t in report.monotonicity.maximizers:
            lines.append(f"  {_theta_line(t, n)}")
        same = set(report.monotonicity.maximizers) == set(report.mle.maximizers)
        lines.append(
            "  matches the unrestricted estimate"
            if same
            else "  differs from the unrestricted estimate"
        )
    c = report.credible
    lines += [
        "",
        f"smallest {_pct(c.level)} credible set: {c.member_count} members, "
        f"mass {c.achieved_mass:.6f}",
        f"  always takers range: {c.at_range[0]}...{c.at_range[1]}",
        f"  compliers range:     {c.co_range[0]}...{c.co_range[1]}",
        f"  defiers range:       {c.de_range[0]}...{c.de_range[1]} "
        f"(max {_pct(c.de_range[1] / n)} of the sample)",
        f"  never takers range:  {c.nt_range[0]}...{c.nt_range[1]}",
        "  note: the four per-type ranges come from one joint credible set and are",
        "  dependent; the type counts must sum to the sample size.",
    ]
    if report.profile is not None:
        lines += ["", "likelihood profile across the estimated Fréchet set:"]
        for row, inside in zip(report.profile, report.profile_in_level or ()):
            mark = "" if inside else " (outside level set)"
            lines.append(
                f"  defiers {row.defiers:4d}: mass {row.mass:.6f}{mark}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV writers


def profile_csv(rows: list[ProfileRow], in_level: list[bool]) -> str:
    out = ["defiers,log_likelihood,mass,in_95_set"]
    for row, flag in zip(rows, in_level):
        out.append(
            f"{row.defiers},{fmt_float(row.log_likelihood)},"
            f"{fmt_float(row.mass)},{str(flag).lower()}"
        )
    return "\n".join(out) + "\n"


def heatmap_csv(cells: list[list[HeatmapCell]]) -> str:
    """One row per cell in row-major (i1, c1) order; tied cells emit one row per estimate."""
    out = ["i1,c1,mle_at,mle_co,mle_de,mle_nt,tie_count,types,defiers,fisher_p,fisher_reject_5"]
    for row in cells:
        for cell in row:
            for t in cell.mle_set:
                out.append(
                    f"{cell.i1},{cell.c1},{t.at},{t.co},{t.de},{t.nt},"
                    f"{len(cell.mle_set)},{cell.type_signature},{cell.defier_count},"
                    f"{fmt_float(cell.fisher_p)},{str(cell.fisher_reject_5).lower()}"
                )
    return "\n".join(out) + "\n"


def rule_comparison_csv(rows: list[RuleComparisonRow]) -> str:
    out = ["n,eu_mle,eu_frechet,eu_mono,ratio_frechet,ratio_mono"]
    for r in rows:
        out.append(
            f"{r.n},{fmt_float(r.eu_mle)},{fmt_float(r.eu_frechet)},"
            f"{fmt_float(r.eu_mono)},{fmt_float(r.ratio_frechet)},"
            f"{fmt_float(r.ratio_mono)}"
        )
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# SVG writers (static markup; tests check structure, not bytes)


def _svg_header(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    ]


def _purple_shade(fraction: float) -> str:
    """Light-to-dark purple ramp; input in [0, 1]."""
    f = min(max(fraction, 0.0), 1.0)
    r = round(245 - 175 * f)
    g = round(240 - 200 * f)
    b = round(250 - 90 * f)
    return f"rgb({r},{g},{b})"


def heatmap_svg(cells: list[list[HeatmapCell]], cell_px: int = 14) -> str:
    """Grid shaded by defier count, with type-region and Fisher boundaries.

    Intervention takeup runs along x, control takeup along y (origin bottom
    left).  Dotted segments separate cells whose MLE type signatures differ;
    the dashed outline bounds the region where the exact test fails to reject
    at the 5% level.
    """
    m = len(cells) - 1
    mc = len(cells[0]) - 1
    margin = 30
    width = margin * 2 + (m + 1) * cell_px
    height = margin * 2 + (mc + 1) * cell_px
    max_defiers = max((c.defier_count for row in cells for c in row), default=0) or 1
    parts = _svg_header(width, height)
    parts.append('<g class="cells">')
    for i1 in range(m + 1):
        for c1 in range(mc + 1):
            cell = cells[i1][c1]
            x = margin + i1 * cell_px
            y = margin + (mc - c1) * cell_px
            fill = _purple_shade(cell.defier_count / max_defiers)
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" '
                f'fill="{fill}" data-types="{cell.type_signature}" '
                f'data-defiers="{cell.defier_count}" '
                f'data-fisher-reject="{str(cell.fisher_reject_5).lower()}"/>'
            )
    parts.append("</g>")

    def boundary_segments(differs) -> list[str]:
        segs = []
        for i1 in range(m + 1):
            for c1 in range(mc + 1):
                x = margin + i1 * cell_px
                y = margin + (mc - c1) * cell_px
                if i1 < m and differs(cells[i1][c1], cells[i1 + 1][c1]):
                    segs.append(
                        f'<line x1="{x + cell_px}" y1="{y}" '
                        f'x2="{x + cell_px}" y2="{y + cell_px}"/>'
                    )
                if c1 < mc and differs(cells[i1][c1], cells[i1][c1 + 1]):
                    segs.append(
                        f'<line x1="{x}" y1="{y}" x2="{x + cell_px}" y2="{y}"/>'
                    )
        return segs

    parts.append(
        '<g class="type-regions" stroke="black" stroke-width="1" '
        'stroke-dasharray="1,2" fill="none">'
    )
    parts += boundary_segments(lambda a, b: a.type_signature != b.type_signature)
    parts.append("</g>")
    parts.append(
        '<g class="fisher-boundary" stroke="grey" stroke-width="1.5" '
        'stroke-dasharray="4,3" fill="none">'
    )
    parts += boundary_segments(lambda a, b: a.fisher_reject_5 != b.fisher_reject_5)
    parts.append("</g>")
    parts.append(
        f'<text x="{margin}" y="{height - 8}" font-size="10">takeup in intervention '
        f"(0...{m})</text>"
    )
    parts.append(
        f'<text x="8" y="{margin - 8}" font-size="10">takeup in control (0...{mc})</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def profile_svg(
    rows: list[ProfileRow], in_level: list[bool], width: int = 640, height: int = 360
) -> str:
    """Bar chart of within-set masses; bars outside the level set are lighter."""
    margin = 40
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    max_mass = max((r.mass for r in rows), default=0.0) or 1.0
    bar_w = plot_w / max(len(rows), 1)
    parts = _svg_header(width, height)
    parts.append('<g class="bars">')
    for k, (row, inside) in enumerate(zip(rows, in_level)):
        h = plot_h * row.mass / max_mass
        x = margin + k * bar_w
        y = margin + plot_h - h
        fill = "#5b3a8c" if inside else "#cbb8e6"
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w * 0.85:.2f}" '
            f'height="{h:.2f}" fill="{fill}" data-defiers="{row.defiers}" '
            f'data-in-level="{str(inside).lower()}"/>'
        )
    parts.append("</g>")
    parts.append(
        f'<line x1="{margin}" y1="{margin + plot_h}" x2="{margin + plot_w}" '
        f'y2="{margin + plot_h}" stroke="black"/>'
    )
    parts.append(
        f'<text x="{margin}" y="{height - 10}" font-size="11">defiers '
        f"({rows[0].defiers}...{rows[-1].defiers})</text>"
    )
    parts.append(
        f'<text x="10" y="{margin - 10}" font-size="11">normalized mass</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def rule_comparison_svg(
    rows: list[RuleComparisonRow], width: int = 640, height: int = 360
) -> str:
    """Two ratio curves (maximum likelihood over each alternative rule)."""
    margin = 45
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    xs = [r.n for r in rows]
    series = {
        "ratio-frechet": [r.ratio_frechet for r in rows],
        "ratio-mono": [r.ratio_mono for r in rows],
    }
    top = max(v for vals in series.values() for v in vals)
    lo, hi = 1.0, max(top, 1.0 + 1e-9)
    x0, x1 = min(xs), max(xs)

    def px(nv: float) -> float:
        return margin + plot_w * ((nv - x0) / (x1 - x0) if x1 > x0 else 0.5)

    def py(v: float) -> float:
        return margin + plot_h * (1 - (v - lo) / (hi - lo))

    parts = _svg_header(width, height)
    colors = {"ratio-frechet": "#1f77b4", "ratio-mono": "#d62728"}
    for name, vals in series.items():
        points = " ".join(f"{px(n):.2f},{py(v):.2f}" for n, v in zip(xs, vals))
        parts.append(
            f'<polyline class="{name}" fill="none" stroke="{colors[name]}" '
            f'stroke-width="2" points="{points}"/>'
        )
    parts.append(
        f'<line x1="{margin}" y1="{py(1.0)}" x2="{margin + plot_w}" '
        f'y2="{py(1.0)}" stroke="#888" stroke-dasharray="3,3"/>'
    )
    parts.append(
        f'<text x="{margin}" y="{height - 12}" font-size="11">sample size '
        f"({x0}...{x1})</text>"
    )
    parts.append(
        f'<text x="10" y="{margin - 12}" font-size="11">Bayes expected utility '
        "ratio (maximum likelihood rule over alternative)</text>"
    )
    parts.append(
        f'<text x="{width - margin - 170}" y="{margin}" font-size="11" '
        f'fill="{colors["ratio-frechet"]}">over uniform-in-set rule</text>'
    )
    parts.append(
        f'<text x="{width - margin - 170}" y="{margin + 16}" font-size="11" '
        f'fill="{colors["ratio-mono"]}">over monotonicity rule</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
