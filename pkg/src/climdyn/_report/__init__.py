from collections.abc import Sequence
from typing import Optional

import jinja2
import jinja2.sandbox

from ..posterior import MEASURES, GofReport
from ..selection import SelectionReport


def _number(value: Optional[float], digits: int = 4) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def _environment() -> jinja2.Environment:
    env = jinja2.sandbox.SandboxedEnvironment(
        loader=jinja2.PackageLoader("climdyn._report", "resources", encoding="utf-8"),
        autoescape=False,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )
    env.filters["number"] = _number
    return env


def render_gof_table(reports: Sequence[GofReport], *, title: str = "") -> str:
    """Markdown table of observed discrepancies, their intervals and verdicts."""
    template = _environment().get_template("gof_table.md.jinja2")
    alpha = reports[0].alpha if reports else 0.05
    return template.render(
        title=title,
        reports=list(reports),
        measures=MEASURES,
        level=round(100 * (1 - alpha)),
    )


def render_selection(report: SelectionReport) -> str:
    template = _environment().get_template("selection.md.jinja2")
    alpha = report.config.alpha
    return template.render(
        report=report,
        reports=[result.gof for result in report.models],
        measures=MEASURES,
        level=round(100 * (1 - alpha)),
        zeta_prob=report.zeta.zeta_prob.tolist(),
    )


__all__: list[str] = ["render_gof_table", "render_selection"]
