"""Report rendering over oco-control benchmark outputs."""

from .report import ReportError, ReportSpec, RunSpec, fit_loglog_slope, render_report

__all__ = ["ReportError", "ReportSpec", "RunSpec", "fit_loglog_slope", "render_report"]
