"""Chorin-Temam Stokes solver with a posteriori time-error estimators."""

from ._core import (
    AnalyticStokes,
    ExperimentConfig,
    Mesh,
    MeshStatistics,
    Rect,
    ResultRow,
    build_structured_mesh,
    csv_text,
    gnuplot_eff2_text,
    parse_config_file,
    parse_config_text,
    run_experiment,
    selftest,
    write_csv,
)

__all__ = [
    "AnalyticStokes",
    "ExperimentConfig",
    "Mesh",
    "MeshStatistics",
    "Rect",
    "ResultRow",
    "build_structured_mesh",
    "csv_text",
    "gnuplot_eff2_text",
    "parse_config_file",
    "parse_config_text",
    "run_experiment",
    "selftest",
    "write_csv",
]
