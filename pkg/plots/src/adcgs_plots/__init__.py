from .render import (
    PlotError,
    PlotSpec,
    RUN_COLUMNS,
    SUMMARY_COLUMNS,
    build_figure,
    clip_series,
    load_series,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "PlotError",
    "PlotSpec",
    "RUN_COLUMNS",
    "SUMMARY_COLUMNS",
    "build_figure",
    "clip_series",
    "load_series",
    "render",
]
