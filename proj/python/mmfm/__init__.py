"""Multilevel matrix factor model: estimation, simulation, and metrics."""

from mmfm._core import (
    compute_m,
    compute_w1,
    compute_w2,
    correlation_summary,
    estimate_rank,
    fit,
    ls_solve,
    parameter_count,
    rss_tss,
    simulate,
    subspace_distance,
    sym_eig,
    thin_qr,
    varimax,
)

__all__ = [
    "compute_m",
    "compute_w1",
    "compute_w2",
    "correlation_summary",
    "estimate_rank",
    "fit",
    "ls_solve",
    "parameter_count",
    "rss_tss",
    "simulate",
    "subspace_distance",
    "sym_eig",
    "thin_qr",
    "varimax",
]

__version__ = "0.1.0"
