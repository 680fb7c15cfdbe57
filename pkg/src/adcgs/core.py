"""Shared numeric primitives, oracle call counters, and the per-iteration trace record."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ContractViolation(ValueError):
    """An operation was called outside its contract (e.g. length mismatch)."""


class UnsupportedOperation(ValueError):
    """The requested operation is not available for this configuration."""


class NumericalAbort(RuntimeError):
    """A solver run hit a numerical inconsistency (NaN, negative Bregman, ...)."""


class LineSearchFailure(NumericalAbort):
    """The first-iteration line search did not terminate."""


def as_vector(x) -> np.ndarray:
    """Coerce to a 1-d float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ContractViolation(f"expected a 1-d vector, got shape {v.shape}")
    return v


def _check_same_length(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ContractViolation(f"length mismatch: {a.shape} vs {b.shape}")


def dot(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean inner product of two equal-length vectors."""
    _check_same_length(a, b)
    return float(np.dot(a, b))


def axpy_combine(alpha: float, a: np.ndarray, beta: float, b: np.ndarray) -> np.ndarray:
    """Elementwise alpha*a + beta*b for equal-length vectors."""
    _check_same_length(a, b)
    return alpha * a + beta * b


def norm2(a: np.ndarray) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(a))


def check_finite(x: np.ndarray, what: str = "iterate") -> None:
    """Abort the run on any NaN/Inf instead of letting it propagate."""
    if not np.all(np.isfinite(x)):
        raise NumericalAbort(f"non-finite {what} encountered")


@dataclass
class OracleCounters:
    """Cumulative first-order-oracle, LMO, and projection call counts for one run."""

    foo_calls: int = 0
    lmo_calls: int = 0
    projection_calls: int = 0

    def add_foo(self, n: int = 1) -> None:
        self.foo_calls += n

    def add_lmo(self, n: int = 1) -> None:
        self.lmo_calls += n

    def add_projection(self, n: int = 1) -> None:
        self.projection_calls += n


# Column order of the CSV emitted by the benchmark harness.
TRACE_COLUMNS = [
    "k",
    "foo_calls",
    "lmo_calls",
    "elapsed_seconds",
    "f_value",
    "primal_gap",
    "fw_gap",
    "eta_k",
    "tau_k",
    "delta_k",
    "L_k",
    "L_hat_k",
    "inner_iters_used",
    "hit_cap",
    "certified_bound",
]


@dataclass
class TraceRecord:
    """One per-outer-iteration row of solver metrics."""

    k: int
    foo_calls: int
    lmo_calls: int
    elapsed_seconds: float
    f_value: float
    fw_gap: float
    primal_gap: float | None = None
    eta_k: float = 0.0
    tau_k: float = 0.0
    delta_k: float = 0.0
    L_k: float = 0.0
    L_hat_k: float = 0.0
    inner_iters_used: int = 0
    hit_cap: bool = False
    certified_bound: float | None = None

    def to_csv_row(self) -> list[str]:
        out = []
        for name in TRACE_COLUMNS:
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, bool):
                out.append("1" if v else "0")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out
