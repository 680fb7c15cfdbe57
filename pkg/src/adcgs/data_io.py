"""Dataset loading, standardization, synthetic instances, and reference optima.

Supports the LIBSVM text format (sparse "label idx:val ..." lines, optionally
gzipped), per-column standardization, seeded synthetic least-squares instances
over the simplex and the euclidean ball, and computation of high-accuracy
reference solutions for primal-gap reporting.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .core import ContractViolation
from .feasible_sets import FeasibleSet, L2Ball, Simplex
from .objectives import LeastSquares, Objective, smallest_eigenvalue

# rows are densified once below this column count, kept sparse above it
DENSIFY_MAX_COLUMNS = 4096

# pseudo-random generator pinned for reproducibility of synthetic instances
RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass
class Dataset:
    """Feature matrix, targets, and standardization metadata. Immutable by convention."""

    A: object                       # ndarray or scipy.sparse CSR
    b: np.ndarray
    feature_means: np.ndarray | None = None
    feature_stds: np.ndarray | None = None
    label_map: str = "none"

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def _map_labels(labels: np.ndarray) -> tuple[np.ndarray, str]:
    uniq = set(np.unique(labels).tolist())
    if uniq <= {-1.0, 1.0}:
        return labels, "passthrough"
    if uniq <= {0.0, 1.0}:
        return np.where(labels == 0.0, -1.0, 1.0), "0/1"
    if uniq <= {1.0, 2.0}:
        return np.where(labels == 1.0, -1.0, 1.0), "1/2"
    if len(uniq) <= 2:
        raise ContractViolation(f"unrecognized binary label convention: {sorted(uniq)}")
    return labels, "none"  # many distinct values: regression targets, left as-is


def parse_libsvm(lines) -> Dataset:
    """Parse LIBSVM-format lines into a Dataset.

    Each line is "<label> <idx>:<val> ...", indices 1-based and strictly
    increasing within a line; '#' starts a comment. Binary labels in the
    {0,1}, {1,2}, or {-1,+1} conventions are mapped to {-1,+1}.
    """
    labels: list[float] = []
    rows: list[list[tuple[int, float]]] = []
    max_idx = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise ContractViolation(f"line {lineno}: malformed label '{tokens[0]}'")
        row: list[tuple[int, float]] = []
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ContractViolation(f"line {lineno}: malformed token '{tok}'")
            try:
                idx, val = int(idx_s), float(val_s)
            except ValueError:
                raise ContractViolation(f"line {lineno}: malformed token '{tok}'")
            if idx < 1:
                raise ContractViolation(f"line {lineno}: nonpositive index {idx}")
            if idx <= prev:
                raise ContractViolation(
                    f"line {lineno}: index {idx} not strictly increasing")
            prev = idx
            row.append((idx, val))
        rows.append(row)
        max_idx = max(max_idx, prev)
    if not rows:
        raise ContractViolation("empty dataset")
    m, n = len(rows), max_idx
    data, indices, indptr = [], [], [0]
    for row in rows:
        for idx, val in row:
            indices.append(idx - 1)
            data.append(val)
        indptr.append(len(data))
    A = sp.csr_matrix((data, indices, indptr), shape=(m, n), dtype=np.float64)
    if n <= DENSIFY_MAX_COLUMNS:
        A = A.toarray()
    b, label_map = _map_labels(np.asarray(labels, dtype=np.float64))
    return Dataset(A=A, b=b, label_map=label_map)


def serialize_libsvm(ds: Dataset) -> str:
    """Inverse of parse_libsvm (on already-mapped labels); floats via repr."""
    A = ds.A.toarray() if sp.issparse(ds.A) else np.asarray(ds.A)
    out = []
    for i in range(ds.m):
        parts = [repr(float(ds.b[i]))]
        for j in np.nonzero(A[i])[0]:
            parts.append(f"{j + 1}:{float(A[i, j])!r}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def load_libsvm(path) -> Dataset:
    """Read a LIBSVM file from disk, transparently decompressing .gz files."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt") as fh:
        return parse_libsvm(fh)


def write_sidecar(ds: Dataset, path) -> None:
    """Write a JSON sidecar with shape, label mapping, and standardization metadata."""
    meta = {
        "m": ds.m,
        "n": ds.n,
        "label_map": ds.label_map,
        "rng_algorithm": RNG_ALGORITHM,
        "feature_means": None if ds.feature_means is None else ds.feature_means.tolist(),
        "feature_stds": None if ds.feature_stds is None else ds.feature_stds.tolist(),
    }
    Path(path).write_text(json.dumps(meta, indent=1) + "\n")


def standardize(ds: Dataset) -> Dataset:
    """Per-column centering and scaling by the population standard deviation.

    Constant columns are centered and left with divisor 1. Densifies the
    matrix (centering destroys sparsity anyway).
    """
    if ds.m < 2:
        raise ContractViolation("standardize needs at least 2 rows")
    A = ds.A.toarray() if sp.issparse(ds.A) else np.array(ds.A, dtype=np.float64)
    means = A.mean(axis=0)
    stds = A.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    A = (A - means) / stds
    return Dataset(A=A, b=ds.b.copy(), feature_means=means, feature_stds=stds,
                   label_map=ds.label_map)


@dataclass
class SyntheticSpec:
    """Seeded synthetic least-squares instance description."""

    kind: str
    m: int
    n: int
    seed: int
    radius: float = 1.0  # ball kind only

    def __post_init__(self):
        if self.kind not in ("simplex_lsq", "ball_lsq_strongly_convex"):
            raise ContractViolation(f"unknown synthetic kind '{self.kind}'")
        if self.m < 1 or self.n < 1:
            raise ContractViolation("m and n must be positive")
        if self.kind == "ball_lsq_strongly_convex" and self.m < self.n:
            raise ContractViolation("strongly convex kind needs m >= n")


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, np.ndarray]:
    """Deterministic synthetic instance; returns (dataset, planted solution).

    simplex_lsq: A ~ U[0,1], x* the simplex projection of a uniform vector,
    b = A x*, so the least-squares optimum is 0 at a feasible point.

    ball_lsq_strongly_convex: A ~ U[0,1] shifted by 0.5 on the (padded)
    diagonal and resampled until the smallest singular value is >= 0.5;
    the planted point has norm 0.9*radius, so the optimum stays interior.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "simplex_lsq":
        A = rng.uniform(0.0, 1.0, (spec.m, spec.n))
        x_star = Simplex(spec.n).project(rng.uniform(0.0, 1.0, spec.n))
        b = A @ x_star
        return Dataset(A=A, b=b), x_star
    pad = 0.5 * np.eye(spec.m, spec.n)
    for _ in range(100):
        A = rng.uniform(0.0, 1.0, (spec.m, spec.n)) + pad
        smin_sq = smallest_eigenvalue(A)
        if smin_sq >= 0.25:  # sigma_min(A) >= 0.5
            break
    else:
        raise ContractViolation("could not reach the singular-value floor")
    x_tilde = rng.standard_normal(spec.n)
    x_tilde *= 0.9 * spec.radius / np.linalg.norm(x_tilde)
    b = A @ x_tilde
    return Dataset(A=A, b=b), x_tilde


def synthetic_problem(spec: SyntheticSpec) -> tuple[Objective, FeasibleSet, float]:
    """Objective, feasible set, and exact optimal value for a synthetic spec."""
    ds, _ = generate_synthetic(spec)
    obj = LeastSquares(ds.A, ds.b)
    if spec.kind == "simplex_lsq":
        return obj, Simplex(spec.n), 0.0
    return obj, L2Ball(spec.n, spec.radius), 0.0


def reference_solution(obj: Objective, feasible_set: FeasibleSet,
                       tol: float = 1e-13, max_iter: int = 100000
                       ) -> tuple[np.ndarray, float, bool]:
    """High-accuracy solve for primal-gap reporting.

    Uses the exact-projection accelerated solver when the set supports
    projection, the LMO-based solver otherwise. Returns
    (x_ref, f_ref, converged); on non-convergence the best point seen is
    returned with converged = False.
    """
    from .baselines import BaselineConfig, run_acfgm
    from .solver import ScheduleConfig, run

    x0 = feasible_set.lmo(np.zeros(feasible_set.dim))
    if feasible_set.supports_projection:
        res = run_acfgm(obj, feasible_set,
                        BaselineConfig(algorithm="acfgm", max_iter=max_iter,
                                       stop_gap=tol), x0)
    else:
        cfg = ScheduleConfig(variant="cor1", outer_stop_gap=tol, max_outer=max_iter)
        res = run(obj, feasible_set, cfg, x0)
    f_best = obj.value(res.x_best)
    return res.x_best, f_best, res.stopped_by_gap
