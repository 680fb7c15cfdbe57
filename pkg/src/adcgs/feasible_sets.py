"""Constraint sets with exact linear minimization oracles, diameters, and projections.

Three sets are supported:

* ``Simplex``: the "<= 1" simplex {x >= 0, sum(x) <= 1}, vertices {0, e_1, ..., e_n}
* ``L2Ball``: {x : ||x|| <= r}
* ``KSparsePolytope``: {x : ||x||_1 <= kappa*K, ||x||_inf <= kappa}

All LMO tie-breaking is deterministic so that repeated runs produce identical traces.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ContractViolation, NumericalAbort, OracleCounters, UnsupportedOperation, as_vector


class FeasibleSet:
    """Base class: a compact convex set exposing an LMO and a closed-form diameter."""

    kind = "abstract"

    def __init__(self, dim: int):
        if dim < 1:
            raise ContractViolation("dimension must be >= 1")
        self.dim = int(dim)

    def _check_dim(self, c: np.ndarray) -> np.ndarray:
        c = as_vector(c)
        if c.shape[0] != self.dim:
            raise ContractViolation(f"vector length {c.shape[0]} != set dimension {self.dim}")
        return c

    def lmo(self, c: np.ndarray, counters: OracleCounters | None = None) -> np.ndarray:
        c = self._check_dim(c)
        if not np.all(np.isfinite(c)):
            raise ContractViolation("LMO direction must be finite")
        if counters is not None:
            counters.add_lmo()
        return self._lmo(c)

    def _lmo(self, c: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, x: np.ndarray, counters: OracleCounters | None = None) -> np.ndarray:
        raise UnsupportedOperation(f"projection unsupported for set kind '{self.kind}'")

    @property
    def supports_projection(self) -> bool:
        return False

    def diameter(self) -> float:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def fw_gap(self, grad: np.ndarray, x: np.ndarray,
               counters: OracleCounters | None = None) -> float:
        """Frank-Wolfe gap <grad, x - lmo(grad)> at a feasible point x.

        Slightly negative values caused by floating point rounding are clamped to
        zero; a clearly negative gap means x is infeasible and raises.
        """
        grad = self._check_dim(grad)
        x = self._check_dim(x)
        v = self.lmo(grad, counters)
        gap = float(np.dot(grad, x - v))
        if gap >= 0.0:
            return gap
        # rounding slack scales with the magnitudes entering the inner product
        slack = 1e-12 * max(1.0, float(np.linalg.norm(grad)) * float(np.linalg.norm(x - v)))
        if gap >= -slack:
            return 0.0
        raise NumericalAbort(f"negative FW gap {gap}: point is infeasible for {self.kind}")


class Simplex(FeasibleSet):
    """The "<= 1" simplex, including the origin."""

    kind = "simplex"

    def _lmo(self, c: np.ndarray) -> np.ndarray:
        v = np.zeros(self.dim)
        i = int(np.argmin(c))  # argmin returns the smallest index on ties
        if c[i] < 0.0:
            v[i] = 1.0
        return v

    @property
    def supports_projection(self) -> bool:
        return True

    def project(self, x: np.ndarray, counters: OracleCounters | None = None) -> np.ndarray:
        x = self._check_dim(x)
        if counters is not None:
            counters.add_projection()
        clipped = np.maximum(x, 0.0)
        if clipped.sum() <= 1.0:
            return clipped
        # active sum constraint: sort-based projection onto {x >= 0, sum(x) = 1}
        u = np.sort(x)[::-1]
        css = np.cumsum(u) - 1.0
        rho = np.nonzero(u - css / np.arange(1, self.dim + 1) > 0)[0][-1]
        theta = css[rho] / (rho + 1.0)
        return np.maximum(x - theta, 0.0)

    def diameter(self) -> float:
        return math.sqrt(2.0) if self.dim >= 2 else 1.0

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = self._check_dim(x)
        return bool(np.all(x >= -tol) and x.sum() <= 1.0 + tol)

    def __repr__(self):
        return f"Simplex(n={self.dim})"


class L2Ball(FeasibleSet):
    """Euclidean ball of radius r centered at the origin."""

    kind = "l2_ball"

    def __init__(self, dim: int, radius: float):
        super().__init__(dim)
        if radius <= 0:
            raise ContractViolation("radius must be positive")
        self.radius = float(radius)

    def _lmo(self, c: np.ndarray) -> np.ndarray:
        nc = np.linalg.norm(c)
        if nc == 0.0:
            return np.zeros(self.dim)
        return -(self.radius / nc) * c

    @property
    def supports_projection(self) -> bool:
        return True

    def project(self, x: np.ndarray, counters: OracleCounters | None = None) -> np.ndarray:
        x = self._check_dim(x)
        if counters is not None:
            counters.add_projection()
        nx = np.linalg.norm(x)
        if nx <= self.radius:
            return x.copy()
        return (self.radius / nx) * x

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = self._check_dim(x)
        return bool(np.linalg.norm(x) <= self.radius + tol)

    def __repr__(self):
        return f"L2Ball(n={self.dim}, r={self.radius})"


class KSparsePolytope(FeasibleSet):
    """Intersection of the scaled l1 ball (kappa*K) and l-infinity ball (kappa).

    Vertices are vectors with exactly K entries equal to +-kappa.
    """

    kind = "ksparse_polytope"

    def __init__(self, dim: int, K: int, kappa: float):
        super().__init__(dim)
        if not 1 <= K <= dim:
            raise ContractViolation("need 1 <= K <= n")
        if kappa <= 0:
            raise ContractViolation("kappa must be positive")
        self.K = int(K)
        self.kappa = float(kappa)

    def _lmo(self, c: np.ndarray) -> np.ndarray:
        v = np.zeros(self.dim)
        # K largest |c_i|, ties resolved toward the smallest index
        idx = np.argsort(-np.abs(c), kind="stable")[: self.K]
        # sign(0) treated as +1 so that zero components contribute zero value
        v[idx] = -self.kappa * np.where(c[idx] >= 0.0, 1.0, -1.0)
        return v

    def diameter(self) -> float:
        # opposite-sign vertices on a shared support: ||x - y|| = 2*kappa*sqrt(K)
        return 2.0 * self.kappa * math.sqrt(self.K)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = self._check_dim(x)
        return bool(
            np.abs(x).sum() <= self.kappa * self.K + tol
            and np.abs(x).max(initial=0.0) <= self.kappa + tol
        )

    def __repr__(self):
        return f"KSparsePolytope(n={self.dim}, K={self.K}, kappa={self.kappa})"


def set_from_config(spec: str, dim: int) -> FeasibleSet:
    """Build a feasible set from a harness configuration string.

    Accepted forms: "simplex", "l2ball:r=<float>", "ksparse:K=<int>,kappa=<float>".
    """
    name, _, args = spec.partition(":")
    kv = {}
    if args:
        for part in args.split(","):
            key, _, val = part.partition("=")
            if not val:
                raise ContractViolation(f"malformed set parameter '{part}' in '{spec}'")
            kv[key.strip()] = val.strip()
    if name == "simplex":
        return Simplex(dim)
    if name == "l2ball":
        return L2Ball(dim, radius=float(kv["r"]))
    if name == "ksparse":
        return KSparsePolytope(dim, K=int(kv["K"]), kappa=float(kv["kappa"]))
    raise ContractViolation(f"unknown set kind '{name}'")
