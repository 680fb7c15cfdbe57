"""First-order oracles for the benchmark objectives.

* ``LeastSquares``: 0.5*||Ax - b||^2
* ``LpLoss``: ||Ax - b||_p^p with p > 1 (not globally smooth for p < 2)
* ``Logistic``: sum_i log(1 + exp(-b_i a_i^T x)) with labels in {-1, +1}

The data matrix may be a dense ndarray or a scipy.sparse matrix; iterates are
always dense. Gradient evaluations are the only calls counted as FOO calls:
function values and Bregman divergences reuse cached quantities.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .core import ContractViolation, NumericalAbort, OracleCounters, as_vector


class PowerIterationError(NumericalAbort):
    """Power iteration failed to converge; carries the best estimate found."""

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


def _as_matrix(A):
    if sp.issparse(A):
        return sp.csr_matrix(A).astype(np.float64)
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2:
        raise ContractViolation("data matrix must be 2-d")
    return M


class Objective:
    """Base first-order oracle over f(x) = loss(Ax - b)-style objectives."""

    kind = "abstract"

    def __init__(self, A, b):
        self.A = _as_matrix(A)
        self.b = as_vector(b)
        self.m, self.n = self.A.shape
        if self.b.shape[0] != self.m:
            raise ContractViolation("target length must match the number of rows")

    def _check_x(self, x: np.ndarray) -> np.ndarray:
        x = as_vector(x)
        if x.shape[0] != self.n:
            raise ContractViolation(f"x has length {x.shape[0]}, expected {self.n}")
        return x

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray, counters: OracleCounters | None = None) -> np.ndarray:
        """Gradient of f at x; increments foo_calls."""
        x = self._check_x(x)
        if counters is not None:
            counters.add_foo()
        g = self._gradient(x)
        return np.asarray(g, dtype=np.float64)

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bregman(self, x: np.ndarray, y: np.ndarray,
                fx: float | None = None, fy: float | None = None,
                gy: np.ndarray | None = None) -> float:
        """Bregman divergence D_f(x, y) = f(x) - f(y) - <grad f(y), x - y>.

        Cached values/gradients may be supplied so the call costs no extra FOO
        calls; missing gradients are computed without touching any counters.
        """
        x = self._check_x(x)
        y = self._check_x(y)
        if fx is None:
            fx = self.value(x)
        if fy is None:
            fy = self.value(y)
        if gy is None:
            gy = self.gradient(y)
        d = fx - fy - float(np.dot(gy, x - y))
        if d >= 0.0:
            return d
        scale = max(1.0, abs(fx), abs(fy))
        if d >= -1e-12 * scale:
            return 0.0
        if d < -1e-9 * scale:
            raise NumericalAbort(f"Bregman divergence {d} violates convexity")
        return 0.0

    def global_smoothness(self) -> float | None:
        """Global gradient Lipschitz constant, or None when no finite one exists."""
        return None

    def _lambda_max(self, tol: float = 1e-8, max_iter: int = 10000, seed: int = 0) -> float:
        """Largest eigenvalue of A^T A via power iteration."""
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.n)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = self.A.T @ (self.A @ v)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                return 0.0
            lam_new = float(np.dot(v, w))
            v = w / nw
            if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
                return lam_new
            lam = lam_new
        raise PowerIterationError("power iteration did not converge", best_estimate=lam)


class LeastSquares(Objective):
    """f(x) = 0.5 * ||Ax - b||^2."""

    kind = "least_squares"

    def value(self, x: np.ndarray) -> float:
        x = self._check_x(x)
        r = self.A @ x - self.b
        return 0.5 * float(np.dot(r, r))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return self.A.T @ (self.A @ x - self.b)

    def global_smoothness(self) -> float | None:
        return self._lambda_max()

    def curvature_along(self, d: np.ndarray) -> float:
        """||A d||^2, the quadratic curvature along direction d (for exact line search)."""
        Ad = self.A @ d
        return float(np.dot(Ad, Ad))


class LpLoss(Objective):
    """f(x) = ||Ax - b||_p^p with exponent p > 1."""

    kind = "lp_loss"

    def __init__(self, A, b, p: float):
        super().__init__(A, b)
        if p <= 1.0:
            raise ContractViolation("need p > 1")
        self.p = float(p)

    def value(self, x: np.ndarray) -> float:
        x = self._check_x(x)
        r = self.A @ x - self.b
        return float(np.sum(np.abs(r) ** self.p))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        r = self.A @ x - self.b
        # sign(0) = 0: zero residual components contribute zero, avoiding 0**(p-2) blowups
        g = self.p * np.abs(r) ** (self.p - 1.0) * np.sign(r)
        return self.A.T @ g

    def global_smoothness(self) -> float | None:
        return None


class Logistic(Objective):
    """f(x) = sum_i log(1 + exp(-b_i a_i^T x)) with labels b_i in {-1, +1}."""

    kind = "logistic"

    def __init__(self, A, b):
        super().__init__(A, b)
        labels = np.unique(self.b)
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ContractViolation("logistic labels must be in {-1, +1}")

    def value(self, x: np.ndarray) -> float:
        x = self._check_x(x)
        margins = self.b * (self.A @ x)
        # log(1 + exp(-t)) via logaddexp for stability at large |t|
        return float(np.sum(np.logaddexp(0.0, -margins)))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        margins = self.b * (self.A @ x)
        s = -self.b * expit(-margins)
        return self.A.T @ s

    def global_smoothness(self) -> float | None:
        return self._lambda_max() / 4.0


def local_lipschitz(obj: Objective, x_prev: np.ndarray, x_cur: np.ndarray,
                    g_prev: np.ndarray, g_cur: np.ndarray, first_iter: bool = False,
                    f_prev: float | None = None, f_cur: float | None = None) -> float:
    """Local Lipschitz estimate driving the adaptive stepsizes.

    First iteration: ||g_cur - g_prev|| / ||x_cur - x_prev||.
    Later iterations: ||g_cur - g_prev||^2 / (2 D_f(x_prev, x_cur)), and 0 when the
    divergence vanishes. Gradients are the caller's cached values, so this costs
    zero FOO calls. The 0/0 = 0 convention applies when both points coincide.
    """
    num = float(np.linalg.norm(np.asarray(g_cur) - np.asarray(g_prev)))
    if first_iter:
        den = float(np.linalg.norm(np.asarray(x_cur) - np.asarray(x_prev)))
        if den == 0.0:
            if num == 0.0:
                return 0.0
            raise ContractViolation("first-iteration estimate needs x_prev != x_cur")
        return num / den
    breg = obj.bregman(x_prev, x_cur, fx=f_prev, fy=f_cur, gy=g_cur)
    if breg == 0.0:
        return 0.0
    return num * num / (2.0 * breg)


def lipschitz_ratio(g_a: np.ndarray, g_b: np.ndarray, x_a: np.ndarray, x_b: np.ndarray) -> float:
    """||g_a - g_b|| / ||x_a - x_b|| with the 0/0 = 0 convention."""
    den = float(np.linalg.norm(x_a - x_b))
    num = float(np.linalg.norm(g_a - g_b))
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den


def smallest_eigenvalue(A) -> float:
    """lambda_min(A^T A) via a dense eigen-solve on the (small) Gram matrix."""
    A = _as_matrix(A)
    if sp.issparse(A):
        G = (A.T @ A).toarray()
    else:
        G = A.T @ A
    return float(np.linalg.eigvalsh(G)[0])
