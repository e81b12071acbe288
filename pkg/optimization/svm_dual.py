"""
AT_k-SVM: the kernel form of MAT_k learning with the hinge loss.

Dual problem (no bias term):

    min_a  1/2 a^T Q a - sum(a)
    s.t.   0 <= a_i <= C/n,   sum(a) <= C k / n,       Q_ij = y_i y_j K(x_i, x_j)

The decision function is f(x) = sum_j a_j y_j K(x_j, x) and the margin
parameter rho = 1 - lambda. The primal in (f, rho) reads

    (1/n) sum_i [rho - y_i f(x_i)]_+ - (k/n) rho + ||f||^2 / (2C),   0 <= rho <= 1

which is the MAT_k hinge objective minus the constant k/n.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh, lstsq

from core.errors import ConvergenceError, ParameterError, ShapeError
from core.kernels import KernelSpec, kernel_matrix
from core.losses import check_binary_targets
from ingestion.dataset import Dataset
from optimization.projection import projection_polytope

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
MAX_ITERS_PER_SAMPLE = 50


@dataclass(frozen=True, eq=False)
class DualSolution:
    alpha: np.ndarray
    support_indices: np.ndarray
    rho: float
    dual_objective: float
    k: int
    C: float
    kernel: KernelSpec
    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    iterations: int = 0

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    def decision_values(self, queries) -> np.ndarray:
        """f evaluated at each row of queries, using the stored expansion."""
        return _expansion(self.alpha, self.labels, self.features, self.kernel, queries)

    def to_dict(self) -> dict:
        """Flat record holding only the support vectors."""
        sv = self.support_indices
        return {
            "alpha": self.alpha[sv].tolist(),
            "labels": self.labels[sv].tolist(),
            "support_vectors": self.features[sv].tolist(),
            "support_indices": sv.tolist(),
            "n": int(self.n),
            "kernel": self.kernel.to_dict(),
            "rho": float(self.rho),
            "dual_objective": float(self.dual_objective),
            "k": int(self.k),
            "C": float(self.C),
            "iterations": int(self.iterations),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "DualSolution":
        """Rebuild a solution over its support vectors only (enough for prediction)."""
        alpha = np.asarray(record["alpha"], dtype=float)
        features = np.asarray(record["support_vectors"], dtype=float)
        if alpha.size == 0:
            features = features.reshape(0, 1)
        return cls(
            alpha=alpha,
            support_indices=np.arange(alpha.size),
            rho=float(record["rho"]),
            dual_objective=float(record["dual_objective"]),
            k=int(record["k"]),
            C=float(record["C"]),
            kernel=KernelSpec.from_dict(record["kernel"]),
            features=features,
            labels=np.asarray(record["labels"], dtype=float),
            iterations=int(record.get("iterations", 0)),
        )


def _expansion(alpha, labels, features, kernel: KernelSpec, queries) -> np.ndarray:
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if alpha.size == 0:
        return np.zeros(queries.shape[0])
    if queries.shape[1] != features.shape[1]:
        raise ShapeError(
            f"query dimension {queries.shape[1]} does not match training dimension {features.shape[1]}"
        )
    return kernel_matrix(kernel, queries, features) @ (alpha * labels)


def _lipschitz(H: np.ndarray) -> float:
    n = H.shape[0]
    top = float(eigvalsh(H, subset_by_index=[n - 1, n - 1])[0])
    return top if top > 1e-12 else 1.0


def _face_step(beta: np.ndarray, grad: np.ndarray, H: np.ndarray, cap: float):
    """
    Newton step on the face of the free coordinates, cut at the first bound it meets.

    On the cap face the step keeps sum(beta) fixed. The step is the minimum-norm
    least-squares solution of the reduced system, so it is a descent direction
    even when the reduced Hessian is singular.

    Returns:
        (beta, blocked) or None when the face offers no decrease.
    """
    idx = np.flatnonzero((beta > 0.0) & (beta < 1.0))
    if idx.size == 0:
        return None
    g = grad[idx]
    H_ff = H[np.ix_(idx, idx)]
    on_cap = bool(np.isfinite(cap) and beta.sum() >= cap * (1.0 - 1e-12))
    if on_cap:
        g = g - g.mean()
        H_ff = H_ff - H_ff.mean(axis=0, keepdims=True)
        H_ff = H_ff - H_ff.mean(axis=1, keepdims=True)

    p = -lstsq(H_ff, g, cond=1e-12)[0]
    if on_cap:
        p -= p.mean()
    slope = float(g @ p)
    if not slope < 0.0:
        return None

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(p > 0.0, (1.0 - beta[idx]) / p, np.where(p < 0.0, -beta[idx] / p, np.inf))
    blocking = int(np.argmin(ratios))
    limit = float(ratios[blocking])
    cap_limit = np.inf
    if np.isfinite(cap) and not on_cap and p.sum() > 0.0:
        cap_limit = max(0.0, (cap - beta.sum()) / p.sum())

    curvature = float(p @ H[np.ix_(idx, idx)] @ p)
    t = min(limit, cap_limit)
    if curvature > 0.0:
        t = min(t, -slope / curvature)

    beta = beta.copy()
    beta[idx] += t * p
    blocked = t >= min(limit, cap_limit)
    if blocked and limit <= cap_limit:
        beta[idx[blocking]] = 1.0 if p[blocking] > 0.0 else 0.0
    np.clip(beta, 0.0, 1.0, out=beta)
    return beta, blocked


def solve_box_cap_qp(
    Q: np.ndarray,
    box_hi: float,
    cap: float,
    tol: float = DEFAULT_TOL,
    max_iters: int = 1000,
    callback=None,
) -> tuple[np.ndarray, int]:
    """
    Projected gradient for min 1/2 a^T Q a - sum(a) over the box-plus-cap polytope.

    Works on beta = a / box_hi, where the box is [0, 1]. Each iteration takes a
    projected step along d = P(beta - s grad) - beta with a Barzilai-Borwein
    trial step s and an exact line search on [0, 1], then minimizes over the
    face of the free coordinates. Both moves are exact line minimizations, so
    the objective never increases. Stops when the unit-step projected gradient
    residual ||beta - P(beta - grad)||_inf <= tol.

    callback, when given, is called with the iterate (on the a scale) after
    every iteration.

    Returns:
        (alpha, iterations used)
    """
    n = Q.shape[0]
    H = box_hi * Q
    cap_beta = cap / box_hi
    beta = np.zeros(n)
    grad = -np.ones(n)
    step = 1.0 / _lipschitz(H)

    for iteration in range(max_iters + 1):
        residual = np.max(np.abs(beta - projection_polytope(beta - grad, 1.0, cap_beta)))
        if residual <= tol:
            return box_hi * beta, iteration
        if iteration == max_iters:
            break
        start = beta

        direction = projection_polytope(beta - step * grad, 1.0, cap_beta) - beta
        Hd = H @ direction
        curvature = float(direction @ Hd)
        slope = float(grad @ direction)
        t = 1.0 if curvature <= 0 else min(1.0, max(0.0, -slope / curvature))
        beta = np.clip(beta + t * direction, 0.0, 1.0)
        grad = H @ beta - 1.0

        # each blocked face step pins one more coordinate
        for _ in range(n):
            moved = _face_step(beta, grad, H, cap_beta)
            if moved is None:
                break
            beta, blocked = moved
            grad = H @ beta - 1.0
            if not blocked:
                break

        # BB step from the whole iteration's move
        s = beta - start
        sy = float(s @ (H @ s))
        step = float(s @ s) / sy if sy > 1e-16 else step
        step = float(np.clip(step, 1e-10, 1e10))
        if callback is not None:
            callback(box_hi * beta)

    raise ConvergenceError(
        f"projected gradient did not reach tol={tol} in {max_iters} iterations "
        f"(residual {residual:.3e})",
        last_iterate=box_hi * beta,
    )


def _recover_rho(alpha: np.ndarray, margins: np.ndarray, box_hi: float, tol: float) -> float:
    floor, ceiling = tol * box_hi, (1.0 - tol) * box_hi
    free = (alpha > floor) & (alpha < ceiling)
    if free.any():
        rho = float(np.median(margins[free]))
    else:
        support = alpha > floor
        rho = float(margins[support].max()) if support.any() else 1.0
    return float(np.clip(rho, 0.0, 1.0))


def dual_solve(
    data: Dataset,
    kernel: KernelSpec,
    C: float,
    k: int,
    tol: float = DEFAULT_TOL,
    max_iters: int | None = None,
) -> DualSolution:
    n = data.n
    check_binary_targets(data.targets)
    if n < 2:
        raise ParameterError(f"dual_solve needs at least 2 samples, got {n}")
    if int(k) != k or not 1 <= k <= n:
        raise ParameterError(f"k must be an integer in [1, {n}], got {k}")
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if max_iters is None:
        max_iters = MAX_ITERS_PER_SAMPLE * n
    if int(max_iters) != max_iters or max_iters < 0:
        raise ParameterError(f"max_iters must be a non-negative integer, got {max_iters}")

    y = data.targets
    Q = np.outer(y, y) * kernel_matrix(kernel, data.features)
    box_hi = C / n
    alpha, iterations = solve_box_cap_qp(Q, box_hi, C * k / n, tol, max_iters)

    Qa = Q @ alpha
    rho = _recover_rho(alpha, Qa, box_hi, tol)
    dual = float(0.5 * alpha @ Qa - alpha.sum())
    support = np.flatnonzero(alpha > tol * box_hi)
    logger.info(
        "AT_k-SVM dual on %s: k=%d C=%g, %d iterations, %d support vectors, rho=%.4f",
        data.name, k, C, iterations, support.size, rho,
    )
    return DualSolution(
        alpha=alpha,
        support_indices=support,
        rho=rho,
        dual_objective=dual,
        k=int(k),
        C=float(C),
        kernel=kernel,
        features=np.array(data.features),
        labels=np.array(y),
        iterations=iterations,
    )


def decision_function(sol: DualSolution, data: Dataset, kernel: KernelSpec, query):
    """
    f(query) = sum_j alpha_j y_j K(x_j, query) over the training sample.

    A 1-D query gives a float; a 2-D array of queries gives one value per row.
    """
    if data.n != sol.n:
        raise ShapeError(f"solution has {sol.n} multipliers but data has {data.n} samples")
    query = np.asarray(query, dtype=float)
    values = _expansion(sol.alpha, data.targets, data.features, kernel, query)
    return float(values[0]) if query.ndim == 1 else values


def training_margins(sol: DualSolution, data: Dataset, kernel: KernelSpec) -> np.ndarray:
    """y_i f(x_i) for every training sample."""
    return data.targets * decision_function(sol, data, kernel, data.features)


def nu_property_check(
    sol: DualSolution, data: Dataset, kernel: KernelSpec, k: int, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """
    Returns:
        (support_fraction, margin_error_fraction). With C = 1 and K(x, x) <= 1
        they bracket k/n: margin_error_fraction <= k/n <= support_fraction.
    """
    n = data.n
    margins = training_margins(sol, data, kernel)
    support_fraction = float(np.sum(sol.alpha > tol * sol.C / n)) / n
    margin_error_fraction = float(np.sum(margins < sol.rho - tol)) / n
    logger.debug(
        "nu check k/n=%.4f: support %.4f, margin errors %.4f",
        k / n, support_fraction, margin_error_fraction,
    )
    return support_fraction, margin_error_fraction


def primal_objective(sol: DualSolution, data: Dataset, kernel: KernelSpec, rho: float | None = None) -> float:
    """Primal (f, rho) objective at the recovered f; rho defaults to sol.rho."""
    n = data.n
    rho = sol.rho if rho is None else float(rho)
    margins = training_margins(sol, data, kernel)
    weighted = sol.alpha * data.targets
    norm_sq = float(weighted @ kernel_matrix(kernel, data.features) @ weighted)
    return float(
        np.maximum(rho - margins, 0.0).mean() - (sol.k / n) * rho + norm_sq / (2.0 * sol.C)
    )


def dual_lower_bound(sol: DualSolution) -> float:
    """The dual value on the primal's scale; never above primal_objective."""
    return -sol.dual_objective / sol.C - sol.k / sol.n


def nu_svr_objective(w, lam: float, data: Dataset, nu: float, C: float) -> float:
    """
    Bias-free nu-SVR primal for a linear model:

        (1/n) sum_i [|y_i - w^T x_i| - lam]_+ + nu * lam + ||w||^2 / (2C)
    """
    w = np.asarray(w, dtype=float)
    if data.features.shape[1] != w.shape[0]:
        raise ShapeError(f"features {data.features.shape} do not match w {w.shape}")
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    tube = np.abs(data.targets - data.features @ w) - lam
    return float(np.maximum(tube, 0.0).mean() + nu * lam + w @ w / (2.0 * C))
