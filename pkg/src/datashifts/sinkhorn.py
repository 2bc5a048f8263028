"""Entropic optimal transport solver.

Log-domain / stabilized-scaling Sinkhorn for the entropy-regularized problem

    min_P  <C, P> + beta * KL(P | mu x nu)   s.t.  P 1 = mu,  P^T 1 = nu

plus an exact linear-programming Wasserstein-1 oracle for small instances.

The reported objective equals, for uniform marginals,
<C, P> + beta * sum P log P + beta * log(n_s * n_t), i.e. the relative
entropy to the product of marginals is carried in full.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .data import CostMatrix

EXACT_ORACLE_MAX_CELLS = 10_000

# large instances cannot reach tight marginal tolerances at small beta within
# a sane iteration budget; the plan is rounded to exact marginals at the end,
# so the stopping tolerance only controls objective accuracy (error is
# bounded by ~2 * max(C) * violation).
DEFAULT_MARGINAL_TOL = 1e-6
DEFAULT_MAX_ITER = 10_000

_CHECK_EVERY = 25
_ABSORB_THRESHOLD = 200.0  # on |log u|, keeps exp() in range
_WARMUP_DECAY = 3.0
_WARMUP_ITERS = 10


class SinkhornConvergenceError(RuntimeError):
    """Raised when the marginal violation does not reach tolerance in time."""

    def __init__(self, iterations: int, violation: float, tolerance: float):
        self.iterations = iterations
        self.violation = violation
        self.tolerance = tolerance
        super().__init__(
            f"sinkhorn did not converge: marginal L1 violation {violation:.3e} "
            f"> tolerance {tolerance:.3e} after {iterations} iterations"
        )


@dataclass(frozen=True)
class SolverConfig:
    beta: float = 1e-3
    max_iterations: int = DEFAULT_MAX_ITER
    marginal_tolerance: float = DEFAULT_MARGINAL_TOL
    log_domain: bool = True

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.marginal_tolerance <= 0:
            raise ValueError("marginal_tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class TransportPlan:
    coupling: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    beta: float
    transport_cost: float
    entropy_term: float
    objective: float

    def __post_init__(self):
        self.coupling.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.coupling.shape

    def marginal_violation(self) -> float:
        """L1 distance of the coupling's marginals from the prescribed ones."""
        row = np.abs(self.coupling.sum(axis=1) - self.row_marginal).sum()
        col = np.abs(self.coupling.sum(axis=0) - self.col_marginal).sum()
        return float(row + col)

    def transposed(self) -> "TransportPlan":
        return TransportPlan(
            self.coupling.T.copy(),
            self.col_marginal,
            self.row_marginal,
            self.beta,
            self.transport_cost,
            self.entropy_term,
            self.objective,
        )


def _check_prob_vector(w, n: int, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"{name} has shape {w.shape}, expected ({n},)")
    if (w <= 0).any() or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} must be a strictly positive probability vector")
    return w


def _round_to_marginals(P: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Project an almost-feasible plan onto the exact marginal polytope.

    Scales rows then columns down to their targets and distributes the
    leftover mass as a rank-one nonnegative correction.
    """
    x = np.minimum(mu / P.sum(axis=1), 1.0)
    P = P * x[:, None]
    y = np.minimum(nu / P.sum(axis=0), 1.0)
    P = P * y[None, :]
    err_r = mu - P.sum(axis=1)
    err_c = nu - P.sum(axis=0)
    s = err_r.sum()
    if s > 0:
        P = P + np.outer(err_r, err_c) / s
    return P


def _log_update(C, pot, logw, bk):
    # returns -bk * logsumexp_j((pot_j - C_ij)/bk + logw_j) over axis 1
    A = (pot[None, :] - C) / bk + logw[None, :]
    m = A.max(axis=1)
    return -bk * (m + np.log(np.exp(A - m[:, None]).sum(axis=1)))


def _sinkhorn_potentials(C, mu, nu, beta, tol, max_iter):
    """Run warm-started stabilized Sinkhorn; returns (plan, iterations, violation)."""
    n, m = C.shape
    logmu = np.log(mu)
    lognu = np.log(nu)
    f = np.zeros(n)
    g = np.zeros(m)
    iterations = 0

    # epsilon-scaling warm start: anneal the regularizer down to beta
    bk = max(C.max(), 4.0 * beta) / 2.0
    Ct = np.ascontiguousarray(C.T)
    while bk > _WARMUP_DECAY * beta and iterations < max_iter:
        for _ in range(_WARMUP_ITERS):
            f = _log_update(C, g, lognu, bk)
            g = _log_update(Ct, f, logmu, bk)
            iterations += 1
        bk /= _WARMUP_DECAY

    def absorbed_kernel():
        return np.exp((f[:, None] + g[None, :] - C) / beta) * np.outer(mu, nu)

    K = absorbed_kernel()
    u = np.ones(n)
    v = np.ones(m)
    violation = np.inf
    while iterations < max_iter:
        steps = min(_CHECK_EVERY, max_iter - iterations)
        for _ in range(steps):
            u = mu / (K @ v)
            v = nu / (K.T @ u)
            iterations += 1
        # column marginals are exact right after the v-update
        row = u * (K @ v)
        violation = float(np.abs(row - mu).sum())
        if violation <= tol:
            break
        lu = np.abs(np.log(u)).max()
        lv = np.abs(np.log(v)).max()
        if lu > _ABSORB_THRESHOLD or lv > _ABSORB_THRESHOLD:
            f = f + beta * np.log(u)
            g = g + beta * np.log(v)
            K = absorbed_kernel()
            u = np.ones(n)
            v = np.ones(m)
    P = (u[:, None] * K) * v[None, :]
    if not np.isfinite(violation):
        violation = float(
            np.abs(P.sum(axis=1) - mu).sum() + np.abs(P.sum(axis=0) - nu).sum()
        )
    return P, iterations, violation


def _plan_from_coupling(P, C, mu, nu, beta) -> TransportPlan:
    cost = float((C * P).sum())
    if beta > 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(P > 0, P * np.log(P / np.outer(mu, nu)), 0.0)
        kl = float(terms.sum())
        entropy_term = beta * max(kl, 0.0)
    else:
        entropy_term = 0.0
    return TransportPlan(
        coupling=P,
        row_marginal=mu,
        col_marginal=nu,
        beta=beta,
        transport_cost=cost,
        entropy_term=entropy_term,
        objective=cost + entropy_term,
    )


def _canonical_orientation(C, mu, nu):
    """Pick a transpose-invariant orientation so sinkhorn(C) and
    sinkhorn(C^T) solve the bitwise-identical problem."""
    n, m = C.shape
    if n < m:
        return C, mu, nu, False
    if n > m:
        return np.ascontiguousarray(C.T), nu, mu, True
    a = C.tobytes()
    b = np.ascontiguousarray(C.T).tobytes()
    if a < b:
        return C, mu, nu, False
    if a > b:
        return np.ascontiguousarray(C.T), nu, mu, True
    if mu.tobytes() <= nu.tobytes():
        return C, mu, nu, False
    return np.ascontiguousarray(C.T), nu, mu, True


def sinkhorn(cost: CostMatrix, mu, nu, config: SolverConfig) -> TransportPlan:
    """Solve entropic OT between discrete measures.

    The returned coupling satisfies the marginal constraints exactly (the
    iterate is rounded onto the marginal polytope); convergence is judged on
    the pre-rounding L1 marginal violation against
    ``config.marginal_tolerance``.
    """
    C = cost.values
    n, m = C.shape
    mu = _check_prob_vector(mu, n, "mu")
    nu = _check_prob_vector(nu, m, "nu")
    if config.beta == 0:
        return exact_w1_plan(cost, mu, nu)
    C2, mu2, nu2, flipped = _canonical_orientation(C, mu, nu)
    P, iterations, violation = _sinkhorn_potentials(
        C2, mu2, nu2, config.beta, config.marginal_tolerance, config.max_iterations
    )
    if violation > config.marginal_tolerance:
        raise SinkhornConvergenceError(iterations, violation, config.marginal_tolerance)
    P = _round_to_marginals(P, mu2, nu2)
    plan = _plan_from_coupling(P, C2, mu2, nu2, config.beta)
    return plan.transposed() if flipped else plan


def exact_w1_plan(cost: CostMatrix, mu, nu) -> TransportPlan:
    """Exact unregularized OT plan via linear programming (small instances)."""
    C = cost.values
    n, m = C.shape
    if n * m > EXACT_ORACLE_MAX_CELLS:
        raise ValueError(
            f"instance with {n}x{m} cells exceeds the exact-oracle limit "
            f"of {EXACT_ORACLE_MAX_CELLS}"
        )
    mu = _check_prob_vector(mu, n, "mu")
    nu = _check_prob_vector(nu, m, "nu")
    # row-sum and column-sum equality constraints; one is redundant but
    # HiGHS copes with the degeneracy
    rows = sparse.kron(sparse.eye(n), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, n)), sparse.eye(m))
    A_eq = sparse.vstack([rows, cols]).tocsr()
    b_eq = np.concatenate([mu, nu])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"exact OT linear program failed: {res.message}")
    P = np.maximum(res.x.reshape(n, m), 0.0)
    P = _round_to_marginals(P, mu, nu)
    return _plan_from_coupling(P, C, mu, nu, 0.0)


def exact_w1(cost: CostMatrix, mu, nu) -> float:
    """Exact Wasserstein-1 value between discrete measures."""
    return exact_w1_plan(cost, mu, nu).transport_cost


def dump_plan_csv(plan: TransportPlan, path) -> None:
    """Debug dump: one line per coupling cell (row, col, mass)."""
    with open(path, "w") as fh:
        fh.write("row,col,mass\n")
        n, m = plan.shape
        for i in range(n):
            for j in range(m):
                fh.write(f"{i},{j},{plan.coupling[i, j]!r}\n")
