"""Fused attribute/structure optimal-transport alignment between the emotion
and cause representation spaces.

The coupling T (uniform marginals 1/N on both sides) minimizes

    L(T) = alpha * <C_attr, T> + (1 - alpha) * L_struct(T)

where C_attr(i, j) = 1 - cos(h_i_E, h_j_C) and

    L_struct(T) = sum_{i,k,j,l} |AE_ik - AC_jl|^2 T_ij T_kl.

The quadratic structure term is minimized by iterative linearization: at
each outer step the structure cost is frozen at the current plan,

    C_struct(i, j) = sum_{k,l} |AE_ik - AC_jl|^2 T_kl,

and the linear surrogate alpha * C_attr + (1 - alpha) * C_struct is solved
by entropic Sinkhorn scaling in the log domain. A non-monotone guard keeps
the previous iterate and stops whenever an outer step would increase the
exact objective, so the recorded objective trace never rises.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import ContractViolation, HyperParams, ensure_finite, frozen, stable_softmax


@dataclass(frozen=True)
class TransportPlan:
    """Converged coupling T, its row-softmax sharpening, and the solve trace.

    T rows and columns each sum to 1/N at convergence; T_tilde rows are full
    softmax(T_row / tau_r) over all N columns and sum to 1.
    """

    T: np.ndarray
    T_tilde: np.ndarray
    objective_trace: tuple[float, ...]
    iterations_used: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "T", frozen(self.T))
        object.__setattr__(self, "T_tilde", frozen(self.T_tilde))
        object.__setattr__(self, "objective_trace", tuple(float(v) for v in self.objective_trace))


def attr_cost(H_E: np.ndarray, H_C: np.ndarray) -> np.ndarray:
    """Attribute cost C(i, j) = 1 - cos(h_i_E, h_j_C), entries in [0, 2].

    Rows with zero norm take cosine 0 (cost 1), matching the shared
    zero-norm convention.
    """
    H_E = np.asarray(H_E, dtype=np.float64)
    H_C = np.asarray(H_C, dtype=np.float64)
    if H_E.ndim != 2 or H_C.ndim != 2 or H_E.shape != H_C.shape:
        raise ContractViolation(
            f"attr_cost needs equal-shape row matrices, got {H_E.shape} and {H_C.shape}"
        )
    norm_e = np.linalg.norm(H_E, axis=1)
    norm_c = np.linalg.norm(H_C, axis=1)
    safe_e = np.where(norm_e > 0.0, norm_e, 1.0)
    safe_c = np.where(norm_c > 0.0, norm_c, 1.0)
    cos = (H_E / safe_e[:, None]) @ (H_C / safe_c[:, None]).T
    cos[norm_e == 0.0, :] = 0.0
    cos[:, norm_c == 0.0] = 0.0
    np.clip(cos, -1.0, 1.0, out=cos)
    return 1.0 - cos


def struct_cost_linearized(
    A_E: np.ndarray, A_C: np.ndarray, T: np.ndarray
) -> np.ndarray:
    """Structure cost with the quadratic term frozen at the current plan.

    Expands C(i, j) = sum_{k,l} |AE_ik - AC_jl|^2 T_kl through the
    squared-loss decomposition

        C = (AE o AE) t_row 1^T + 1 t_col^T (AC o AC)^T - 2 AE T AC^T

    with t_row / t_col the row and column marginals of T, matching the
    naive quadruple sum to float accuracy in O(N^3) work.
    """
    A_E, A_C, T = (np.asarray(m, dtype=np.float64) for m in (A_E, A_C, T))
    n = A_E.shape[0]
    if A_E.shape != (n, n) or A_C.shape != (n, n) or T.shape != (n, n):
        raise ContractViolation(
            f"struct_cost_linearized needs three square N x N matrices, got "
            f"{A_E.shape}, {A_C.shape}, {T.shape}"
        )
    t_row = T.sum(axis=1)
    t_col = T.sum(axis=0)
    emit = (A_E * A_E) @ t_row
    receive = (A_C * A_C) @ t_col
    cross = A_E @ T @ A_C.T
    return emit[:, None] + receive[None, :] - 2.0 * cross


def struct_loss(A_E: np.ndarray, A_C: np.ndarray, T: np.ndarray) -> float:
    """Structure consistency loss sum_{i,k,j,l} |AE_ik - AC_jl|^2 T_ij T_kl.

    Identically <struct_cost_linearized(A_E, A_C, T), T>.
    """
    return float(np.sum(struct_cost_linearized(A_E, A_C, T) * T))


def _warm_start_potentials(
    cost: np.ndarray,
    epsilon: float,
    tol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Good initial log potentials (u, v) for the kernel exp(-cost / epsilon).

    Plain alternation contracts very slowly when epsilon is small relative to
    the cost spread, so the potentials are prepared in two phases before the
    main loop ever runs:

    1. Regularization annealing: solve loosely at a large epsilon and halve it
       down to the target, rescaling the potentials by the epsilon ratio
       between stages (the dual potentials of nearby regularization levels
       differ by roughly that factor).
    2. A damped Newton polish on the dual. The marginal-residual Jacobian
       [[diag(row sums), P], [P^T, diag(col sums)]] is the positive
       semidefinite Hessian of the dual objective; a Levenberg-Marquardt
       ridge keeps steps sane when near-zero plan entries make it singular,
       and a backtracking line search on the residual only ever accepts
       improvements.

    Both phases move along the same diag-scaled kernel family the main loop
    uses and leave the fixed point untouched; they only shorten the distance
    the documented alternation has to cover.
    """
    n, m = cost.shape
    log_mu = np.full(n, -np.log(n))
    log_nu = np.full(m, -np.log(m))
    mu = np.exp(log_mu)
    nu = np.exp(log_nu)
    u = np.zeros(n)
    v = np.zeros(m)

    def residual(kernel: np.ndarray, uu: np.ndarray, vv: np.ndarray) -> tuple[np.ndarray, float]:
        with np.errstate(over="ignore", invalid="ignore"):
            plan = np.exp(kernel + uu[:, None] + vv[None, :])
        err = max(
            float(np.max(np.abs(plan.sum(axis=1) - mu))),
            float(np.max(np.abs(plan.sum(axis=0) - nu))),
        )
        return plan, err

    spread = float(np.max(cost) - np.min(cost))
    stage_eps = spread / 2.0
    prev_eps = None
    while stage_eps > epsilon * 1.000001:
        if prev_eps is not None:
            u *= prev_eps / stage_eps
            v *= prev_eps / stage_eps
        kernel = -cost / stage_eps
        for _ in range(25):
            u = log_mu - logsumexp(kernel + v[None, :], axis=1)
            v = log_nu - logsumexp(kernel + u[:, None], axis=0)
            _, err = residual(kernel, u, v)
            if err < 1e-2:
                break
        prev_eps = stage_eps
        stage_eps /= 2.0
    if prev_eps is not None:
        u *= prev_eps / epsilon
        v *= prev_eps / epsilon

    kernel = -cost / epsilon
    ridge = 1e-10
    for _ in range(40):
        plan, err = residual(kernel, u, v)
        if err < tol * 1e-2 or not np.isfinite(err):
            break
        row = plan.sum(axis=1)
        col = plan.sum(axis=0)
        gap = np.concatenate([mu - row, nu - col])
        hess = np.zeros((n + m, n + m))
        hess[:n, :n] = np.diag(row)
        hess[:n, n:] = plan
        hess[n:, :n] = plan.T
        hess[n:, n:] = np.diag(col)
        improved = False
        for _ in range(10):
            try:
                step = np.linalg.solve(hess + ridge * np.eye(n + m), gap)
            except np.linalg.LinAlgError:
                ridge *= 100.0
                continue
            scale = 1.0
            for _ in range(6):
                u_try = u + scale * step[:n]
                v_try = v + scale * step[n:]
                _, err_try = residual(kernel, u_try, v_try)
                if np.isfinite(err_try) and err_try < err:
                    u, v = u_try, v_try
                    improved = True
                    break
                scale *= 0.5
            if improved:
                ridge = max(ridge / 10.0, 1e-12)
                break
            ridge *= 100.0
        if not improved:
            break
    return u, v


def sinkhorn(
    cost: np.ndarray,
    epsilon: float,
    max_iters: int = 500,
    tol: float = 1e-7,
) -> np.ndarray:
    """Entropic optimal transport with uniform marginals, solved in the log
    domain.

    Alternates the row and column potential updates on the kernel
    exp(-cost / epsilon) until the worst row/column marginal residual
    (max-norm against 1/n resp. 1/m) drops below tol or the iteration cap is
    hit. Log-domain scaling survives small epsilon without underflow; the
    returned plan is strictly positive and never NaN.

    The potentials are initialized by `_warm_start_potentials` (epsilon
    annealing plus a damped Newton polish on the dual) so the alternation
    starts near its fixed point even when epsilon is small relative to the
    cost spread; the warm start does not count against max_iters and does
    not change the limit the alternation converges to.

    Parameters
    ----------
    cost : ndarray, shape (n, m)
        Finite cost matrix.
    epsilon : float
        Entropy regularization strength, > 0.
    max_iters : int
        Iteration cap on the alternating updates.
    tol : float
        Max-norm marginal residual target.

    Returns
    -------
    plan : ndarray, shape (n, m)
        Nonnegative coupling with row sums 1/n and column sums 1/m.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ContractViolation(f"cost must be a matrix, got shape {cost.shape}")
    if epsilon <= 0.0:
        raise ContractViolation(f"epsilon must be > 0, got {epsilon}")
    ensure_finite(cost, "sinkhorn cost")

    n, m = cost.shape
    log_mu = -np.log(n)
    log_nu = -np.log(m)
    log_kernel = -cost / epsilon
    u, v = _warm_start_potentials(cost, epsilon, tol)

    plan = np.exp(log_kernel + u[:, None] + v[None, :])
    for _ in range(max_iters):
        u = log_mu - logsumexp(log_kernel + v[None, :], axis=1)
        v = log_nu - logsumexp(log_kernel + u[:, None], axis=0)
        plan = np.exp(log_kernel + u[:, None] + v[None, :])
        err_rows = np.max(np.abs(plan.sum(axis=1) - 1.0 / n))
        err_cols = np.max(np.abs(plan.sum(axis=0) - 1.0 / m))
        if max(err_rows, err_cols) < tol:
            break
    return ensure_finite(plan, "sinkhorn plan")


def fused_objective(
    C_attr: np.ndarray,
    A_E: np.ndarray,
    A_C: np.ndarray,
    T: np.ndarray,
    alpha: float,
) -> float:
    """Exact fused objective alpha * <C_attr, T> + (1 - alpha) * L_struct(T)."""
    return float(alpha * np.sum(C_attr * T) + (1.0 - alpha) * struct_loss(A_E, A_C, T))


def fgw_align(
    H_E: np.ndarray,
    H_C: np.ndarray,
    A_E: np.ndarray,
    A_C: np.ndarray,
    hp: HyperParams,
) -> TransportPlan:
    """Align emotion-side and cause-side node sets by iterative linearization.

    Starting from the uniform coupling 1/N^2, each outer step freezes the
    structure cost at the current plan, solves the entropic subproblem with
    `sinkhorn`, and evaluates the exact fused objective. Steps that would
    raise the objective are rejected (previous iterate kept, loop stopped);
    otherwise the loop runs until |delta L| < outer_tol or the cap.

    Returns the plan, its row-softmax sharpening at temperature tau_r, the
    objective trace (first entry: objective at the uniform init), and the
    number of accepted outer iterations.
    """
    H_E = np.asarray(H_E, dtype=np.float64)
    H_C = np.asarray(H_C, dtype=np.float64)
    A_E = np.asarray(A_E, dtype=np.float64)
    A_C = np.asarray(A_C, dtype=np.float64)
    n = H_E.shape[0]
    if H_C.shape[0] != n or A_E.shape != (n, n) or A_C.shape != (n, n):
        raise ContractViolation(
            f"fgw_align shapes inconsistent: H {H_E.shape}/{H_C.shape}, "
            f"A {A_E.shape}/{A_C.shape}"
        )
    alpha = hp.alpha

    C_attr = attr_cost(H_E, H_C)
    T = np.full((n, n), 1.0 / (n * n))
    best = fused_objective(C_attr, A_E, A_C, T, alpha)
    trace = [best]
    iterations_used = 0

    for _ in range(hp.outer_iters):
        C_t = alpha * C_attr + (1.0 - alpha) * struct_cost_linearized(A_E, A_C, T)
        candidate = sinkhorn(C_t, hp.epsilon, hp.sinkhorn_iters, hp.sinkhorn_tol)
        value = fused_objective(C_attr, A_E, A_C, candidate, alpha)
        if value > best:
            break
        T = candidate
        iterations_used += 1
        trace.append(value)
        if abs(best - value) < hp.outer_tol:
            best = value
            break
        best = value

    T_tilde = np.stack([stable_softmax(row, hp.tau_r) for row in T])
    return TransportPlan(
        T=T,
        T_tilde=T_tilde,
        objective_trace=tuple(trace),
        iterations_used=iterations_used,
    )
