"""Weighted sum-MSE minimization by alternating MMSE equalization and
KKT-based precoder updates under per-station power constraints.

At each outer iteration the receivers apply the MMSE equalizer for the
current precoders, then the precoders are recomputed from the KKT
stationarity system at fixed equalizers,

    F_k = (sum_o H_ok^H G_o W_o G_o^H H_ok + sum_j mu_j Phi_kj)^-1 H_kk^H G_k W_k,

with the multipliers mu located by a layered dual search (see solve_duals)
that exits only when every power usage sits on the feasible side of its
budget and the complementary slackness products are certified negligible.
The per-user system can be singular when a radar projector is rank
deficient, so the solve carries a trace-scaled Tikhonov shift and radar
blocks are re-projected onto the projector range afterwards (out-of-range
components affect neither the received signal nor the measured power, so
nulling them is loss-free).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import KIND_PRECODER_INIT, complex_gaussian, matrix_rng
from .equivalence import EquivalentModel, usage_vector
from .numerics import solve_hermitian
from .scenario import Scenario, SolverParams

# Certification level for |mu * (usage - budget)| <= SLACK_TOL * budget.
SLACK_TOL = 1e-4


@dataclass(eq=False)
class IterationTrace:
    """Per-outer-iteration observability of the solve."""

    objective: list[float] = field(default_factory=list)
    power_usage: list[np.ndarray] = field(default_factory=list)
    kkt_residual: list[float] = field(default_factory=list)
    slackness_residual: list[float] = field(default_factory=list)
    dual_converged: list[bool] = field(default_factory=list)


@dataclass(eq=False)
class SolverState:
    F: list[np.ndarray]
    G: list[np.ndarray]
    mu_bs: np.ndarray
    mu_radar: np.ndarray
    Omega: list[np.ndarray]
    iteration: int
    trace: IterationTrace
    converged: bool


@dataclass(frozen=True)
class DualSearchInfo:
    converged: bool
    iterations: int
    max_rel_violation: float
    max_slackness: float


def scenario_weights(s: Scenario) -> list[np.ndarray]:
    return [np.asarray(w, dtype=float) for w in s.W]


def init_precoders(eq: EquivalentModel, s: Scenario, seed: int) -> list[np.ndarray]:
    """Feasible random start: Gaussian blocks, radar blocks projected, then a
    global scale putting the tightest constraint exactly at its budget.

    Radar blocks behind a zero budget (sigma_th = 0) are silenced instead of
    dragging the global scale to zero.
    """
    t = s.topology
    F = []
    zero_budget_radar = s.radar_budget <= 0.0
    for k in range(t.K):
        rng = matrix_rng(seed, KIND_PRECODER_INIT, 0, k)
        F_k = complex_gaussian(rng, eq.m_t[k], s.d[k])
        for l in s.serving.radars_of_user(k):
            rows = eq.block_index[(k, "radar", l)]
            if zero_budget_radar:
                F_k[rows, :] = 0.0
            else:
                P = eq.Phi_radar[k][l][rows, rows]
                F_k[rows, :] = P @ F_k[rows, :]
        F.append(F_k)
    usage = usage_vector(eq, F)
    budgets = np.asarray(s.budgets(), dtype=float)
    active = (usage > 0) & (budgets > 0)
    if np.any(active):
        scale = np.sqrt(np.min(budgets[active] / usage[active]))
        F = [scale * F_k for F_k in F]
    return F


def interference_covariance(eq: EquivalentModel, F: list[np.ndarray], k: int) -> np.ndarray:
    """Omega_k = I + sum_{o != k} H_ko F_o F_o^H H_ko^H."""
    Omega = np.eye(eq.n_r, dtype=np.complex128)
    for o in range(len(eq.m_t)):
        if o == k:
            continue
        HF = eq.H_eff[k][o] @ F[o]
        Omega = Omega + HF @ HF.conj().T
    return Omega


def update_equalizers(
    eq: EquivalentModel, F: list[np.ndarray]
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """MMSE equalizers G_k = (H_kk F_k F_k^H H_kk^H + Omega_k)^-1 H_kk F_k."""
    G = []
    Omega = []
    for k in range(len(eq.m_t)):
        Om = interference_covariance(eq, F, k)
        HF = eq.H_eff[k][k] @ F[k]
        R = HF @ HF.conj().T + Om
        G.append(solve_hermitian(R, HF))
        Omega.append(Om)
    return G, Omega


def mse_matrix(eq: EquivalentModel, F: list[np.ndarray], G: list[np.ndarray], k: int) -> np.ndarray:
    """Error covariance of u_k estimated as G_k^H y_k."""
    HF = eq.H_eff[k][k] @ F[k]
    A = G[k].conj().T @ HF
    Om = interference_covariance(eq, F, k)
    GOmG = G[k].conj().T @ Om @ G[k]
    d = F[k].shape[1]
    return A @ A.conj().T - A - A.conj().T + GOmG + np.eye(d, dtype=np.complex128)


def weighted_sum_mse(
    eq: EquivalentModel, F: list[np.ndarray], G: list[np.ndarray], W: list[np.ndarray]
) -> float:
    """Objective sum_k tr{W_k E_k}."""
    total = 0.0
    for k in range(len(eq.m_t)):
        E = mse_matrix(eq, F, G, k)
        total += float(np.real(np.diag(E)) @ W[k])
    return total


def kkt_matrices(
    eq: EquivalentModel, G: list[np.ndarray], W: list[np.ndarray]
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Quadratic and linear parts of the per-user stationarity system.

    A_k = sum_o H_ok^H G_o W_o G_o^H H_ok,  C_k = H_kk^H G_k W_k.
    """
    K = len(eq.m_t)
    A = []
    C = []
    for k in range(K):
        Ak = np.zeros((eq.m_t[k], eq.m_t[k]), dtype=np.complex128)
        for o in range(K):
            GH = G[o].conj().T @ eq.H_eff[o][k]
            Ak = Ak + GH.conj().T @ (W[o][:, None] * GH)
        A.append(Ak)
        C.append(eq.H_eff[k][k].conj().T @ (G[k] * W[k][None, :]))
    return A, C


def constraint_matrix(eq: EquivalentModel, k: int, mu: np.ndarray) -> np.ndarray:
    """sum_m mu_m Phi_km + sum_l mu_l Phi_kl for user k (mu is BSs then radars)."""
    M = len(eq.Phi_bs[k])
    B = np.zeros((eq.m_t[k], eq.m_t[k]), dtype=np.complex128)
    for m in range(M):
        if mu[m] != 0.0:
            B = B + mu[m] * eq.Phi_bs[k][m]
    for l in range(len(eq.Phi_radar[k])):
        if mu[M + l] != 0.0:
            B = B + mu[M + l] * eq.Phi_radar[k][l]
    return B


def _precoders_from_kkt(
    eq: EquivalentModel,
    A: list[np.ndarray],
    C: list[np.ndarray],
    mu: np.ndarray,
    epsilon: float,
) -> list[np.ndarray]:
    F = []
    for k in range(len(eq.m_t)):
        S = A[k] + constraint_matrix(eq, k, mu)
        tr = float(np.trace(S).real)
        if tr <= 0.0:
            F.append(np.zeros_like(C[k]))
            continue
        shift = epsilon * tr / eq.m_t[k]
        F_k = solve_hermitian(S, C[k], shift)
        for l in range(len(eq.Phi_radar[k])):
            key = (k, "radar", l)
            if key in eq.block_index:
                rows = eq.block_index[key]
                P = eq.Phi_radar[k][l][rows, rows]
                F_k[rows, :] = P @ F_k[rows, :]
        F.append(F_k)
    return F


def update_precoders(
    eq: EquivalentModel,
    G: list[np.ndarray],
    W: list[np.ndarray],
    mu: np.ndarray,
    epsilon: float,
) -> list[np.ndarray]:
    """KKT precoders at fixed equalizers and multipliers.

    Each user's system gets a Tikhonov shift epsilon * tr(S)/dim, and radar
    blocks are re-projected onto their projector range afterwards.
    """
    A, C = kkt_matrices(eq, G, W)
    return _precoders_from_kkt(eq, A, C, mu, epsilon)


def lagrangian_gradient(
    eq: EquivalentModel,
    G: list[np.ndarray],
    W: list[np.ndarray],
    mu: np.ndarray,
    F: list[np.ndarray],
) -> list[np.ndarray]:
    """Conjugate-coordinate gradient of the Lagrangian in each F_k.

    The real-coordinate gradient is twice the real/imaginary parts of these
    matrices.
    """
    A, C = kkt_matrices(eq, G, W)
    return [
        A[k] @ F[k] + constraint_matrix(eq, k, mu) @ F[k] - C[k]
        for k in range(len(eq.m_t))
    ]


def lagrangian_gradient_norm(eq, G, W, mu, F) -> float:
    grads = lagrangian_gradient(eq, G, W, mu, F)
    return float(np.sqrt(sum(np.linalg.norm(g) ** 2 for g in grads)))


# Internal certification levels for the dual search.  Certified points sit on
# the feasible side of every budget and carry a complementary-slackness
# product far below SLACK_TOL, which keeps the outer objective monotone to
# well under its 1e-8 slack.  The absolute dust floor keeps zero budgets
# (sigma_th = 0 radars, whose usage is rounding noise) from being chased.
_CERT_FEAS_REL = 1e-12
_SLACK_ABS_TOL = 1e-10


def _feasible_dust(usage: np.ndarray) -> float:
    return 1e-14 * max(1.0, float(usage.max())) if usage.size else 0.0


def _certified(mu: np.ndarray, usage: np.ndarray, budgets: np.ndarray) -> bool:
    if np.any(usage > budgets * (1.0 + _CERT_FEAS_REL) + _feasible_dust(usage)):
        return False
    return bool(
        np.all(mu * np.abs(usage - budgets) <= _SLACK_ABS_TOL * np.maximum(1.0, budgets))
    )


def solve_duals(
    eq: EquivalentModel,
    G: list[np.ndarray],
    W: list[np.ndarray],
    budgets: np.ndarray,
    params: SolverParams,
    mu0: np.ndarray | None = None,
) -> tuple[np.ndarray, list[np.ndarray], DualSearchInfo]:
    """Find multipliers making the KKT precoders feasible and slack-certified.

    The per-user curvature matrix has rank at most the total stream count,
    so usage is a stiff function of the multipliers (decades of change over
    tiny ranges near zero), and constraints can be strongly coupled (two
    radars serving the same user make the dual degenerate along a valley).
    The search therefore layers three tools over one evaluation budget
    (params.dual_iters precoder evaluations):

      1. projected dual subgradient ascent mu <- max(0, mu + alpha_t * g)
         with diminishing step alpha_t = dual_step/sqrt(t) on budget-
         normalized, clipped violations: cheap navigation on cold starts;
      2. per-constraint bracketed root finds (usage_j is monotone
         non-increasing in mu_j), immune to stiffness: first with a loose
         target to de-escalate order-of-magnitude violations, last with a
         tight target to land every constraint on the feasible side with a
         negligible slackness product;
      3. Levenberg-Marquardt steps in log-multiplier space on the working
         set, whose multiplicative geometry absorbs the stiffness and whose
         joint linearization follows the degenerate valleys that defeat
         coordinate updates.

    If the evaluation budget runs out, the precoders are rescaled into the
    feasible set and the result is flagged.
    """
    budgets = np.asarray(budgets, dtype=float)
    n = budgets.size
    den = np.maximum(budgets, 1e-30)
    scale = np.maximum(1.0, budgets)
    mu = np.zeros(n) if mu0 is None else np.asarray(mu0, dtype=float).copy()
    A, C = kkt_matrices(eq, G, W)
    evals = 0

    def at(mu_vec: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        nonlocal evals
        evals += 1
        F = _precoders_from_kkt(eq, A, C, mu_vec, params.epsilon)
        return F, usage_vector(eq, F)

    def info(converged: bool, usage: np.ndarray) -> DualSearchInfo:
        rel = (usage - budgets) / den
        slack = np.abs(mu * (usage - budgets)) / den
        return DualSearchInfo(
            converged,
            evals,
            float(rel.max()) if n else 0.0,
            float(slack.max()) if n else 0.0,
        )

    def coord_ok(j: int, mu_vec, usage) -> bool:
        Pj = budgets[j]
        return (
            usage[j] <= Pj * (1.0 + _CERT_FEAS_REL) + _feasible_dust(usage)
            and mu_vec[j] * abs(usage[j] - Pj) <= _SLACK_ABS_TOL * max(1.0, Pj)
        )

    def merit(mu_vec, usage) -> float:
        infeas = np.maximum(0.0, usage - budgets) / scale
        slack = mu_vec * (usage - budgets) / scale
        return float(infeas @ infeas + slack @ slack)

    def coordinate_solve(j: int, mu, F, usage, tight: bool):
        """Root find on mu_j, landing on the feasible side of budget j.

        tight: stop only when the slackness product is below the
        certification cap; loose: stop once usage is within [P/2, P].
        """
        nonlocal evals
        Pj = budgets[j]
        slack_cap = _SLACK_ABS_TOL * max(1.0, Pj)

        def good(x: float, u: float) -> bool:
            if tight:
                return x * (Pj - u) <= slack_cap
            return u >= 0.5 * Pj

        if usage[j] > Pj + _feasible_dust(usage):
            lo, flo = mu[j], usage[j] - Pj
            hi = max(1.3 * mu[j], mu[j] + 1.0)
            feasible = None
            while evals < params.dual_iters:
                trial = mu.copy()
                trial[j] = hi
                F2, u2 = at(trial)
                if u2[j] <= Pj:
                    feasible = (trial, F2, u2)
                    fhi = u2[j] - Pj
                    break
                lo, flo = hi, u2[j] - Pj
                hi *= 8.0
            if feasible is None:
                return mu, F, usage
        else:
            # Over-suppressed: the multiplier can shrink, possibly to zero.
            trial = mu.copy()
            trial[j] = 0.0
            F2, u2 = at(trial)
            if u2[j] <= Pj:
                return trial, F2, u2
            lo, flo = 0.0, u2[j] - Pj
            hi, fhi = mu[j], usage[j] - Pj
            feasible = (mu.copy(), F, usage)
        # Illinois secant on usage_j(x) = Pj inside [lo, hi]; usage_j(lo) > Pj
        # >= usage_j(hi), and only feasible-side points are ever returned.
        side = 0
        while evals < params.dual_iters:
            if good(hi, fhi + Pj):
                break
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
            x = hi - fhi * (hi - lo) / (fhi - flo)
            if not lo < x < hi:
                x = 0.5 * (lo + hi)
            trial = mu.copy()
            trial[j] = x
            F2, u2 = at(trial)
            fx = u2[j] - Pj
            if fx <= 0.0:
                hi, fhi = x, fx
                feasible = (trial, F2, u2)
                if side == 1:
                    flo *= 0.5
                side = 1
            else:
                lo, flo = x, fx
                if side == -1:
                    fhi *= 0.5
                side = -1
        return feasible

    F, usage = at(mu)
    if n == 0 or _certified(mu, usage, budgets):
        return mu, F, info(True, usage)

    # Phase 1: subgradient navigation (cold starts far from feasibility).
    if float(((usage - budgets) / den).max()) > 0.05:
        cap = min(25, max(1, params.dual_iters // 8))
        for t in range(1, cap + 1):
            if evals >= params.dual_iters:
                break
            g = np.clip((usage - budgets) / den, -1.0, 1.0)
            mu = np.maximum(0.0, mu + (params.dual_step / np.sqrt(t)) * g)
            F, usage = at(mu)
            if _certified(mu, usage, budgets):
                return mu, F, info(True, usage)

    # Phase 2: composition rounds of de-escalation, joint LM, certification.
    for _ in range(8):
        if evals >= params.dual_iters:
            break

        # (a) loose de-escalation of order-of-magnitude violations
        for j in range(n):
            if evals >= params.dual_iters:
                break
            if usage[j] > 1.5 * budgets[j] + _feasible_dust(usage):
                mu, F, usage = coordinate_solve(j, mu, F, usage, tight=False)

        # (b) log-space LM on the working set
        for _ in range(25):
            if evals >= params.dual_iters or _certified(mu, usage, budgets):
                break
            active = np.flatnonzero(mu > 0)
            if active.size == 0:
                break
            r = (usage[active] - budgets[active]) / scale[active]
            if float(np.abs(r).max()) <= 1e-12:
                break
            dtheta_fd = 1e-4
            J = np.zeros((active.size, active.size))
            for col, j in enumerate(active):
                if evals >= params.dual_iters:
                    break
                trial = mu.copy()
                trial[j] = mu[j] * np.exp(dtheta_fd)
                _, u2 = at(trial)
                J[:, col] = (u2[active] - usage[active]) / scale[active] / dtheta_fd
            base = merit(mu, usage)
            stepped = False
            lam = 1e-8 * max(1.0, float(np.linalg.norm(J)))
            for _ in range(5):
                if evals >= params.dual_iters:
                    break
                try:
                    dtheta = np.linalg.solve(
                        J.T @ J + lam**2 * np.eye(active.size), -J.T @ r
                    )
                except np.linalg.LinAlgError:
                    break
                dtheta = np.clip(dtheta, -3.0, 3.0)
                trial = mu.copy()
                trial[active] = mu[active] * np.exp(dtheta)
                F2, u2 = at(trial)
                if merit(trial, u2) < base * (1.0 - 1e-6):
                    mu, F, usage = trial, F2, u2
                    stepped = True
                    break
                lam *= 10.0
            if not stepped:
                break

        # (c) tight certification sweeps
        for _ in range(3):
            if evals >= params.dual_iters:
                break
            progress = False
            for j in range(n):
                if evals >= params.dual_iters:
                    break
                if coord_ok(j, mu, usage):
                    continue
                progress = True
                mu, F, usage = coordinate_solve(j, mu, F, usage, tight=True)
            if _certified(mu, usage, budgets):
                return mu, F, info(True, usage)
            if not progress:
                break

    # Budget exhausted: force feasibility by a global rescale and flag it.
    violated = usage > budgets + _feasible_dust(usage)
    if np.any(violated):
        rescale = np.sqrt(np.min(budgets[violated] / usage[violated]))
        F = [rescale * F_k for F_k in F]
        usage = usage * rescale**2
    rel = (usage - budgets) / den
    slack = np.abs(mu * (usage - budgets)) / den
    ok = float(rel.max()) <= params.power_tol and float(slack.max()) <= SLACK_TOL
    return mu, F, info(ok, usage)


def run_wsmmse(
    eq: EquivalentModel, s: Scenario, seed: int | None = None
) -> tuple[SolverState, IterationTrace]:
    """Alternate equalizer and dual-certified precoder updates until the
    objective stalls (relative change <= kkt_tol) or outer_iters is reached."""
    params = s.solver
    W = scenario_weights(s)
    budgets = np.asarray(s.budgets(), dtype=float)
    M = s.topology.M
    if seed is None:
        seed = s.seed

    F = init_precoders(eq, s, seed)
    G, Omega = update_equalizers(eq, F)
    obj_prev = weighted_sum_mse(eq, F, G, W)
    mu = np.zeros(budgets.size)
    trace = IterationTrace()
    converged = False
    iteration = 0

    for iteration in range(1, params.outer_iters + 1):
        mu, F, dual = solve_duals(eq, G, W, budgets, params, mu0=mu)
        kkt_res = lagrangian_gradient_norm(eq, G, W, mu, F)
        G, Omega = update_equalizers(eq, F)
        obj = weighted_sum_mse(eq, F, G, W)
        usage = usage_vector(eq, F)
        den = np.maximum(budgets, 1e-30)
        slack_res = float(np.max(np.abs(mu * (usage - budgets)) / den)) if budgets.size else 0.0

        trace.objective.append(obj)
        trace.power_usage.append(usage)
        trace.kkt_residual.append(kkt_res)
        trace.slackness_residual.append(slack_res)
        trace.dual_converged.append(dual.converged)

        if abs(obj - obj_prev) <= params.kkt_tol * max(1.0, abs(obj_prev)):
            converged = True
            break
        obj_prev = obj

    state = SolverState(
        F=F,
        G=G,
        mu_bs=mu[:M].copy(),
        mu_radar=mu[M:].copy(),
        Omega=Omega,
        iteration=iteration,
        trace=trace,
        converged=converged,
    )
    return state, trace
