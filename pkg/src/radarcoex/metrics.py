"""Reporting quantities computed from a converged solver state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, augment_radar_channel
from .equivalence import EquivalentModel, audit_power, split_precoder
from .numerics import spectral_norm
from .projection import Projector
from .scenario import Scenario
from .solver import SolverState, interference_covariance, mse_matrix, scenario_weights


@dataclass(frozen=True, eq=False)
class TrialReport:
    """Scalar summary of one trial.

    radar_leakage[l] is the worst-case delivered amplitude toward radar l's
    served users; radar_interference[l] maps each NON-served user to the
    interference power it receives from radar l (computed from the physical
    channels, which the projector does not shape for those users).
    """

    per_user_mse: tuple[float, ...]
    per_user_wmse: tuple[float, ...]
    sum_wmse: float
    usage_bs: tuple[float, ...]
    usage_radar: tuple[float, ...]
    budget_bs: tuple[float, ...]
    budget_radar: tuple[float, ...]
    radar_leakage: tuple[float, ...]
    radar_interference: tuple[tuple[tuple[int, float], ...], ...]
    optional_sum_rate: float
    iterations_used: int
    converged: bool

    @property
    def slack_bs(self) -> tuple[float, ...]:
        return tuple(b - u for b, u in zip(self.budget_bs, self.usage_bs))

    @property
    def slack_radar(self) -> tuple[float, ...]:
        return tuple(b - u for b, u in zip(self.budget_radar, self.usage_radar))


def build_report(
    eq: EquivalentModel,
    state: SolverState,
    s: Scenario,
    c: ChannelSet,
    projs: list[Projector],
) -> TrialReport:
    """Recompute every reported quantity from scratch (pure function)."""
    t = s.topology
    W = scenario_weights(s)

    per_user_mse = []
    per_user_wmse = []
    for k in range(t.K):
        E = mse_matrix(eq, state.F, state.G, k)
        diag = np.real(np.diag(E))
        per_user_mse.append(float(diag.sum()))
        per_user_wmse.append(float(diag @ W[k]))
    sum_wmse = float(sum(per_user_wmse))

    usage_bs, usage_radar = audit_power(eq, state.F, s)

    # Leakage certificates use the physical channels, not the equivalent model.
    radar_leakage = []
    radar_interference = []
    for l in range(t.L):
        aug = augment_radar_channel(c, l, s.serving)
        radar_leakage.append(spectral_norm(aug.H_aug @ projs[l].P))
        served = set(s.serving.users_of_radar[l])
        Sx = np.zeros((t.n_rad, t.n_rad), dtype=np.complex128)
        for k in served:
            blk = split_precoder(s, k, state.F[k])[("radar", l)]
            Sx = Sx + blk @ blk.conj().T
        PSP = projs[l].P @ Sx @ projs[l].P.conj().T
        entries = []
        for k in range(t.K):
            if k in served:
                continue
            Hkl = c.H_radar[k][l]
            entries.append((k, float(np.trace(Hkl @ PSP @ Hkl.conj().T).real)))
        radar_interference.append(tuple(entries))

    sum_rate = 0.0
    for k in range(t.K):
        Om = interference_covariance(eq, state.F, k)
        HF = eq.H_eff[k][k] @ state.F[k]
        inner = np.eye(s.d[k], dtype=np.complex128) + HF.conj().T @ np.linalg.solve(Om, HF)
        sign, logdet = np.linalg.slogdet(inner)
        sum_rate += float(logdet / np.log(2.0))

    return TrialReport(
        per_user_mse=tuple(per_user_mse),
        per_user_wmse=tuple(per_user_wmse),
        sum_wmse=sum_wmse,
        usage_bs=tuple(float(u) for u in usage_bs),
        usage_radar=tuple(float(u) for u in usage_radar),
        budget_bs=s.P_bs,
        budget_radar=(s.radar_budget,) * t.L,
        radar_leakage=tuple(radar_leakage),
        radar_interference=tuple(radar_interference),
        optional_sum_rate=sum_rate,
        iterations_used=state.iteration,
        converged=state.converged,
    )
