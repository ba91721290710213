"""Mapping of the partial-cooperation downlink onto an interference channel
with generalized per-station power constraints.

Each user k is assigned one virtual transmitter whose antennas are the
concatenation of its serving stations' antennas (BSs in ascending index,
then radars).  Effective channels absorb the radar projectors, and each
physical station's power constraint becomes a weighted-trace constraint
tr{Phi_k F_k F_k^H} with a block-diagonal selector Phi.

The module also carries a simulator for the original signal model, so the
equivalence can be certified numerically: both paths must produce identical
received signals and identical power accounting for any precoders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .projection import Projector
from .scenario import Scenario


@dataclass(frozen=True, eq=False)
class EquivalentModel:
    """Per-user effective channels and constraint weight matrices.

    H_eff[k][o] (n_r x m_t[o]) maps user o's augmented precoder to user k's
    receiver.  Phi_bs[k][m] and Phi_radar[k][l] are m_t[k] x m_t[k] selector
    matrices (zero when the station does not serve k).  block_index maps
    (k, kind, station) to the row slice of that station's block inside user
    k's augmented precoder.
    """

    m_t: tuple[int, ...]
    n_r: int
    H_eff: tuple[tuple[np.ndarray, ...], ...]
    Phi_bs: tuple[tuple[np.ndarray, ...], ...]
    Phi_radar: tuple[tuple[np.ndarray, ...], ...]
    block_index: dict[tuple[int, str, int], slice]


@dataclass(eq=False)
class SignalSample:
    """One draw of stream vectors u_k and receiver noise, plus the received y_k."""

    u: list[np.ndarray]
    noise: list[np.ndarray]
    y: list[np.ndarray] | None = None


def block_layout(s: Scenario, k: int) -> list[tuple[str, int, slice]]:
    """Ordered (kind, station, rows) blocks of user k's augmented precoder."""
    t = s.topology
    out = []
    offset = 0
    for kind, station in s.serving.serving_stations(k):
        size = t.n_t if kind == "bs" else t.n_rad
        out.append((kind, station, slice(offset, offset + size)))
        offset += size
    return out


def build_equivalent_model(s: Scenario, c: ChannelSet, projs: list[Projector]) -> EquivalentModel:
    """Assemble effective channels and constraint weights from one realization."""
    t = s.topology
    if len(projs) != t.L:
        raise ValueError(f"need one projector per radar: got {len(projs)}, L={t.L}")
    for l, proj in enumerate(projs):
        if proj.radar_index != l:
            raise ValueError(f"projector {l} is labeled for radar {proj.radar_index}")

    m_t = tuple(s.transmit_dim(k) for k in range(t.K))
    layouts = [block_layout(s, k) for k in range(t.K)]
    block_index = {
        (k, kind, station): rows
        for k in range(t.K)
        for kind, station, rows in layouts[k]
    }

    H_eff = []
    for k in range(t.K):
        row = []
        for o in range(t.K):
            blocks = []
            for kind, station, _ in layouts[o]:
                if kind == "bs":
                    blocks.append(c.H_bs[k][station])
                else:
                    blocks.append(c.H_radar[k][station] @ projs[station].P)
            row.append(np.hstack(blocks))
        H_eff.append(tuple(row))

    Phi_bs = []
    Phi_radar = []
    for k in range(t.K):
        dim = m_t[k]
        bs_row = []
        for m in range(t.M):
            Phi = np.zeros((dim, dim), dtype=np.complex128)
            key = (k, "bs", m)
            if key in block_index:
                rows = block_index[key]
                Phi[rows, rows] = np.eye(t.n_t)
            bs_row.append(Phi)
        rad_row = []
        for l in range(t.L):
            Phi = np.zeros((dim, dim), dtype=np.complex128)
            key = (k, "radar", l)
            if key in block_index:
                rows = block_index[key]
                P = projs[l].P
                Phi[rows, rows] = P.conj().T @ P
            rad_row.append(Phi)
        Phi_bs.append(tuple(bs_row))
        Phi_radar.append(tuple(rad_row))

    return EquivalentModel(
        m_t=m_t,
        n_r=t.n_r,
        H_eff=tuple(H_eff),
        Phi_bs=tuple(Phi_bs),
        Phi_radar=tuple(Phi_radar),
        block_index=block_index,
    )


def split_precoder(s: Scenario, k: int, F_k: np.ndarray) -> dict[tuple[str, int], np.ndarray]:
    """Cut user k's augmented precoder into per-station blocks."""
    return {(kind, station): F_k[rows, :] for kind, station, rows in block_layout(s, k)}


def stack_precoder(s: Scenario, k: int, blocks: dict[tuple[str, int], np.ndarray]) -> np.ndarray:
    """Inverse of split_precoder."""
    return np.vstack([blocks[(kind, station)] for kind, station, _ in block_layout(s, k)])


def simulate_direct(
    s: Scenario,
    c: ChannelSet,
    projs: list[Projector],
    F_blocks: dict[tuple[int, str, int], np.ndarray],
    sample: SignalSample,
) -> SignalSample:
    """Received signals from the physical model.

    Radar l transmits P_l @ sum_k F[k,l] u_k over its served users, BS m
    transmits sum_k F[k,m] u_k; user k receives the superposition through its
    physical channels plus noise.  F_blocks is keyed by (user, kind, station).
    """
    t = s.topology
    x_radar = []
    for l in range(t.L):
        x = np.zeros(t.n_rad, dtype=np.complex128)
        for k in s.serving.users_of_radar[l]:
            x = x + F_blocks[(k, "radar", l)] @ sample.u[k]
        x_radar.append(projs[l].P @ x)
    x_bs = []
    for m in range(t.M):
        x = np.zeros(t.n_t, dtype=np.complex128)
        for k in s.serving.users_of_bs[m]:
            x = x + F_blocks[(k, "bs", m)] @ sample.u[k]
        x_bs.append(x)

    y = []
    for k in range(t.K):
        yk = sample.noise[k].astype(np.complex128).copy()
        for l in range(t.L):
            yk = yk + c.H_radar[k][l] @ x_radar[l]
        for m in range(t.M):
            yk = yk + c.H_bs[k][m] @ x_bs[m]
        y.append(yk)
    return SignalSample(u=sample.u, noise=sample.noise, y=y)


def simulate_equivalent(
    eq: EquivalentModel, F_aug: list[np.ndarray], sample: SignalSample
) -> SignalSample:
    """Received signals from the equivalent interference-channel model."""
    K = len(eq.m_t)
    y = []
    for k in range(K):
        yk = sample.noise[k].astype(np.complex128).copy()
        for o in range(K):
            yk = yk + eq.H_eff[k][o] @ (F_aug[o] @ sample.u[o])
        y.append(yk)
    return SignalSample(u=sample.u, noise=sample.noise, y=y)


def usage_vector(eq: EquivalentModel, F_aug: list[np.ndarray]) -> np.ndarray:
    """All constraint usages sum_k tr{Phi_k F_k F_k^H}, BSs first then radars."""
    K = len(eq.m_t)
    M = len(eq.Phi_bs[0]) if K else 0
    L = len(eq.Phi_radar[0]) if K else 0
    usage = np.zeros(M + L)
    for k in range(K):
        FFh = F_aug[k] @ F_aug[k].conj().T
        for m in range(M):
            usage[m] += np.trace(eq.Phi_bs[k][m] @ FFh).real
        for l in range(L):
            usage[M + l] += np.trace(eq.Phi_radar[k][l] @ FFh).real
    return usage


def audit_power(
    eq: EquivalentModel, F_aug: list[np.ndarray], s: Scenario
) -> tuple[np.ndarray, np.ndarray]:
    """Power drawn from each station: sum_k tr{Phi_k F_k F_k^H} per BS and per radar."""
    t = s.topology
    usage = usage_vector(eq, F_aug)
    return usage[: t.M], usage[t.M :]


def draw_sample(s: Scenario, seed: int) -> SignalSample:
    """Seeded unit-variance stream and noise vectors for one signal draw."""
    from .channel import KIND_NOISE, KIND_STREAMS, complex_gaussian, matrix_rng

    u = [
        complex_gaussian(matrix_rng(seed, KIND_STREAMS, 0, k), s.d[k], 1)[:, 0]
        for k in range(s.topology.K)
    ]
    noise = [
        complex_gaussian(matrix_rng(seed, KIND_NOISE, 0, k), s.topology.n_r, 1)[:, 0]
        for k in range(s.topology.K)
    ]
    return SignalSample(u=u, noise=noise)
