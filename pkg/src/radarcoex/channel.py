"""Random channel realizations and per-radar augmented channels.

Every entry is i.i.d. circularly-symmetric complex Gaussian CN(0, 1) times an
optional scenario-level link gain.  Each matrix gets its own RNG stream,
derived from (trial seed, kind, station, user) through numpy's SeedSequence
spawn keys, so trials generated in parallel are bit-identical to a serial
run regardless of drawing order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, ServingMap

# Stream kind codes for the per-matrix RNG derivation.
KIND_RADAR_LINK = 0
KIND_BS_LINK = 1
KIND_PRECODER_INIT = 2
KIND_STREAMS = 3
KIND_NOISE = 4


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of all links: H_radar[k][l] (n_r x n_rad), H_bs[k][m] (n_r x n_t)."""

    H_radar: tuple[tuple[np.ndarray, ...], ...]
    H_bs: tuple[tuple[np.ndarray, ...], ...]
    seed_used: int


@dataclass(frozen=True, eq=False)
class AugmentedRadarChannel:
    """Vertical stack of radar l's channels to the users it serves, in serving order."""

    radar_index: int
    H_aug: np.ndarray
    row_blocks: tuple[int, ...]


def matrix_rng(seed: int, kind: int, station: int, user: int) -> np.random.Generator:
    """Dedicated generator for one matrix; the stream id is (kind, station, user)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(kind, station, user)))


def complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """CN(0, 1) entries: unit variance split evenly between real and imaginary parts."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def generate_channels(s: Scenario, seed: int) -> ChannelSet:
    """Draw all radar->user and BS->user channel matrices for one trial.

    Pure function of (scenario, seed): identical arguments give bit-identical
    matrices.
    """
    t = s.topology
    H_radar = tuple(
        tuple(
            s.radar_link_gain * complex_gaussian(matrix_rng(seed, KIND_RADAR_LINK, l, k), t.n_r, t.n_rad)
            for l in range(t.L)
        )
        for k in range(t.K)
    )
    H_bs = tuple(
        tuple(
            s.bs_link_gain * complex_gaussian(matrix_rng(seed, KIND_BS_LINK, m, k), t.n_r, t.n_t)
            for m in range(t.M)
        )
        for k in range(t.K)
    )
    return ChannelSet(H_radar=H_radar, H_bs=H_bs, seed_used=seed)


def augment_radar_channel(c: ChannelSet, l: int, serving: ServingMap) -> AugmentedRadarChannel:
    """Stack H_radar[k][l] for k in users_of_radar[l], in serving order."""
    users = serving.users_of_radar[l]
    if len(users) == 0:
        raise ValueError(f"radar {l} serves no users; projector undefined")
    H_aug = np.vstack([c.H_radar[k][l] for k in users])
    return AugmentedRadarChannel(radar_index=l, H_aug=H_aug, row_blocks=tuple(users))


def slice_augmented(aug: AugmentedRadarChannel, n_r: int) -> dict[int, np.ndarray]:
    """Inverse of the stacking: user -> its n_r-row block."""
    return {
        k: aug.H_aug[i * n_r : (i + 1) * n_r, :]
        for i, k in enumerate(aug.row_blocks)
    }


def save_channels(c: ChannelSet, path) -> None:
    """Write a ChannelSet to an .npz archive keyed by (kind, user, station)."""
    arrays: dict[str, np.ndarray] = {"seed_used": np.array(c.seed_used, dtype=np.int64)}
    for k, row in enumerate(c.H_radar):
        for l, H in enumerate(row):
            arrays[f"radar_k{k}_l{l}"] = H
    for k, row in enumerate(c.H_bs):
        for m, H in enumerate(row):
            arrays[f"bs_k{k}_m{m}"] = H
    np.savez(path, **arrays)


def load_channels(path) -> ChannelSet:
    """Read a ChannelSet archive; matrices are reproduced bit-exactly."""
    with np.load(path) as data:
        seed_used = int(data["seed_used"])
        radar_keys = {}
        bs_keys = {}
        for name in data.files:
            if name.startswith("radar_k"):
                k, l = name[len("radar_k"):].split("_l")
                radar_keys[(int(k), int(l))] = data[name]
            elif name.startswith("bs_k"):
                k, m = name[len("bs_k"):].split("_m")
                bs_keys[(int(k), int(m))] = data[name]
    K = 1 + max((k for k, _ in list(radar_keys) + list(bs_keys)), default=-1)
    L = 1 + max((l for _, l in radar_keys), default=-1)
    M = 1 + max((m for _, m in bs_keys), default=-1)
    H_radar = tuple(tuple(radar_keys[(k, l)] for l in range(L)) for k in range(K))
    H_bs = tuple(tuple(bs_keys[(k, m)] for m in range(M)) for k in range(K))
    return ChannelSet(H_radar=H_radar, H_bs=H_bs, seed_used=seed_used)
