"""Projection of radar transmit signals onto weakly-coupled channel directions.

Given the augmented channel from a radar to the users it serves, the radar
signal is steered into the span of right singular vectors whose singular
values are at or below a threshold (the null space plus the small-singular-
value directions).  That caps the amplitude delivered into the cellular
receivers at the threshold while leaving the radar more transmit dimensions
than a pure null-space projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import AugmentedRadarChannel
from .numerics import spectral_norm, svd


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector onto the selected right-singular subspace.

    P is n_rad x n_rad, Hermitian and idempotent.  selected_mask[u] is 1 when
    the u-th singular direction is kept (singular value <= sigma_th; indices
    past the number of existing singular values count as exact zeros and are
    always kept).  singular_values holds the min(rows, n_rad) values the mask
    was derived from.
    """

    radar_index: int
    P: np.ndarray
    selected_mask: np.ndarray
    singular_values: np.ndarray
    sigma_th: float

    @property
    def rank(self) -> int:
        return int(self.selected_mask.sum())


def build_projector(aug: AugmentedRadarChannel, sigma_th: float) -> Projector:
    """Construct the projector from the SVD of the augmented channel.

    The boundary case (singular value exactly equal to sigma_th) is included.
    """
    if sigma_th < 0:
        raise ValueError("sigma_th must be >= 0")
    n_rad = aug.H_aug.shape[1]
    dec = svd(aug.H_aug)
    mask = np.ones(n_rad, dtype=np.int64)
    mask[: dec.S.shape[0]] = dec.S <= sigma_th
    P = (dec.V * mask) @ dec.V.conj().T
    P = (P + P.conj().T) / 2.0
    return Projector(
        radar_index=aug.radar_index,
        P=P,
        selected_mask=mask,
        singular_values=dec.S.copy(),
        sigma_th=float(sigma_th),
    )


def apply_projector(proj: Projector, X: np.ndarray) -> np.ndarray:
    """P @ X; X must have n_rad rows."""
    X = np.asarray(X)
    if X.shape[0] != proj.P.shape[1]:
        raise ValueError(
            f"projector expects {proj.P.shape[1]} rows, got {X.shape[0]}"
        )
    return proj.P @ X

def leakage_bound(proj: Projector, aug: AugmentedRadarChannel) -> float:
    """Largest delivered amplitude ||H_aug @ P||_2; at most sigma_th (+1e-9)."""
    if aug.radar_index != proj.radar_index:
        raise ValueError(
            f"projector is for radar {proj.radar_index}, channel for radar {aug.radar_index}"
        )
    return spectral_norm(aug.H_aug @ proj.P)


def save_projectors(projs, path) -> None:
    """Write projectors to an .npz archive: P, mask, singular values, leakage per radar."""
    arrays: dict[str, np.ndarray] = {}
    for proj in projs:
        l = proj.radar_index
        arrays[f"P_rad{l}"] = proj.P
        arrays[f"mask_rad{l}"] = proj.selected_mask
        arrays[f"sigma_rad{l}"] = proj.singular_values
        arrays[f"sigma_th_rad{l}"] = np.array(proj.sigma_th)
    np.savez(path, **arrays)
