import numpy as np
import pytest

from radarcoex import (
    augment_radar_channel,
    build_equivalent_model,
    build_projector,
    generate_channels,
)
from radarcoex.scenario import Scenario, ServingMap, SolverParams, Topology


def random_scenario(rng, K_max=3, M_max=3, L_max=3, n_max=4, require_radar=False,
                    outer_iters=200):
    """Draw a valid scenario: full user coverage, non-empty radar serving sets,
    stream counts inside the antenna bounds."""
    K = int(rng.integers(1, K_max + 1))
    M = int(rng.integers(0, M_max + 1))
    L = int(rng.integers(1 if require_radar else 0, L_max + 1))
    if M + L == 0:
        M = 1
    n_rad = int(rng.integers(1, n_max + 1))
    n_t = int(rng.integers(1, n_max + 1))
    n_r = int(rng.integers(1, n_max + 1))

    users_of_bs = [set(int(u) for u in np.flatnonzero(rng.random(K) < 0.6)) for _ in range(M)]
    users_of_radar = [set(int(u) for u in np.flatnonzero(rng.random(K) < 0.5)) for _ in range(L)]
    for l in range(L):
        if not users_of_radar[l]:
            users_of_radar[l].add(int(rng.integers(K)))
    for k in range(K):
        if not any(k in u for u in users_of_bs) and not any(k in u for u in users_of_radar):
            if M > 0:
                users_of_bs[int(rng.integers(M))].add(k)
            else:
                users_of_radar[int(rng.integers(L))].add(k)

    serving = ServingMap(
        users_of_bs=tuple(tuple(sorted(u)) for u in users_of_bs),
        users_of_radar=tuple(tuple(sorted(u)) for u in users_of_radar),
    )
    topo = Topology(L=L, M=M, K=K, n_rad=n_rad, n_t=n_t, n_r=n_r)

    d = []
    for k in range(K):
        m_t = len(serving.bs_of_user(k)) * n_t + len(serving.radars_of_user(k)) * n_rad
        d.append(int(rng.integers(1, min(m_t, n_r) + 1)))

    sigma_th = float(rng.uniform(0.2, 1.5))
    radar_budget = float(rng.uniform(0.5, 8.0))
    return Scenario(
        topology=topo,
        serving=serving,
        d=tuple(d),
        P_bs=tuple(float(p) for p in rng.uniform(1.0, 10.0, size=M)),
        P_radar_tx=radar_budget / sigma_th,
        sigma_th=sigma_th,
        W=tuple(tuple(float(w) for w in rng.uniform(0.2, 2.0, size=dk)) for dk in d),
        seed=int(rng.integers(2**31)),
        solver=SolverParams(outer_iters=outer_iters),
    )


def build_pipeline(s, seed):
    """channels -> projectors -> equivalent model for one realization."""
    c = generate_channels(s, seed)
    projs = [
        build_projector(augment_radar_channel(c, l, s.serving), s.sigma_th)
        for l in range(s.topology.L)
    ]
    eq = build_equivalent_model(s, c, projs)
    return c, projs, eq


def random_precoders(rng, eq, s, scale=1.0):
    return [
        scale
        * (
            rng.standard_normal((eq.m_t[k], s.d[k]))
            + 1j * rng.standard_normal((eq.m_t[k], s.d[k]))
        )
        / np.sqrt(2)
        for k in range(s.topology.K)
    ]


def complex_matrix(rng, rows, cols, scale=1.0):
    return scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
