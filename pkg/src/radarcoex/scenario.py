"""Experiment description: topology, serving sets, powers, weights, solver knobs.

A Scenario is the single immutable value shared by every other module.  It is
loaded from a JSON document, validated against the model invariants, and then
treated as read-only for the rest of a run (safe to share across parallel
trials).

Indexing is 0-based everywhere: users, base stations and radar stations are
referred to by their position in the respective lists.  Serving sets are
ordered lists (BSs in ascending index first, then radars in ascending index),
because the block layout of the augmented precoders depends on a fixed order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict


class ScenarioError(ValueError):
    """Malformed or invalid scenario document."""


@dataclass(frozen=True)
class Topology:
    """Station/user counts and antenna counts.

    L: radar stations, M: cellular base stations, K: users.
    n_rad / n_t: transmit antennas per radar / per BS; n_r: receive antennas
    per user.
    """

    L: int
    M: int
    K: int
    n_rad: int
    n_t: int
    n_r: int


@dataclass(frozen=True)
class ServingMap:
    """Which users each station transmits to, in fixed order.

    users_of_bs[m] is the ordered user list of BS m; users_of_radar[l] the
    ordered user list of radar l.  The inverse maps (stations serving a given
    user) are derived, BSs in ascending index first, then radars.
    """

    users_of_bs: tuple[tuple[int, ...], ...]
    users_of_radar: tuple[tuple[int, ...], ...]

    def bs_of_user(self, k: int) -> tuple[int, ...]:
        return tuple(m for m, users in enumerate(self.users_of_bs) if k in users)

    def radars_of_user(self, k: int) -> tuple[int, ...]:
        return tuple(l for l, users in enumerate(self.users_of_radar) if k in users)

    def serving_stations(self, k: int) -> tuple[tuple[str, int], ...]:
        """Ordered serving ensemble of user k: ('bs', m)... then ('radar', l)..."""
        return tuple(("bs", m) for m in self.bs_of_user(k)) + tuple(
            ("radar", l) for l in self.radars_of_user(k)
        )


@dataclass(frozen=True)
class SolverParams:
    outer_iters: int = 200
    dual_iters: int = 500
    power_tol: float = 1e-6
    kkt_tol: float = 1e-8
    epsilon: float = 1e-9
    dual_step: float = 1.0


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    serving: ServingMap
    d: tuple[int, ...]
    P_bs: tuple[float, ...]
    P_radar_tx: float
    sigma_th: float
    W: tuple[tuple[float, ...], ...]
    seed: int = 0
    solver: SolverParams = field(default_factory=SolverParams)
    # Per-link scalar gains (default 1.0) let a scenario emulate strong radar
    # links without a pathloss model.
    radar_link_gain: float = 1.0
    bs_link_gain: float = 1.0

    @property
    def radar_budget(self) -> float:
        """Allowed radar power toward the communication system: sigma_th * P_rad."""
        return self.sigma_th * self.P_radar_tx

    def transmit_dim(self, k: int) -> int:
        """Augmented transmit dimension of user k's serving ensemble."""
        t = self.topology
        return len(self.serving.bs_of_user(k)) * t.n_t + len(
            self.serving.radars_of_user(k)
        ) * t.n_rad

    def budgets(self) -> tuple[float, ...]:
        """All power budgets in constraint order: BSs ascending, then radars."""
        return self.P_bs + (self.radar_budget,) * self.topology.L


_SOLVER_KEYS = ("outer_iters", "dual_iters", "power_tol", "kkt_tol", "epsilon", "dual_step")
_REQUIRED_KEYS = ("M", "K", "n_t", "n_r", "d", "users_of_bs", "P_bs", "W")
_OPTIONAL_KEYS = (
    "L",
    "n_rad",
    "users_of_radar",
    "P_rad",
    "sigma_th",
    "seed",
    "solver",
    "radar_link_gain",
    "bs_link_gain",
)


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{name} must be an integer, got {value!r}")
    return value


def _as_float(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{name} must be a number, got {value!r}")
    return float(value)


def _as_index_lists(value, name: str, count: int) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list) or len(value) != count:
        raise ScenarioError(f"{name} must be a list of {count} user lists")
    out = []
    for i, entry in enumerate(value):
        if not isinstance(entry, list):
            raise ScenarioError(f"{name}[{i}] must be a list of user indices")
        out.append(tuple(_as_int(u, f"{name}[{i}]") for u in entry))
    return tuple(out)


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from a decoded JSON document, then validate it."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    unknown = set(doc) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS)
    if unknown:
        raise ScenarioError(f"unknown scenario fields: {', '.join(sorted(unknown))}")
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise ScenarioError(f"missing scenario fields: {', '.join(missing)}")

    L = _as_int(doc.get("L", 0), "L")
    topo = Topology(
        L=L,
        M=_as_int(doc["M"], "M"),
        K=_as_int(doc["K"], "K"),
        n_rad=_as_int(doc.get("n_rad", 1), "n_rad"),
        n_t=_as_int(doc["n_t"], "n_t"),
        n_r=_as_int(doc["n_r"], "n_r"),
    )
    serving = ServingMap(
        users_of_bs=_as_index_lists(doc["users_of_bs"], "users_of_bs", topo.M),
        users_of_radar=_as_index_lists(doc.get("users_of_radar", [[] for _ in range(L)]),
                                       "users_of_radar", L),
    )
    if not isinstance(doc["d"], list):
        raise ScenarioError("d must be a list of per-user stream counts")
    d = tuple(_as_int(x, "d") for x in doc["d"])
    if not isinstance(doc["P_bs"], list):
        raise ScenarioError("P_bs must be a list of per-BS powers")
    P_bs = tuple(_as_float(x, "P_bs") for x in doc["P_bs"])
    if not isinstance(doc["W"], list):
        raise ScenarioError("W must be a list of per-user weight vectors")
    W = []
    for k, row in enumerate(doc["W"]):
        if not isinstance(row, list):
            raise ScenarioError(f"W[{k}] must be a list of weights")
        W.append(tuple(_as_float(x, f"W[{k}]") for x in row))

    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, dict):
        raise ScenarioError("solver must be an object")
    unknown = set(solver_doc) - set(_SOLVER_KEYS)
    if unknown:
        raise ScenarioError(f"unknown solver fields: {', '.join(sorted(unknown))}")
    defaults = SolverParams()
    solver = SolverParams(
        outer_iters=_as_int(solver_doc.get("outer_iters", defaults.outer_iters), "solver.outer_iters"),
        dual_iters=_as_int(solver_doc.get("dual_iters", defaults.dual_iters), "solver.dual_iters"),
        power_tol=_as_float(solver_doc.get("power_tol", defaults.power_tol), "solver.power_tol"),
        kkt_tol=_as_float(solver_doc.get("kkt_tol", defaults.kkt_tol), "solver.kkt_tol"),
        epsilon=_as_float(solver_doc.get("epsilon", defaults.epsilon), "solver.epsilon"),
        dual_step=_as_float(solver_doc.get("dual_step", defaults.dual_step), "solver.dual_step"),
    )

    scenario = Scenario(
        topology=topo,
        serving=serving,
        d=d,
        P_bs=P_bs,
        P_radar_tx=_as_float(doc.get("P_rad", 1.0), "P_rad"),
        sigma_th=_as_float(doc.get("sigma_th", 0.0), "sigma_th"),
        W=tuple(W),
        seed=_as_int(doc.get("seed", 0), "seed"),
        solver=solver,
        radar_link_gain=_as_float(doc.get("radar_link_gain", 1.0), "radar_link_gain"),
        bs_link_gain=_as_float(doc.get("bs_link_gain", 1.0), "bs_link_gain"),
    )
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioError("invalid scenario: " + "; ".join(violations))
    return scenario


def parse_scenario(text: str) -> Scenario:
    """Parse a JSON scenario document and validate all invariants."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def scenario_to_dict(s: Scenario) -> dict:
    doc = {
        "L": s.topology.L,
        "M": s.topology.M,
        "K": s.topology.K,
        "n_rad": s.topology.n_rad,
        "n_t": s.topology.n_t,
        "n_r": s.topology.n_r,
        "d": list(s.d),
        "users_of_bs": [list(u) for u in s.serving.users_of_bs],
        "users_of_radar": [list(u) for u in s.serving.users_of_radar],
        "P_bs": list(s.P_bs),
        "P_rad": s.P_radar_tx,
        "sigma_th": s.sigma_th,
        "W": [list(w) for w in s.W],
        "seed": s.seed,
        "solver": asdict(s.solver),
        "radar_link_gain": s.radar_link_gain,
        "bs_link_gain": s.bs_link_gain,
    }
    return doc


def serialize_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2, sort_keys=True)


def validate_scenario(s: Scenario) -> list[str]:
    """Return one human-readable entry per violated invariant (empty if valid)."""
    t = s.topology
    out: list[str] = []
    if t.L < 0 or t.M < 0:
        out.append("L and M must be >= 0")
    if t.L + t.M < 1:
        out.append("need at least one station (L + M >= 1)")
    if t.K < 1:
        out.append("K must be >= 1")
    for name, n in (("n_rad", t.n_rad), ("n_t", t.n_t), ("n_r", t.n_r)):
        if n < 1:
            out.append(f"{name} must be >= 1")

    if len(s.serving.users_of_bs) != t.M:
        out.append(f"users_of_bs has {len(s.serving.users_of_bs)} entries, expected M={t.M}")
    if len(s.serving.users_of_radar) != t.L:
        out.append(f"users_of_radar has {len(s.serving.users_of_radar)} entries, expected L={t.L}")
    for kind, lists in (("bs", s.serving.users_of_bs), ("radar", s.serving.users_of_radar)):
        for i, users in enumerate(lists):
            for u in users:
                if not 0 <= u < t.K:
                    out.append(f"users_of_{kind}[{i}] lists user {u} outside [0, {t.K})")
            if len(set(users)) != len(users):
                out.append(f"users_of_{kind}[{i}] contains duplicate users")
    for l, users in enumerate(s.serving.users_of_radar):
        if len(users) == 0:
            out.append(f"radar {l} serves no users; its projector is undefined")

    if len(s.d) != t.K:
        out.append(f"d has {len(s.d)} entries, expected K={t.K}")
    if len(s.W) != t.K:
        out.append(f"W has {len(s.W)} entries, expected K={t.K}")
    for k in range(min(t.K, len(s.d))):
        n_serving = s.transmit_dim(k)
        if n_serving == 0:
            out.append(f"user {k} has no serving station")
        dk = s.d[k]
        if dk < 1:
            out.append(f"d[{k}] must be >= 1")
        elif n_serving > 0 and dk > min(n_serving, t.n_r):
            out.append(
                f"d_k exceeds min(serving antennas, n_r) = min({n_serving}, {t.n_r}) for user {k}"
            )
        if k < len(s.W) and len(s.W[k]) != dk:
            out.append(f"W[{k}] has {len(s.W[k])} weights, expected d[{k}]={dk}")
    for k, row in enumerate(s.W):
        for i, w in enumerate(row):
            if w < 0:
                out.append(f"W[{k}][{i}] < 0")

    if len(s.P_bs) != t.M:
        out.append(f"P_bs has {len(s.P_bs)} entries, expected M={t.M}")
    for m, p in enumerate(s.P_bs):
        if not p > 0:
            out.append(f"P_bs[{m}] must be > 0")
    if not s.P_radar_tx > 0:
        out.append("P_rad must be > 0")
    if s.sigma_th < 0:
        out.append("sigma_th must be >= 0")
    if s.radar_link_gain < 0 or s.bs_link_gain < 0:
        out.append("link gains must be >= 0")

    sp = s.solver
    if sp.outer_iters < 1 or sp.dual_iters < 1:
        out.append("solver iteration counts must be >= 1")
    for name, v in (("power_tol", sp.power_tol), ("kkt_tol", sp.kkt_tol),
                    ("epsilon", sp.epsilon), ("dual_step", sp.dual_step)):
        if not v > 0:
            out.append(f"solver.{name} must be > 0")
    return out
