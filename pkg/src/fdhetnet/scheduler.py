"""Opportunistic FD scheduling of one BS-user queue pair and its stability.

Time is continuous and advances by variable-length slots. In every slot the
policy picks a mode from the emptiness pattern of the two queues; each active
direction drains the residual bits of its head-of-line packet at its rate and
the slot ends at the first packet completion, so the other direction keeps its
residual. Packet arrivals over a slot of length ``dt`` are Poisson with mean
``eta * dt``.

Modes: 0 idle, 1 FD both ways, 2 HD downlink, 3 HD uplink, 4 FD downlink only,
5 FD uplink only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import IntEnum

import numba
import numpy as np
from scipy.stats import norm

from .errors import CoefficientUndefinedError, ParameterError
from .region import branch_point

__all__ = [
    "Policy",
    "Mode",
    "QueuePairState",
    "ArrivalSpec",
    "ServiceRates",
    "QueueTrace",
    "step",
    "simulate",
    "lyapunov",
    "lyapunov_coefficients",
    "drift_estimate",
    "mann_kendall",
    "stability_verdict",
    "sum_rate_experiment",
    "DEFAULT_SWEEP",
    "stability_sweep",
]


class Policy(IntEnum):
    DOWNLINK_OPPORTUNISTIC = 0
    UPLINK_OPPORTUNISTIC = 1
    PURE_HD = 2
    PURE_FD = 3


class Mode(IntEnum):
    IDLE = 0
    FD = 1
    HD_DL = 2
    HD_UL = 3
    FD_DL_ONLY = 4
    FD_UL_ONLY = 5


@dataclass(frozen=True)
class QueuePairState:
    """Queue lengths (packets, head-of-line included) and bookkeeping."""

    q_dl: int = 0
    q_ul: int = 0
    slot: int = 0
    served_dl: float = 0.0
    served_ul: float = 0.0
    res_dl: float = 1.0
    res_ul: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        if self.q_dl < 0 or self.q_ul < 0:
            raise ParameterError("queue lengths must be >= 0")


@dataclass(frozen=True)
class ArrivalSpec:
    """Poisson packet arrival rates per unit time and the packet size in bits."""

    eta_dl: float
    eta_ul: float
    ell: float = 1.0

    def __post_init__(self):
        if self.eta_dl < 0 or self.eta_ul < 0:
            raise ParameterError("arrival rates must be >= 0")
        if not self.ell > 0:
            raise ParameterError("packet size must be positive")


@dataclass(frozen=True)
class ServiceRates:
    """FD rates at the operating ``nu`` and HD baselines, nats/s/Hz."""

    c_dl: float
    c_ul: float
    h_dl: float
    h_ul: float

    def __post_init__(self):
        if min(self.c_dl, self.c_ul, self.h_dl, self.h_ul) <= 0:
            raise ParameterError("service rates must be positive")
        if self.c_dl > self.h_dl or self.c_ul > self.h_ul:
            raise ParameterError("FD rates cannot exceed HD rates")

    def as_array(self) -> np.ndarray:
        return np.array([self.c_dl, self.c_ul, self.h_dl, self.h_ul])


@numba.njit(cache=True)
def _mode(policy, q_dl, q_ul, theta, u):
    if q_dl == 0 and q_ul == 0:
        return 0
    if policy == 0:
        if q_dl > 0 and q_ul > 0:
            return 1
        return 2 if q_dl > 0 else 0
    if policy == 1:
        if q_dl > 0 and q_ul > 0:
            return 1
        return 3 if q_ul > 0 else 0
    if policy == 2:
        if q_dl > 0 and q_ul > 0:
            return 2 if u < theta else 3
        return 2 if q_dl > 0 else 3
    if q_dl > 0 and q_ul > 0:
        return 1
    return 4 if q_dl > 0 else 5


@numba.njit(cache=True)
def _serve(mode, rates, res_dl, res_ul, ell, idle_len):
    """Slot length and per-direction drained bits and completions."""
    c_dl, c_ul, h_dl, h_ul = rates[0], rates[1], rates[2], rates[3]
    r_dl = 0.0
    r_ul = 0.0
    if mode == 1:
        r_dl, r_ul = c_dl, c_ul
    elif mode == 2:
        r_dl = h_dl
    elif mode == 3:
        r_ul = h_ul
    elif mode == 4:
        r_dl = c_dl
    elif mode == 5:
        r_ul = c_ul
    if mode == 0:
        return idle_len, 0.0, 0.0, False, False
    t_dl = res_dl / r_dl if r_dl > 0 else np.inf
    t_ul = res_ul / r_ul if r_ul > 0 else np.inf
    dt = min(t_dl, t_ul)
    done_dl = r_dl > 0 and t_dl <= dt
    done_ul = r_ul > 0 and t_ul <= dt
    b_dl = res_dl if done_dl else r_dl * dt
    b_ul = res_ul if done_ul else r_ul * dt
    return dt, b_dl, b_ul, done_dl, done_ul


def _idle_length(policy, rates: ServiceRates, ell):
    if policy == Policy.UPLINK_OPPORTUNISTIC:
        return ell / rates.h_ul
    return ell / rates.h_dl


def step(state: QueuePairState, policy, rates: ServiceRates, arrivals: ArrivalSpec, rng,
         theta: float = 0.75) -> tuple:
    """Advance one slot; returns ``(new_state, mode)``.

    Departures happen at the end of the slot, then the Poisson arrivals that
    occurred during it are added.
    """
    policy = Policy(policy)
    u = rng.random() if policy == Policy.PURE_HD else 0.0
    mode = _mode(int(policy), state.q_dl, state.q_ul, theta, u)
    dt, b_dl, b_ul, done_dl, done_ul = _serve(mode, rates.as_array(), state.res_dl, state.res_ul,
                                              arrivals.ell, _idle_length(policy, rates, arrivals.ell))
    a_dl = rng.poisson(arrivals.eta_dl * dt)
    a_ul = rng.poisson(arrivals.eta_ul * dt)
    ell = arrivals.ell
    new = QueuePairState(
        q_dl=state.q_dl - int(done_dl) + int(a_dl),
        q_ul=state.q_ul - int(done_ul) + int(a_ul),
        slot=state.slot + 1,
        served_dl=state.served_dl + b_dl,
        served_ul=state.served_ul + b_ul,
        res_dl=ell if done_dl else state.res_dl - b_dl,
        res_ul=ell if done_ul else state.res_ul - b_ul,
        time=state.time + dt,
    )
    return new, Mode(mode)


@numba.njit(cache=True)
def _run(policy, rates, eta_dl, eta_ul, ell, idle_len, theta, q0_dl, q0_ul, horizon, seed):
    np.random.seed(seed)
    q_dl = np.empty(horizon + 1, np.int64)
    q_ul = np.empty(horizon + 1, np.int64)
    modes = np.empty(horizon, np.int8)
    t = np.empty(horizon + 1)
    q_dl[0] = q0_dl
    q_ul[0] = q0_ul
    t[0] = 0.0
    res_dl = ell
    res_ul = ell
    served_dl = 0.0
    served_ul = 0.0
    for n in range(horizon):
        u = np.random.random() if policy == 2 else 0.0
        m = _mode(policy, q_dl[n], q_ul[n], theta, u)
        dt, b_dl, b_ul, done_dl, done_ul = _serve(m, rates, res_dl, res_ul, ell, idle_len)
        served_dl += b_dl
        served_ul += b_ul
        res_dl = ell if done_dl else res_dl - b_dl
        res_ul = ell if done_ul else res_ul - b_ul
        a_dl = np.random.poisson(eta_dl * dt) if eta_dl > 0 else 0
        a_ul = np.random.poisson(eta_ul * dt) if eta_ul > 0 else 0
        q_dl[n + 1] = q_dl[n] - (1 if done_dl else 0) + a_dl
        q_ul[n + 1] = q_ul[n] - (1 if done_ul else 0) + a_ul
        modes[n] = m
        t[n + 1] = t[n] + dt
    return q_dl, q_ul, modes, t, served_dl, served_ul


@dataclass(frozen=True)
class QueueTrace:
    """Per-slot queue lengths (``horizon + 1`` samples), modes and slot end times."""

    q_dl: np.ndarray
    q_ul: np.ndarray
    modes: np.ndarray
    time: np.ndarray
    served_dl: float
    served_ul: float
    rates: ServiceRates

    @property
    def throughput(self):
        """Served bits per unit time ``(downlink, uplink)``."""
        T = float(self.time[-1])
        return self.served_dl / T, self.served_ul / T

    def lyapunov(self) -> np.ndarray:
        v_dl, v_ul = lyapunov_coefficients(self.rates)
        qd = self.q_dl.astype(float)
        qu = self.q_ul.astype(float)
        return v_dl * qd * qd + v_ul * qu * qu + 2.0 * qd * qu

    def to_csv(self, every: int = 1) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["slot", "time [slot units]", "q_dl [packets]", "q_ul [packets]", "mode", "V [packets^2]"])
        V = self.lyapunov()
        for n in range(0, self.modes.size, every):
            w.writerow([n, f"{self.time[n]:.10g}", int(self.q_dl[n]), int(self.q_ul[n]),
                        Mode(int(self.modes[n])).name, f"{V[n]:.10g}"])
        return buf.getvalue()


def simulate(arrivals: ArrivalSpec, policy, rates: ServiceRates, horizon: int, seed: int,
             theta: float = 0.75, initial=(0, 0)) -> QueueTrace:
    """Run ``horizon`` slots of ``policy``; deterministic per ``seed``."""
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    policy = Policy(policy)
    seed32 = int(np.random.SeedSequence(seed).generate_state(1)[0])
    out = _run(int(policy), rates.as_array(), float(arrivals.eta_dl), float(arrivals.eta_ul),
               float(arrivals.ell), _idle_length(policy, rates, arrivals.ell), float(theta),
               int(initial[0]), int(initial[1]), int(horizon), seed32)
    q_dl, q_ul, modes, t, sd, su = out
    for a in (q_dl, q_ul, modes, t):
        a.setflags(write=False)
    return QueueTrace(q_dl=q_dl, q_ul=q_ul, modes=modes, time=t, served_dl=sd, served_ul=su, rates=rates)


def lyapunov_coefficients(rates: ServiceRates):
    """``v = C_FD / (C_HD - C_FD)`` per direction."""
    if rates.h_dl <= rates.c_dl or rates.h_ul <= rates.c_ul:
        raise CoefficientUndefinedError("HD rates must strictly exceed FD rates")
    return rates.c_dl / (rates.h_dl - rates.c_dl), rates.c_ul / (rates.h_ul - rates.c_ul)


def lyapunov(state: QueuePairState, rates: ServiceRates | None = None, coefficients=None) -> float:
    """``v_dl q_dl^2 + v_ul q_ul^2 + 2 q_dl q_ul``.

    ``coefficients`` overrides ``(v_dl, v_ul)``; otherwise they follow from
    ``rates``.
    """
    v_dl, v_ul = coefficients if coefficients is not None else lyapunov_coefficients(rates)
    qd, qu = float(state.q_dl), float(state.q_ul)
    return v_dl * qd * qd + v_ul * qu * qu + 2.0 * qd * qu


def drift_estimate(rates: ServiceRates, arrivals: ArrivalSpec, case: int, q_large: int = 1000,
                   n: int = 10_000, seed: int = 0, policy=Policy.DOWNLINK_OPPORTUNISTIC):
    """Mean one-slot Lyapunov drift from a large-queue state, with a 95% CI.

    Uses the packet-slot chain of the stability argument. Under the downlink
    policy, case 1 starts from ``(q_large, q_large)`` (FD: each queue loses one
    packet and gains ``Pois(eta / C_FD)``), case 2 from ``(q_large, 0)`` (HD
    downlink: slot ``ell / C_dl_HD``) and case 3 from ``(0, q_large)`` (idle).
    The uplink policy mirrors the roles.
    """
    rng = np.random.default_rng(seed)
    v_dl, v_ul = lyapunov_coefficients(rates)
    policy = Policy(policy)
    ell = arrivals.ell
    ed, eu = arrivals.eta_dl * ell, arrivals.eta_ul * ell
    dl_pol = policy != Policy.UPLINK_OPPORTUNISTIC
    if case == 1:
        qd0, qu0 = q_large, q_large
        qd = qd0 - 1 + rng.poisson(ed / rates.c_dl, n)
        qu = qu0 - 1 + rng.poisson(eu / rates.c_ul, n)
    elif case == 2:
        if dl_pol:
            qd0, qu0 = q_large, 0
            qd = qd0 - 1 + rng.poisson(ed / rates.h_dl, n)
            qu = rng.poisson(eu / rates.h_dl, n)
        else:
            qd0, qu0 = 0, q_large
            qu = qu0 - 1 + rng.poisson(eu / rates.h_ul, n)
            qd = rng.poisson(ed / rates.h_ul, n)
    elif case == 3:
        if dl_pol:
            qd0, qu0 = 0, q_large
            qd = rng.poisson(ed / rates.h_dl, n)
            qu = qu0 + rng.poisson(eu / rates.h_dl, n)
        else:
            qd0, qu0 = q_large, 0
            qu = rng.poisson(eu / rates.h_ul, n)
            qd = qd0 + rng.poisson(ed / rates.h_ul, n)
    else:
        raise ParameterError("case must be 1, 2 or 3")
    qd = qd.astype(float)
    qu = qu.astype(float)
    V0 = v_dl * qd0 * qd0 + v_ul * qu0 * qu0 + 2.0 * qd0 * qu0
    dV = v_dl * qd * qd + v_ul * qu * qu + 2.0 * qd * qu - V0
    return float(dV.mean()), float(1.959963984540054 * dV.std(ddof=1) / np.sqrt(n))


def mann_kendall(x):
    """Mann-Kendall trend test; returns ``(S, z, one-sided p for an upward trend)``.

    The variance includes the usual correction for tied values.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        raise ParameterError("need at least three values")
    diff = x[None, :] - x[:, None]
    S = float(np.sum(np.sign(diff[np.triu_indices(n, 1)])))
    _, counts = np.unique(x, return_counts=True)
    ties = np.sum(counts * (counts - 1) * (2 * counts + 5))
    var = (n * (n - 1) * (2 * n + 5) - ties) / 18.0
    if var <= 0:
        return S, 0.0, 1.0
    if S > 0:
        z = (S - 1.0) / np.sqrt(var)
    elif S < 0:
        z = (S + 1.0) / np.sqrt(var)
    else:
        z = 0.0
    return S, float(z), float(norm.sf(z))


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    p_value: float
    z: float
    final_mean: float
    ceiling: float


def stability_verdict(trace: QueueTrace, blocks: int = 50, alpha: float = 0.01,
                      ceiling: float | None = None) -> StabilityVerdict:
    """Trend test on block means of the second-half total queue length.

    Stable means no significant upward trend and the last block mean below
    ``ceiling`` (default ``max(1000, 10 * first-block mean)``).
    """
    q = (trace.q_dl + trace.q_ul).astype(float)
    half = q[q.size // 2:]
    usable = (half.size // blocks) * blocks
    means = half[:usable].reshape(blocks, -1).mean(axis=1)
    _, z, p = mann_kendall(means)
    ceil = ceiling if ceiling is not None else max(1000.0, 10.0 * means[0])
    stable = (p >= alpha) and (means[-1] < ceil)
    return StabilityVerdict(stable=bool(stable), p_value=p, z=z, final_mean=float(means[-1]), ceiling=float(ceil))


def sum_rate_experiment(curve, mix: str, nu_grid=None) -> list:
    """Sum rates per policy over a ``nu`` grid.

    ``curve`` maps ``nu`` to ``(C_dl, C_ul)`` and carries ``hd_dl``/``hd_ul``
    (see :class:`fdhetnet.region.RateCurve`). ``mix`` is ``"downlink"`` (pure
    HD shares 0.75/0.25, opportunistic = downlink policy) or ``"uplink"``
    (mirrored). Rows are ``(policy, nu, sum_rate)``.
    """
    if mix not in ("downlink", "uplink"):
        raise ParameterError("mix must be 'downlink' or 'uplink'")
    grid = np.linspace(0.0, 1.0, 33) if nu_grid is None else np.asarray(nu_grid, dtype=float)
    hd, hu = curve.hd_dl, curve.hd_ul
    share = 0.75 if mix == "downlink" else 0.25
    pure_hd = share * hd + (1.0 - share) * hu
    c1 = sum(curve(1.0))
    base = hd if mix == "downlink" else hu
    rows = []
    for nu in grid:
        rows.append(("pure_HD", float(nu), float(pure_hd)))
        rows.append(("pure_FD", float(nu), float(c1)))
        rows.append(("opportunistic", float(nu), float((1.0 - nu) * base + nu * sum(curve(nu)))))
    return rows


# (nu, frontier branch) pairs probed by the stability sweep; the downlink
# branch is served by the downlink policy and the uplink branch by its mirror
DEFAULT_SWEEP = ((0.2, "downlink"), (0.5, "downlink"), (0.8, "downlink"), (0.3, "uplink"), (0.7, "uplink"))


def stability_sweep(curve, points=DEFAULT_SWEEP, loads=(0.9, 1.1), seeds=(0, 1, 2),
                    horizon: int = 1_000_000, alpha: float = 0.01) -> list:
    """Stability verdicts for arrivals at ``load`` times frontier points.

    For each ``(nu, branch)`` the arrival rates are ``load`` times the
    ``(R_dl, R_ul)`` point of that frontier branch, and the queue pair is
    served with FD rates ``C(nu)``. Rows are dicts, one per
    ``(point, load, seed)``.
    """
    rows = []
    for nu, branch in points:
        dl, ul = curve(nu)
        rates = ServiceRates(dl, ul, curve.hd_dl, curve.hd_ul)
        policy = Policy.DOWNLINK_OPPORTUNISTIC if branch == "downlink" else Policy.UPLINK_OPPORTUNISTIC
        r_ul, r_dl = branch_point(curve, nu, branch)
        for load in loads:
            arr = ArrivalSpec(load * r_dl, load * r_ul)
            for seed in seeds:
                v = stability_verdict(simulate(arr, policy, rates, horizon, seed), alpha=alpha)
                rows.append({"nu": float(nu), "branch": branch, "policy": policy.name, "load": float(load),
                             "eta_dl": arr.eta_dl, "eta_ul": arr.eta_ul, "seed": int(seed),
                             "z": v.z, "p_value": v.p_value, "final_mean": v.final_mean, "stable": v.stable})
    return rows
