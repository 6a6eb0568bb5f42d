"""Monte Carlo estimates of the downlink and uplink rates of a two-way user.

Each drop places BSs of every tier on a disk window around the typical user
and draws users explicitly inside an inner association zone. Inside the zone
every user is associated, void cells are exact and each non-void uplink BS
schedules one uniformly chosen user of its own. Outside the zone the void
flags are Bernoulli with the analytical non-void probability and the
scheduled user is placed uniformly on a disk of the mean cell size around its
BS; these stations only contribute far-field interference. The mean
interference from beyond the window is added as a constant.

Two-way flags are driven by one uniform per scheduled user, so a single drop
serves every traffic pattern ``nu`` and every self-interference level at once
(common random numbers).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import exp1

from .association import Direction, Scheme, bias_law, tier_stats
from ._kernels import weighted_assign
from .channel import NetworkRealization
from .errors import ParameterError
from .geometry import policy_radius, sample_disk
from .network import NetworkConfig
from .rates import RateBoundSpec, RateResult, rate_bound

__all__ = [
    "WindowPolicy",
    "OperatingPoint",
    "SimPlan",
    "SimOutput",
    "simulate_drop",
    "run_drops",
    "estimate_rates",
    "validate_bound",
]

Z95 = 1.959963984540054
MIN_DIST = 1e-6


@dataclass(frozen=True)
class WindowPolicy:
    """Window radius, association-zone radius and zone margin, all in km.

    ``None`` picks the defaults: the guard-zone radius of
    :func:`fdhetnet.geometry.policy_radius`, a zone holding about
    ``zone_bs`` BSs on average, and a margin of twice the largest mean cell
    radius.
    """

    radius: float | None = None
    zone: float | None = None
    margin: float | None = None
    zone_bs: float = 120.0
    min_points: float = 500.0


@dataclass(frozen=True)
class OperatingPoint:
    nu: float
    eps0: float
    eps_star: float

    def __post_init__(self):
        for v in (self.nu, self.eps0, self.eps_star):
            if not (0.0 <= v <= 1.0):
                raise ParameterError("operating point values must lie in [0, 1]")


@dataclass(frozen=True)
class SimPlan:
    """A simulation experiment.

    Parameters
    ----------
    config : NetworkConfig
        Network and association schemes.
    trials : int
        Number of retained drops.
    seed : int
        Base seed; chunk streams are spawned from it.
    points : tuple of OperatingPoint
        Traffic patterns and self-interference levels evaluated on every drop.
        Defaults to the config's own ``(nu, eps0, eps_star)``.
    window : WindowPolicy
    user_interference : {"ppp", "scheduled", "thinning"}
        Geometry of the interfering uplink users. ``ppp``: an independent
        PPP with the intensity of scheduled users, sum of ``lam_k rho^ul_k``,
        each two-way with probability ``nu`` (the model the bounds assume).
        ``scheduled``: one user of each non-void uplink BS, drawn from its
        own cell. ``thinning``: every user within the user radius is two-way
        with probability ``nu``.
    mu_cap : float
        Above this user intensity users are drawn at ``mu_cap`` and every BS is
        treated as non-void (full load).
    droa_candidates : int
        Nearest BSs per tier examined when non-typical users associate under
        DROA.
    chunk : int
        Drops per RNG stream; fixes the stream layout independently of the
        number of workers.
    condition_signal : bool
        Replace ``log(1 + H a)`` by its conditional mean over the serving gain
        ``H`` when ``H`` is exponential and association ignores it (every
        scheme except DROA). Unbiased, with a much smaller variance.
    """

    config: NetworkConfig
    trials: int = 2000
    seed: int = 1
    points: tuple = ()
    window: WindowPolicy = field(default_factory=WindowPolicy)
    user_interference: str = "ppp"
    mu_cap: float = 2000.0
    droa_candidates: int = 8
    chunk: int = 250
    condition_signal: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trial count must be >= 1")
        if self.user_interference not in ("ppp", "scheduled", "thinning"):
            raise ParameterError("user_interference must be 'ppp', 'scheduled' or 'thinning'")
        pts = tuple(self.points) or (OperatingPoint(self.config.nu, self.config.eps0, self.config.eps_star),)
        object.__setattr__(self, "points", tuple(p if isinstance(p, OperatingPoint) else OperatingPoint(*p)
                                                 for p in pts))


@dataclass(frozen=True)
class SimOutput:
    """Per-drop rates (nats/s/Hz), shape ``(trials, n_points)`` per direction."""

    dl: np.ndarray
    ul: np.ndarray
    points: tuple
    resampled: int
    nonvoid_dl: np.ndarray
    nonvoid_ul: np.ndarray
    assoc_dl_tier: np.ndarray
    assoc_ul_tier: np.ndarray

    def result(self, direction, k: int = 0) -> RateResult:
        x = (self.dl if Direction(direction) is Direction.DOWNLINK else self.ul)[:, k]
        n = x.size
        sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
        return RateResult(value=float(np.mean(x)), method="monte_carlo",
                          ci_halfwidth=Z95 * sd / np.sqrt(n),
                          metadata={"trials": n, "resampled": self.resampled,
                                    "point": self.points[k]})


class _Context:
    """Per-plan constants shared by all drops."""

    def __init__(self, plan: SimPlan):
        cfg = plan.config
        self.plan = plan
        self.cfg = cfg
        a = cfg.alpha
        self.alpha = a
        self.lam = cfg.intensities
        self.power = cfg.powers
        self.M = len(cfg.tiers)
        self.full_load = cfg.mu > plan.mu_cap
        self.mu_users = min(cfg.mu, plan.mu_cap)
        sch = cfg.scheme
        self.dl_scheme = sch.downlink
        self.ul_scheme = sch.uplink
        self.dl_stats = tier_stats(cfg.tiers, cfg.mu, a, Direction.DOWNLINK, sch)
        self.ul_stats = tier_stats(cfg.tiers, cfg.mu, a, Direction.UPLINK, sch)
        self.rho_dl = np.array([s.rho for s in self.dl_stats])
        self.rho_ul = np.array([s.rho for s in self.ul_stats])
        # squared-distance weights psi^{-2/alpha} for deterministic biases
        self.w_dl = self._weights(Direction.DOWNLINK)
        self.w_ul = self._weights(Direction.UPLINK)
        cell_dl = np.sqrt([s.theta / (np.pi * l) for s, l in zip(self.dl_stats, self.lam)])
        cell_ul = np.sqrt([s.theta / (np.pi * l) for s, l in zip(self.ul_stats, self.lam)])
        self.cell_ul = cell_ul
        pol = plan.window
        self.R = pol.radius if pol.radius is not None else policy_radius(self.lam, pol.min_points)
        zone = pol.zone if pol.zone is not None else np.sqrt(pol.zone_bs / (np.pi * self.lam.sum()))
        self.zone = min(zone, self.R)
        margin = pol.margin if pol.margin is not None else 2.0 * max(cell_dl.max(), cell_ul.max())
        self.R_users = min(self.zone + margin, self.R)
        self.R_trees = min(self.R_users + margin, self.R)
        self.cell = 1.0 / np.sqrt(self.lam.sum())
        self.fading = [t.fading for t in cfg.tiers]
        self.user_fading = cfg.user_fading
        # mean interference from beyond the window
        tail = 2.0 * np.pi * self.R ** (2.0 - a) / (a - 2.0)
        hmean = np.array([f.mean for f in self.fading])
        self.far_bs_dl = float(np.sum(self.rho_dl * self.lam * self.power * hmean) * tail)
        self.far_bs_ul = float(np.sum(self.rho_ul * self.lam * self.power * hmean) * tail)
        self.sched_lam = float(np.sum(self.lam * self.rho_ul))
        if plan.user_interference == "thinning":
            # users are only drawn out to the user radius
            tail_u = 2.0 * np.pi * self.R_users ** (2.0 - a) / (a - 2.0)
            self.far_user_per_nu = float(cfg.mu) * cfg.Q * self.user_fading.mean * tail_u
        else:
            self.far_user_per_nu = self.sched_lam * cfg.Q * self.user_fading.mean * tail
        if plan.user_interference == "thinning" and np.isinf(cfg.mu):
            raise ParameterError("thinning mode needs a finite user intensity")

    def _weights(self, direction):
        sch = self.dl_scheme if direction is Direction.DOWNLINK else self.ul_scheme
        if sch is Scheme.DROA:
            return None
        psi = [bias_law(t, sch, direction) for t in self.cfg.tiers]
        if any(p.kind != "constant" for p in psi):
            raise ParameterError("simulation supports constant biases or DROA")
        return np.array([p.value for p in psi]) ** (-2.0 / self.alpha)


def _typical_assoc(ctx: _Context, d2, tier, H, direction):
    sch = ctx.dl_scheme if direction is Direction.DOWNLINK else ctx.ul_scheme
    if sch is Scheme.DROA:
        gain = ctx.power[tier] * H if direction is Direction.DOWNLINK else H
        vals = np.log(gain) - 0.5 * ctx.alpha * np.log(d2)
        return int(np.argmax(vals))
    w = ctx.w_dl if direction is Direction.DOWNLINK else ctx.w_ul
    return int(np.argmin(d2 * w[tier]))


def _droa_assoc(ctx: _Context, rng, users, trees, direction):
    """Users pick the best instantaneous gain among their nearest BSs of each tier."""
    n = users.shape[0]
    best_val = np.full(n, np.inf)
    best = np.full(n, -1, dtype=np.int64)
    K = ctx.plan.droa_candidates
    for k, (tree, gidx) in enumerate(trees):
        if tree is None:
            continue
        kk = min(K, gidx.size)
        d, j = tree.query(users, k=kk)
        d = d.reshape(n, kk)
        j = j.reshape(n, kk)
        g = ctx.fading[k].sample(rng, (n, kk))
        gain = ctx.power[k] * g if direction is Direction.DOWNLINK else g
        with np.errstate(divide="ignore"):
            val = ctx.alpha * np.log(np.maximum(d, MIN_DIST)) - np.log(gain)
        col = np.argmin(val, axis=1)
        v = val[np.arange(n), col]
        better = v < best_val
        best_val[better] = v[better]
        best[better] = gidx[j[np.arange(n), col]][better]
    return best


def _draw(ctx: _Context, rng):
    """Sample one drop. Returns a NetworkRealization plus serving indices and uniforms."""
    cfg = ctx.cfg
    R = ctx.R
    counts = rng.poisson(ctx.lam * np.pi * R * R)
    xy = np.concatenate([sample_disk(rng, c, R) for c in counts]) if counts.sum() else np.zeros((0, 2))
    tier = np.repeat(np.arange(ctx.M), counts)
    if xy.shape[0] == 0:
        return None
    d2 = np.einsum("ij,ij->i", xy, xy)
    if d2.min() < MIN_DIST ** 2:
        return None
    n_bs = xy.shape[0]
    H = np.empty(n_bs)
    Hb = np.empty(n_bs)
    for k in range(ctx.M):
        sel = tier == k
        H[sel] = ctx.fading[k].sample(rng, int(sel.sum()))
        Hb[sel] = ctx.fading[k].sample(rng, int(sel.sum()))
    dl_bs = _typical_assoc(ctx, d2, tier, H, Direction.DOWNLINK)
    ul_bs = _typical_assoc(ctx, d2, tier, H, Direction.UPLINK)

    in_zone = d2 <= ctx.zone ** 2
    V_dl = np.ones(n_bs, dtype=bool)
    V_ul = np.ones(n_bs, dtype=bool)
    out = ~in_zone
    if not ctx.full_load:
        V_dl[out] = rng.random(int(out.sum())) < ctx.rho_dl[tier[out]]
        V_ul[out] = rng.random(int(out.sum())) < ctx.rho_ul[tier[out]]

    n_users = rng.poisson(ctx.mu_users * np.pi * ctx.R_users ** 2) if ctx.mu_users > 0 else 0
    users = sample_disk(rng, n_users, ctx.R_users)
    near = np.flatnonzero(d2 <= ctx.R_trees ** 2)
    if n_users:
        w_dl = ctx.w_dl[tier[near]] if ctx.w_dl is not None else np.ones(near.size)
        w_ul = ctx.w_ul[tier[near]] if ctx.w_ul is not None else np.ones(near.size)
        a_dl, a_ul = weighted_assign(users, xy[near], w_dl, w_ul, ctx.cell)
        own_dl = near[a_dl]
        own_ul = near[a_ul]
        if ctx.w_dl is None or ctx.w_ul is None:
            trees = []
            for k in range(ctx.M):
                gidx = near[tier[near] == k]
                trees.append((cKDTree(xy[gidx]), gidx) if gidx.size else (None, gidx))
            if ctx.w_dl is None:
                own_dl = _droa_assoc(ctx, rng, users, trees, Direction.DOWNLINK)
            if ctx.w_ul is None:
                own_ul = _droa_assoc(ctx, rng, users, trees, Direction.UPLINK)
    else:
        own_ul = own_dl = np.zeros(0, dtype=np.int64)

    zone_idx = np.flatnonzero(in_zone)
    if not ctx.full_load:
        V_dl[zone_idx] = False
        V_ul[zone_idx] = False
        V_dl[own_dl] = V_dl[own_dl] | in_zone[own_dl]
        V_ul[own_ul] = V_ul[own_ul] | in_zone[own_ul]
    V_dl[dl_bs] = True
    V_ul[ul_bs] = True

    # one scheduled uplink user per non-void uplink BS
    sched_pos = np.full((n_bs, 2), np.nan)
    if n_users:
        order = rng.permutation(n_users)
        owners = own_ul[order]
        uniq, first = np.unique(owners, return_index=True)
        keep = in_zone[uniq]
        sched_pos[uniq[keep]] = users[order[first[keep]]]
    sched_pos[ul_bs] = 0.0
    need = V_ul & np.isnan(sched_pos[:, 0])
    idx = np.flatnonzero(need)
    if idx.size:
        r = ctx.cell_ul[tier[idx]] * np.sqrt(rng.random(idx.size))
        th = 2.0 * np.pi * rng.random(idx.size)
        sched_pos[idx, 0] = xy[idx, 0] + r * np.cos(th)
        sched_pos[idx, 1] = xy[idx, 1] + r * np.sin(th)
    sched_owner = np.flatnonzero(V_ul)
    sched_xy = sched_pos[sched_owner]
    typical = int(np.searchsorted(sched_owner, ul_bs))
    S = sched_owner.size
    G = ctx.user_fading.sample(rng, S)
    Gb = ctx.user_fading.sample(rng, S)
    U = rng.random(S)

    mode = ctx.plan.user_interference
    if mode != "scheduled":
        if mode == "ppp":
            others = sample_disk(rng, rng.poisson(ctx.sched_lam * np.pi * R * R), R)
            owner = np.full(others.shape[0], -1, dtype=np.int64)
        else:
            others, owner = users, own_ul
        sched_xy = np.vstack([np.zeros((1, 2)), others])
        sched_owner = np.concatenate([[ul_bs], owner])
        typical = 0
        S = sched_xy.shape[0]
        G = ctx.user_fading.sample(rng, S)
        Gb = ctx.user_fading.sample(rng, S)
        U = rng.random(S)

    real = NetworkRealization(bs_xy=xy, bs_tier=tier, bs_power=ctx.power[tier], H=H, Hb=Hb,
                              V_dl=V_dl, V_ul=V_ul, sched_xy=sched_xy, sched_owner=sched_owner,
                              G=G, Gb=Gb, fd=np.zeros(S, dtype=bool), typical=typical)
    diag = {"dl_bs": dl_bs, "ul_bs": ul_bs, "U": U, "in_zone": in_zone}
    return real, diag


def expected_log1p_exp(a):
    """``E[log(1 + a H)]`` for ``H ~ Exp(1)``, i.e. ``exp(1/a) E1(1/a)``."""
    x = 1.0 / np.asarray(a, dtype=float)
    out = np.empty(x.shape)
    small = x < 40.0
    xs = x[small]
    out[small] = np.exp(xs) * exp1(xs)
    xl = x[~small]
    # asymptotic series, truncation error below 1e-11 for x >= 40
    term = np.ones_like(xl)
    acc = np.ones_like(xl)
    for k in range(1, 12):
        term = -term * k / xl
        acc += term
    out[~small] = acc / xl
    return out


def _conditional(ctx: _Context, tier_idx, direction) -> bool:
    if not ctx.plan.condition_signal:
        return False
    sch = ctx.dl_scheme if direction is Direction.DOWNLINK else ctx.ul_scheme
    return sch is not Scheme.DROA and ctx.fading[tier_idx].kind == "exponential"


def _rates_on(ctx: _Context, real: NetworkRealization, diag) -> tuple | None:
    a = ctx.alpha
    cfg = ctx.cfg
    xy = real.bs_xy
    dl_bs, ul_bs, U = diag["dl_bs"], diag["ul_bs"], diag["U"]
    d2 = np.einsum("ij,ij->i", xy, xy)
    pl = d2 ** (-0.5 * a)
    sig_dl = real.bs_power[dl_bs] * real.H[dl_bs] * pl[dl_bs]
    bs_dl = real.V_dl * real.bs_power * real.H * pl
    i_x_dl = bs_dl.sum() - bs_dl[dl_bs] + ctx.far_bs_dl

    rx = xy[ul_bs]
    sig_ul = cfg.Q * real.H[ul_bs] * pl[ul_bs]
    dx = xy - rx
    e2 = np.einsum("ij,ij->i", dx, dx)
    e2[ul_bs] = np.inf
    if e2.min() < MIN_DIST ** 2:
        return None
    bs_ul = real.V_ul * real.bs_power * real.Hb * e2 ** (-0.5 * a)
    i_x_ul = bs_ul.sum() + ctx.far_bs_ul

    mask = np.ones(real.sched_xy.shape[0], dtype=bool)
    mask[real.typical] = False
    u = real.sched_xy[mask]
    u2 = np.einsum("ij,ij->i", u, u)
    du = u - rx
    v2 = np.einsum("ij,ij->i", du, du)
    if u.shape[0] and min(u2.min(), v2.min()) < MIN_DIST ** 2:
        return None
    c_dl = cfg.Q * real.G[mask] * u2 ** (-0.5 * a)
    c_ul = cfg.Q * real.Gb[mask] * v2 ** (-0.5 * a)
    Um = U[mask]
    P_ul = real.bs_power[ul_bs]
    k_dl = real.bs_tier[dl_bs]
    k_ul = real.bs_tier[ul_bs]
    cond_dl = _conditional(ctx, k_dl, Direction.DOWNLINK)
    cond_ul = _conditional(ctx, k_ul, Direction.UPLINK)
    mean_dl = real.bs_power[dl_bs] * ctx.fading[k_dl].mean * pl[dl_bs]
    mean_ul = cfg.Q * ctx.fading[k_ul].mean * pl[ul_bs]
    out_dl = np.empty(len(ctx.plan.points))
    out_ul = np.empty(len(ctx.plan.points))
    for i, p in enumerate(ctx.plan.points):
        fd = Um < p.nu
        far_u = ctx.far_user_per_nu * p.nu
        den_dl = i_x_dl + c_dl[fd].sum() + far_u + cfg.si_scale * p.eps0 * cfg.Q
        den_ul = i_x_ul + c_ul[fd].sum() + far_u + cfg.si_scale * p.eps_star * P_ul
        if den_dl <= 0 or den_ul <= 0:
            return None
        out_dl[i] = np.log1p(sig_dl / den_dl)
        out_ul[i] = np.log1p(sig_ul / den_ul)
        if cond_dl:
            out_dl[i] = expected_log1p_exp(mean_dl / den_dl)
        if cond_ul:
            out_ul[i] = expected_log1p_exp(mean_ul / den_ul)
    return out_dl, out_ul


def simulate_drop(plan: SimPlan, rng, ctx: _Context | None = None):
    """Draw one retained drop; returns ``(realization, diagnostics)``.

    Drops with a zero denominator or a point closer than 1e-6 km to a receiver
    are redrawn; ``diagnostics["resampled"]`` counts them.
    """
    ctx = ctx or _Context(plan)
    redraws = 0
    while True:
        drawn = _draw(ctx, rng)
        if drawn is not None:
            real, diag = drawn
            rates = _rates_on(ctx, real, diag)
            if rates is not None:
                diag["resampled"] = redraws
                diag["rates"] = rates
                return real, diag
        redraws += 1
        if redraws > 1000:
            raise RuntimeError("could not draw a valid network realization")


def _run_chunk(args):
    plan, seed_seq, n = args
    ctx = _Context(plan)
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    P = len(plan.points)
    dl = np.empty((n, P))
    ul = np.empty((n, P))
    nv_dl = np.zeros((ctx.M, 2))
    nv_ul = np.zeros((ctx.M, 2))
    t_dl = np.zeros(ctx.M)
    t_ul = np.zeros(ctx.M)
    redraws = 0
    for i in range(n):
        real, diag = simulate_drop(plan, rng, ctx)
        redraws += diag["resampled"]
        dl[i], ul[i] = diag["rates"]
        z = diag["in_zone"]
        for k in range(ctx.M):
            sel = z & (real.bs_tier == k)
            nv_dl[k] += (real.V_dl[sel].sum(), sel.sum())
            nv_ul[k] += (real.V_ul[sel].sum(), sel.sum())
        t_dl[real.bs_tier[diag["dl_bs"]]] += 1
        t_ul[real.bs_tier[diag["ul_bs"]]] += 1
    return dl, ul, redraws, nv_dl, nv_ul, t_dl, t_ul


def default_workers() -> int:
    env = os.environ.get("FDHETNET_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError("FDHETNET_THREADS must be a positive integer") from None
    return 1


def run_drops(plan: SimPlan, workers: int | None = None) -> SimOutput:
    """Run every drop of ``plan``; identical output for any worker count."""
    workers = workers or default_workers()
    n_chunks = -(-plan.trials // plan.chunk)
    seqs = np.random.SeedSequence(plan.seed).spawn(n_chunks)
    sizes = [min(plan.chunk, plan.trials - i * plan.chunk) for i in range(n_chunks)]
    jobs = [(plan, s, n) for s, n in zip(seqs, sizes)]
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    dl = np.concatenate([p[0] for p in parts])
    ul = np.concatenate([p[1] for p in parts])
    nv_dl = sum(p[3] for p in parts)
    nv_ul = sum(p[4] for p in parts)
    t_dl = sum(p[5] for p in parts)
    t_ul = sum(p[6] for p in parts)
    with np.errstate(invalid="ignore", divide="ignore"):
        return SimOutput(dl=dl, ul=ul, points=plan.points, resampled=int(sum(p[2] for p in parts)),
                         nonvoid_dl=nv_dl[:, 0] / nv_dl[:, 1], nonvoid_ul=nv_ul[:, 0] / nv_ul[:, 1],
                         assoc_dl_tier=t_dl / plan.trials, assoc_ul_tier=t_ul / plan.trials)


def estimate_rates(plan: SimPlan, workers: int | None = None):
    """``(downlink, uplink)`` :class:`RateResult` at the plan's first operating point."""
    out = run_drops(plan, workers)
    return out.result(Direction.DOWNLINK, 0), out.result(Direction.UPLINK, 0)


def validate_bound(plan: SimPlan, threshold: float = 0.10, bound_nu: float | None = None,
                   output: SimOutput | None = None, workers: int | None = None) -> list:
    """Compare bounds with simulation at every operating point of ``plan``.

    The verdict is PASS when the estimate is at least the bound minus the CI
    half-width and the relative gap ``(estimate - bound) / estimate`` is below
    ``threshold``. ``bound_nu`` overrides the ``nu`` used for the bound, which
    gives a deliberate mismatch for negative controls.
    """
    out = output or run_drops(plan, workers)
    rows = []
    for k, p in enumerate(plan.points):
        cfg = replace(plan.config, nu=p.nu, eps0=p.eps0, eps_star=p.eps_star)
        nu_b = p.nu if bound_nu is None else bound_nu
        for d in (Direction.DOWNLINK, Direction.UPLINK):
            b = rate_bound(RateBoundSpec(replace(cfg, nu=nu_b), nu_b, d)).value
            est = out.result(d, k)
            gap = (est.value - b) / est.value if est.value > 0 else np.inf
            ok = (est.value >= b - est.ci_halfwidth) and (gap < threshold)
            rows.append({"direction": d.value, "nu": p.nu, "eps0": p.eps0, "eps_star": p.eps_star,
                         "bound": b, "estimate": est.value, "ci": est.ci_halfwidth, "gap": gap,
                         "verdict": "PASS" if ok else "FAIL"})
    return rows
