"""Analytical lower bounds on the downlink and uplink ergodic rates.

All rates are in nats/s/Hz. The bounds rest on the Shannon-transform identity

    E[log(1 + h Z)] = int_0^inf (1 - L_h(s)) / s * L_{1/Z}(s) ds,

with ``h = H/psi`` the serving gain over the serving bias and ``Z`` the
signal-to-interference ratio with the gain taken out. The outer integral runs
over ``t = log s`` on composite Gauss-Legendre panels and is truncated once
the integrand falls below ``1e-12`` of its running maximum at both ends.

Averaging over the distance to the serving station (exponential in the mapped
plane) leaves

    J(s) = int_0^inf exp(-u [Xi(s) + 1] - kappa s u^{alpha/2}) du,

where ``Xi`` is the normalized interference exponent of :func:`xi_tilde` and
``kappa`` carries the residual self-interference. ``J`` is computed with
64-point Gauss-Laguerre after rescaling ``u`` to the faster of the two decay
scales; without self-interference it is ``1/(Xi + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import hyp2f1, roots_laguerre

from .association import Direction, Scheme
from .errors import NumericalError, ParameterError
from .marks import MarkDistribution
from .network import LinkStats, NetworkConfig, link_stats
from .shotnoise import xi_one, xi_one_constant

__all__ = [
    "Variant",
    "RateBoundSpec",
    "RateResult",
    "log_integral",
    "shannon_transform",
    "xi_tilde",
    "xi_tilde_closed",
    "self_interference_coeff",
    "distance_average",
    "rate_bound",
    "rate_pair",
    "hd_rates",
]

TAIL_TOL = 1e-12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_LAG_U, _LAG_W = roots_laguerre(64)


class Variant(str, Enum):
    GENERAL = "general"
    NO_SELF_INTERFERENCE = "no_self_interference"
    DROA_NO_SI = "droa_no_si"
    NO_FADING_MDROA_NO_SI = "no_fading_mdroa_no_si"
    RAYLEIGH_MDROA_NO_SI = "rayleigh_mdroa_no_si"
    HD_BASELINE = "hd_baseline"


@dataclass(frozen=True)
class RateBoundSpec:
    """What to bound: network, traffic pattern ``nu``, direction and variant."""

    config: NetworkConfig
    nu: float
    direction: Direction = Direction.DOWNLINK
    variant: Variant = Variant.GENERAL

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "variant", Variant(self.variant))
        if not (0.0 <= self.nu <= 1.0):
            raise ParameterError("nu must lie in [0, 1]")
        if self.variant is Variant.HD_BASELINE and self.nu != 0.0:
            raise ParameterError("the half-duplex baseline forces nu = 0")
        v, cfg = self.variant, self.config
        if v is Variant.DROA_NO_SI and self._scheme is not Scheme.DROA:
            raise ParameterError("droa_no_si needs the DROA scheme in this direction")
        if v in (Variant.NO_FADING_MDROA_NO_SI, Variant.RAYLEIGH_MDROA_NO_SI):
            if self._scheme is not Scheme.MDROA:
                raise ParameterError(f"{v.value} needs the MDROA scheme in this direction")
            want = ("constant", 1.0) if v is Variant.NO_FADING_MDROA_NO_SI else ("exponential", 1.0)
            laws = [t.fading for t in cfg.tiers] + [cfg.user_fading]
            if any((m.kind, m.value) != want for m in laws):
                raise ParameterError(f"{v.value} needs every gain to be {want[0]} with unit mean")

    @property
    def _scheme(self) -> Scheme:
        return self.config.scheme.for_direction(self.direction)

    @property
    def uses_self_interference(self) -> bool:
        return self.variant is Variant.GENERAL


@dataclass(frozen=True)
class RateResult:
    """A rate in nats/s/Hz from a bound or a simulation."""

    value: float
    method: str
    ci_halfwidth: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)


# quadrature -----------------------------------------------------------------


def _panel_nodes(t_lo: float, t_hi: float, width: float):
    n = max(1, int(np.ceil((t_hi - t_lo) / width)))
    edges = np.linspace(t_lo, t_hi, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return t, w


def log_integral(f, t_range=(-8.0, 8.0), width: float = 0.5, t_max: float = 400.0, name: str = "s-integral"):
    """``int_0^inf f(s) ds / s`` for vectorized ``f``, over ``t = log s``.

    The range grows in steps of 8 until the integrand at both ends is below
    ``1e-12`` of the largest value seen. Returns ``(value, info)``.
    """
    lo, hi = t_range
    step = 8.0
    parts = {}

    def piece(a, b):
        key = (a, b)
        if key not in parts:
            t, w = _panel_nodes(a, b, width)
            v = np.asarray(f(np.exp(t)), dtype=float)
            if not np.all(np.isfinite(v)):
                raise NumericalError(f"{name}: non-finite integrand on t in [{a}, {b}]")
            parts[key] = (float(np.sum(w * v)), float(np.max(np.abs(v))), abs(v[0]), abs(v[-1]))
        return parts[key]

    segs = [(lo, hi)]
    piece(lo, hi)
    while True:
        peak = max(p[1] for p in parts.values())
        left = parts[segs[0]][2]
        right = parts[segs[-1]][3]
        grew = False
        if left > TAIL_TOL * peak:
            if segs[0][0] - step < -t_max:
                raise NumericalError(f"{name}: integrand does not vanish as s -> 0")
            segs.insert(0, (segs[0][0] - step, segs[0][0]))
            piece(*segs[0])
            grew = True
        if right > TAIL_TOL * peak:
            if segs[-1][1] + step > t_max:
                raise NumericalError(f"{name}: integrand tail does not decay (non-convergent)")
            segs.append((segs[-1][1], segs[-1][1] + step))
            piece(*segs[-1])
            grew = True
        if not grew:
            break
    total = float(np.sum([parts[s][0] for s in segs]))
    info = {"t_min": segs[0][0], "t_max": segs[-1][1], "panel_width": width,
            "evaluations": 16 * sum(int(np.ceil((b - a) / width)) for a, b in segs)}
    return total, info


def shannon_transform(gain_law: MarkDistribution, inv_sir_laplace, width: float = 0.5) -> float:
    """``E[log(1 + h Z)]`` from the laws of ``h`` and ``1/Z``.

    ``inv_sir_laplace`` maps an array of ``s`` to ``E[exp(-s/Z)]``.
    """
    if gain_law.kind == "constant" and gain_law.value == 0.0:
        return 0.0

    def f(s):
        return gain_law.laplace_complement(s) * inv_sir_laplace(s)

    val, _ = log_integral(f, width=width, name="Shannon transform")
    return max(val, 0.0)


# interference exponents -----------------------------------------------------


def _g(alpha):
    return float(gamma_fn(1.0 - 2.0 / alpha))


def xi_tilde(direction, m: int, s, spec: RateBoundSpec, stats: LinkStats | None = None):
    """Normalized interference exponent at argument ``s`` (elementwise).

    Downlink, serving tier ``m``: the non-void BS field beyond the serving
    station plus the field of scheduled two-way users. Uplink: the BS and user
    fields seen by the receiving station; ``m`` is ignored.
    """
    cfg = spec.config
    direction = Direction(direction)
    st = stats or link_stats(cfg)
    a = cfg.alpha
    s = np.asarray(s, dtype=float)
    nu = spec.nu
    eg = cfg.user_fading.moment(2.0 / a)
    if direction is Direction.DOWNLINK:
        pm = cfg.tiers[m].power
        out = np.zeros(s.shape)
        for k, tier in enumerate(cfg.tiers):
            sk = st.dl[k]
            out += sk.theta * sk.rho * xi_one(st.h_dl[k], a, s * tier.power / pm)
        if nu > 0:
            users = st.active_ul_intensity / st.lam_tilde_dl
            out += nu * _g(a) * users * eg * (s * cfg.Q / pm) ** (2.0 / a)
        return out
    coef = 0.0
    for k, tier in enumerate(cfg.tiers):
        sk = st.ul[k]
        coef += sk.theta * sk.rho * st.h_ul[k].moment(2.0 / a) * (tier.power / cfg.Q) ** (2.0 / a)
    if nu > 0:
        coef += nu * st.active_ul_intensity / st.lam_tilde_ul * eg
    return _g(a) * s ** (2.0 / a) * coef


def xi_tilde_closed(direction, s, spec: RateBoundSpec, stats: LinkStats | None = None):
    """Closed-form exponents for the fading-free and Rayleigh special cases.

    The downlink value is the exponent of serving tier ``m`` at argument
    ``s P_m``, which no longer depends on ``m``. Only the variants
    ``no_fading_mdroa_no_si``, ``rayleigh_mdroa_no_si`` and ``droa_no_si``
    are accepted.
    """
    cfg = spec.config
    direction = Direction(direction)
    st = stats or link_stats(cfg)
    a = cfg.alpha
    beta = 0.5 * a
    s = np.asarray(s, dtype=float)
    v = spec.variant
    nu = spec.nu
    sinc = np.sinc(2.0 / a)
    if v not in (Variant.NO_FADING_MDROA_NO_SI, Variant.RAYLEIGH_MDROA_NO_SI, Variant.DROA_NO_SI):
        raise ParameterError(f"no closed form for variant {v.value}")
    if direction is Direction.DOWNLINK:
        lt = st.lam_tilde_dl
        bs = sum(sk.theta * sk.rho for sk in st.dl)
        users = st.active_ul_intensity / lt
        if v is Variant.RAYLEIGH_MDROA_NO_SI:
            # int_1^inf s/(v^beta + s) dv = s^{1/beta}/sinc(1/beta) - int_0^1 s/(v^beta + s) dv
            near = hyp2f1(1.0, 1.0 / beta, 1.0 + 1.0 / beta, -1.0 / s)
            bs_term = s ** (2.0 / a) / sinc - near
            return bs_term * bs + nu * (s * cfg.Q) ** (2.0 / a) / sinc * users
        eg = cfg.user_fading.moment(2.0 / a)
        return xi_one_constant(s, a) * bs + nu * _g(a) * users * eg * (s * cfg.Q) ** (2.0 / a)
    lt = st.lam_tilde_ul
    lams = st.intensities
    if v is Variant.RAYLEIGH_MDROA_NO_SI:
        tot = sum(lam * sk.rho * ((t.power / cfg.Q) ** (2.0 / a) + nu)
                  for lam, sk, t in zip(lams, st.ul, cfg.tiers))
        return s ** (2.0 / a) / (lt * sinc) * tot
    if v is Variant.NO_FADING_MDROA_NO_SI:
        tot = sum(lam * sk.rho * ((t.power / cfg.Q) ** (2.0 / a) + nu)
                  for lam, sk, t in zip(lams, st.ul, cfg.tiers))
        return _g(a) * s ** (2.0 / a) / lt * tot
    eg = cfg.user_fading.moment(2.0 / a)
    bs = sum(sk.theta * sk.rho * (t.power / cfg.Q) ** (2.0 / a) for sk, t in zip(st.ul, cfg.tiers))
    return _g(a) * s ** (2.0 / a) * (bs + nu * st.active_ul_intensity / lt * eg)


def self_interference_coeff(direction, m: int, cfg: NetworkConfig, stats: LinkStats | None = None) -> float:
    """``kappa`` such that the residual self-interference enters as ``kappa s u^{alpha/2}``.

    Here ``u = pi lam_tilde y`` with ``y`` the squared mapped distance to the
    serving station, so ``kappa = eps Q / (P_m (pi lam_tilde)^{alpha/2})`` on
    the downlink and ``eps_* P_m / (Q (pi lam_tilde)^{alpha/2})`` on the uplink.
    """
    st = stats or link_stats(cfg)
    b = 0.5 * cfg.alpha
    pm = cfg.tiers[m].power
    if Direction(direction) is Direction.DOWNLINK:
        return cfg.si_scale * cfg.eps0 * cfg.Q / (pm * (np.pi * st.lam_tilde_dl) ** b)
    return cfg.si_scale * cfg.eps_star * pm / (cfg.Q * (np.pi * st.lam_tilde_ul) ** b)


def distance_average(xi, c, alpha: float):
    """``int_0^inf exp(-u (xi + 1) - c u^{alpha/2}) du`` elementwise."""
    xi = np.asarray(xi, dtype=float)
    c = np.broadcast_to(np.asarray(c, dtype=float), xi.shape)
    b = 0.5 * alpha
    a = xi + 1.0
    with np.errstate(divide="ignore"):
        scale = np.where(c > 0, np.minimum(1.0 / a, c ** (-1.0 / b)), 1.0 / a)
    t = _LAG_U[None, :]
    sc = scale.reshape(-1, 1)
    expo = t * (1.0 - a.reshape(-1, 1) * sc) - c.reshape(-1, 1) * (sc * t) ** b
    return (sc[:, 0] * (np.exp(expo) @ _LAG_W)).reshape(xi.shape)


# bounds ---------------------------------------------------------------------


def _bound_general(spec: RateBoundSpec, st: LinkStats, width: float):
    cfg = spec.config
    d = spec.direction
    per_tier = st.dl if d is Direction.DOWNLINK else st.ul
    h_laws = st.h_dl if d is Direction.DOWNLINK else st.h_ul
    single = spec.variant in (Variant.NO_SELF_INTERFERENCE,)
    infos = []
    total = 0.0
    ul_cache = {}
    for m, sm in enumerate(per_tier):
        if sm.theta == 0.0:
            continue
        kappa = 0.0 if not spec.uses_self_interference else self_interference_coeff(d, m, cfg, st)

        def f(s, m=m, kappa=kappa):
            if d is Direction.UPLINK:
                key = s.tobytes()
                if key not in ul_cache:
                    ul_cache.clear()
                    ul_cache[key] = xi_tilde(d, m, s, spec, st)
                xi = ul_cache[key]
            else:
                xi = xi_tilde(d, m, s, spec, st)
            num = h_laws[m].laplace_complement(s)
            if single:
                return num / (xi + 1.0)
            return num * distance_average(xi, kappa * s, cfg.alpha)

        val, info = log_integral(f, width=width, name=f"{d.value} tier-{m + 1} s-integral")
        infos.append(info)
        total += sm.theta * val
    return total, infos


def _bound_hd(spec: RateBoundSpec, st: LinkStats, width: float):
    # half-duplex baseline written out on its own: no user field, no self-interference
    cfg = spec.config
    a = cfg.alpha
    infos, total = [], 0.0
    if spec.direction is Direction.DOWNLINK:
        for m, sm in enumerate(st.dl):
            pm = cfg.tiers[m].power

            def f(s, pm=pm, m=m):
                den = 1.0
                for k, t in enumerate(cfg.tiers):
                    den = den + st.dl[k].theta * st.dl[k].rho * xi_one(st.h_dl[k], a, s * t.power / pm)
                return st.h_dl[m].laplace_complement(s) / den

            val, info = log_integral(f, width=width, name=f"downlink HD tier-{m + 1} s-integral")
            infos.append(info)
            total += sm.theta * val
        return total, infos
    coef = _g(a) * sum(sk.theta * sk.rho * st.h_ul[k].moment(2.0 / a) * (cfg.tiers[k].power / cfg.Q) ** (2.0 / a)
                       for k, sk in enumerate(st.ul))
    for m, sm in enumerate(st.ul):
        def f(s, m=m):
            return st.h_ul[m].laplace_complement(s) / (coef * s ** (2.0 / a) + 1.0)

        val, info = log_integral(f, width=width, name=f"uplink HD tier-{m + 1} s-integral")
        infos.append(info)
        total += sm.theta * val
    return total, infos


def _bound_special(spec: RateBoundSpec, st: LinkStats, width: float):
    if spec.variant is Variant.RAYLEIGH_MDROA_NO_SI:
        def num(s):
            return s / (1.0 + s)
    else:
        def num(s):
            return -np.expm1(-s)

    def f(s):
        return num(s) / (xi_tilde_closed(spec.direction, s, spec, st) + 1.0)

    val, info = log_integral(f, width=width, name=f"{spec.direction.value} {spec.variant.value} s-integral")
    return val, [info]


def rate_bound(spec: RateBoundSpec, width: float = 0.5, stats: LinkStats | None = None) -> RateResult:
    """Lower bound on the ergodic rate of a two-way user (nats/s/Hz).

    Parameters
    ----------
    spec : RateBoundSpec
        Network, ``nu``, direction and formula variant.
    width : float
        Panel width in ``log s``; halving it must not move the result by more
        than about ``1e-6`` relative.
    """
    st = stats or link_stats(spec.config)
    v = spec.variant
    if v is Variant.HD_BASELINE:
        val, infos = _bound_hd(spec, st, width)
    elif v in (Variant.GENERAL, Variant.NO_SELF_INTERFERENCE):
        val, infos = _bound_general(spec, st, width)
    else:
        val, infos = _bound_special(spec, st, width)
    return RateResult(value=max(float(val), 0.0), method="analytic_bound",
                      metadata={"variant": v.value, "direction": spec.direction.value,
                                "nu": spec.nu, "integrals": infos})


def rate_pair(cfg: NetworkConfig, nu: float, variant=Variant.GENERAL, width: float = 0.5):
    """``(C_dl, C_ul)`` bounds at traffic pattern ``nu``."""
    st = link_stats(cfg)
    dl = rate_bound(RateBoundSpec(cfg, nu, Direction.DOWNLINK, variant), width, st).value
    ul = rate_bound(RateBoundSpec(cfg, nu, Direction.UPLINK, variant), width, st).value
    return dl, ul


def hd_rates(cfg: NetworkConfig, width: float = 0.5):
    """Half-duplex baselines ``(C_dl_HD, C_ul_HD)``."""
    cfg0 = replace(cfg, eps0=0.0, eps_star=0.0, nu=0.0)
    return rate_pair(cfg0, 0.0, Variant.HD_BASELINE, width)
