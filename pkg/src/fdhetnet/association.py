"""User association schemes and their tier statistics.

A user attaches to the base station maximizing ``psi / ||x||^alpha``. Mapping
each tier-``m`` point to ``psi^{-1/alpha} x`` produces a PPP of intensity
``lam_m E[psi_m^{2/alpha}]``, so the tier statistics below only need
fractional moments of the bias laws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NoCandidateError, ParameterError
from .marks import MarkDistribution, constant, exponential
from .shotnoise import check_alpha

__all__ = [
    "Direction",
    "Scheme",
    "TierParams",
    "AssociationScheme",
    "TierStats",
    "bias_law",
    "gain_ratio_law",
    "tier_stats",
    "effective_intensity",
    "max_assoc_cdf",
    "Candidates",
    "association_values",
    "associate",
]

ZETA_FIT = 3.5


class Direction(str, Enum):
    DOWNLINK = "downlink"
    UPLINK = "uplink"


class Scheme(str, Enum):
    GUA = "gua"
    DROA = "droa"
    MDROA = "mdroa"
    NBA = "nba"
    COUPLED_MROA = "coupled_mroa"


@dataclass(frozen=True)
class TierParams:
    """One BS tier.

    Parameters
    ----------
    power : float
        Transmit power in W.
    intensity : float
        BS intensity per km^2.
    fading : MarkDistribution
        Power gain law of every BS-user and BS-BS channel of this tier.
    bias_dl, bias_ul : MarkDistribution, optional
        Explicit biases, only read by :attr:`Scheme.GUA`.
    """

    power: float
    intensity: float
    fading: MarkDistribution = field(default_factory=exponential)
    bias_dl: MarkDistribution | None = None
    bias_ul: MarkDistribution | None = None

    def __post_init__(self):
        if not (self.power > 0):
            raise ParameterError("tier power must be positive")
        if not (self.intensity > 0):
            raise ParameterError("tier intensity must be positive")
        if not (self.fading.mean > 0):
            raise ParameterError("fading must have a positive mean")


@dataclass(frozen=True)
class AssociationScheme:
    """Downlink and uplink rules; they may differ (decoupled association)."""

    downlink: Scheme = Scheme.MDROA
    uplink: Scheme = Scheme.MDROA

    def __post_init__(self):
        object.__setattr__(self, "downlink", Scheme(self.downlink))
        object.__setattr__(self, "uplink", Scheme(self.uplink))

    def for_direction(self, direction) -> Scheme:
        return self.downlink if Direction(direction) is Direction.DOWNLINK else self.uplink

    @property
    def coupled(self) -> bool:
        return self.downlink is Scheme.COUPLED_MROA or self.uplink is Scheme.COUPLED_MROA


@dataclass(frozen=True)
class TierStats:
    """Per-tier association statistics for one link direction."""

    theta: float
    load: float
    zeta: float
    rho: float
    lam_tilde: float
    weight: float


def _explicit_bias(tier: TierParams, direction: Direction) -> MarkDistribution:
    bias = tier.bias_dl if direction is Direction.DOWNLINK else tier.bias_ul
    if bias is None:
        raise ParameterError("GUA needs explicit per-tier biases")
    return bias


def bias_law(tier: TierParams, scheme, direction) -> MarkDistribution:
    """Law of the bias ``psi`` a scheme assigns to ``tier`` in ``direction``."""
    scheme, direction = Scheme(scheme), Direction(direction)
    dl = direction is Direction.DOWNLINK
    if scheme is Scheme.MDROA:
        return constant(tier.power * tier.fading.mean if dl else tier.fading.mean)
    if scheme is Scheme.DROA:
        return tier.fading.scaled(tier.power) if dl else tier.fading
    if scheme is Scheme.NBA:
        return constant(1.0)
    if scheme is Scheme.COUPLED_MROA:
        # one rule for both directions: the tier's mean channel gain
        return constant(tier.fading.mean)
    return _explicit_bias(tier, direction)


def gain_ratio_law(tier: TierParams, scheme, direction, n_samples: int = 20000) -> MarkDistribution:
    """Law of ``h = H / psi``, the serving gain divided by the serving bias.

    Under DROA the bias is the gain itself (times the power on the downlink),
    so ``h`` is deterministic. For GUA with a random bias independent of the
    gain an empirical law is built from a fixed-seed sample.
    """
    scheme, direction = Scheme(scheme), Direction(direction)
    dl = direction is Direction.DOWNLINK
    if scheme is Scheme.DROA:
        return constant(1.0 / tier.power if dl else 1.0)
    psi = bias_law(tier, scheme, direction)
    if psi.kind == "constant":
        return tier.fading.scaled(1.0 / psi.value)
    rng = np.random.Generator(np.random.PCG64(20240611))
    h = tier.fading.sample(rng, n_samples) / psi.sample(rng, n_samples)
    return MarkDistribution("empirical", samples=tuple(h.tolist()))


def effective_intensity(tiers, alpha: float, direction, scheme) -> np.ndarray:
    """Per-tier ``lam_m E[psi_m^{2/alpha}]``."""
    alpha = check_alpha(alpha)
    return np.array([t.intensity * bias_law(t, _scheme_of(scheme, direction), direction).moment(2.0 / alpha)
                     for t in tiers])


def _scheme_of(scheme, direction) -> Scheme:
    if isinstance(scheme, AssociationScheme):
        return scheme.for_direction(direction)
    return Scheme(scheme)


def tier_stats(tiers, mu: float, alpha: float, direction, scheme=Scheme.MDROA) -> list:
    """Association probability, load and non-void probability per tier.

    ``mu = inf`` is the full-load limit where every BS is non-void.
    """
    alpha = check_alpha(alpha)
    if not (mu >= 0):
        raise ParameterError("user intensity must be >= 0")
    if len(tiers) == 0:
        raise ParameterError("at least one tier is required")
    sch = _scheme_of(scheme, direction)
    weights = effective_intensity(tiers, alpha, direction, sch)
    lam_tilde = float(weights.sum())
    out = []
    for t, wgt in zip(tiers, weights):
        psi = bias_law(t, sch, direction)
        theta = float(wgt / lam_tilde)
        zeta = ZETA_FIT * psi.moment(2.0 / alpha) * psi.moment(-2.0 / alpha)
        if np.isinf(mu):
            load, rho = np.inf, 1.0
        else:
            load = mu * theta / t.intensity
            rho = float(-np.expm1(-zeta * np.log1p(load / zeta)))
        out.append(TierStats(theta=theta, load=load, zeta=float(zeta), rho=rho,
                             lam_tilde=lam_tilde, weight=float(wgt)))
    return out


def max_assoc_cdf(x, tiers, alpha: float, direction, scheme=Scheme.MDROA):
    """CDF of the largest association value ``Psi_*(||X_*||)`` seen at the origin."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ParameterError("association value must be positive")
    lam_tilde = effective_intensity(tiers, alpha, direction, _scheme_of(scheme, direction)).sum()
    with np.errstate(divide="ignore", over="ignore"):
        return np.exp(-np.pi * x ** (-2.0 / alpha) * lam_tilde)


@dataclass(frozen=True)
class Candidates:
    """Base stations seen by one user.

    ``gain_dl`` is the BS-to-user power gain. ``gain_ul`` is the user-to-BS
    gain and defaults to ``gain_dl`` (reciprocal channels).
    """

    tier: np.ndarray
    dist: np.ndarray
    gain_dl: np.ndarray
    gain_ul: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "tier", np.asarray(self.tier, dtype=int))
        object.__setattr__(self, "dist", np.asarray(self.dist, dtype=float))
        object.__setattr__(self, "gain_dl", np.asarray(self.gain_dl, dtype=float))
        if self.gain_ul is None:
            object.__setattr__(self, "gain_ul", self.gain_dl)
        else:
            object.__setattr__(self, "gain_ul", np.asarray(self.gain_ul, dtype=float))

    def __len__(self):
        return self.dist.size


def association_values(cands: Candidates, tiers, alpha: float, scheme, direction) -> np.ndarray:
    """``Psi(||x||)`` of every candidate under the direction's rule."""
    sch, direction = _scheme_of(scheme, direction), Direction(direction)
    dl = direction is Direction.DOWNLINK
    power = np.array([t.power for t in tiers])[cands.tier]
    if sch is Scheme.DROA:
        psi = power * cands.gain_dl if dl else cands.gain_ul
    elif sch is Scheme.GUA:
        vals = np.array([_explicit_bias(t, direction) for t in tiers])
        if any(v.kind != "constant" for v in vals):
            raise ParameterError("association on realizations needs constant GUA biases")
        psi = np.array([v.value for v in vals])[cands.tier]
    else:
        psi = np.array([bias_law(t, sch, direction).value for t in tiers])[cands.tier]
    return psi * cands.dist ** (-alpha)


def associate(cands: Candidates, tiers, alpha: float, scheme, direction) -> int:
    """Index of the chosen BS among ``cands``.

    Ties go to the smaller distance, then the lower tier, then the lower index.
    """
    if len(cands) == 0:
        raise NoCandidateError("no base station to associate with")
    vals = association_values(cands, tiers, alpha, scheme, direction)
    idx = np.arange(len(cands))
    order = np.lexsort((idx, cands.tier, cands.dist, -vals))
    return int(order[0])
