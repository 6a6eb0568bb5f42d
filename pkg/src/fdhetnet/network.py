"""Full parameterization of a two-way (full-duplex) multi-tier network."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .association import AssociationScheme, Direction, Scheme, TierParams, gain_ratio_law, tier_stats
from .errors import ParameterError
from .marks import MarkDistribution, exponential
from .shotnoise import check_alpha

__all__ = ["NetworkConfig", "Scheme", "table_one", "LinkStats", "link_stats"]


@dataclass(frozen=True)
class NetworkConfig:
    """Network parameters.

    Parameters
    ----------
    tiers : tuple of TierParams
        BS tiers.
    alpha : float
        Path-loss exponent, larger than 2.
    mu : float
        User intensity per km^2. ``inf`` selects the full-load limit.
    Q : float
        User transmit power in W.
    eps0, eps_star : float
        Residual self-interference factors at users and at BSs.
    nu : float
        Probability that a scheduled user has two-way traffic.
    user_fading : MarkDistribution
        Gain law of user-to-user and user-to-BS interfering channels.
    scheme : AssociationScheme
        Downlink and uplink association rules.
    pathloss_ref : float
        Reference distance ``d0`` in km of the path-loss law ``(d / d0)^-alpha``.
        Interference-only ratios do not depend on it; residual
        self-interference effectively scales by ``d0^-alpha``.
    """

    tiers: tuple
    alpha: float = 4.0
    mu: float = 500.0
    Q: float = 0.1
    eps0: float = 1e-8
    eps_star: float = 1e-5
    nu: float = 1.0
    user_fading: MarkDistribution = field(default_factory=exponential)
    scheme: AssociationScheme = field(default_factory=AssociationScheme)
    pathloss_ref: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        if len(self.tiers) == 0:
            raise ParameterError("at least one tier is required")
        check_alpha(self.alpha)
        if not (self.mu >= 0):
            raise ParameterError("user intensity must be >= 0")
        if not (self.Q > 0):
            raise ParameterError("user power must be positive")
        if not (self.pathloss_ref > 0 and np.isfinite(self.pathloss_ref)):
            raise ParameterError("path-loss reference distance must be positive")
        for name in ("eps0", "eps_star", "nu"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ParameterError(f"{name} must lie in [0, 1]")

    def with_(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)

    @property
    def powers(self) -> np.ndarray:
        return np.array([t.power for t in self.tiers])

    @property
    def intensities(self) -> np.ndarray:
        return np.array([t.intensity for t in self.tiers])

    @property
    def si_scale(self) -> float:
        """Factor ``d0^-alpha`` multiplying both residual self-interference terms."""
        return float(self.pathloss_ref ** (-self.alpha))

    @property
    def full_load(self) -> bool:
        return bool(np.isinf(self.mu))


def table_one(lambda2: float = 10.0, **changes) -> NetworkConfig:
    """Two-tier reference network (macro 40 W at 1/km^2, small cells 1 W)."""
    tiers = (TierParams(40.0, 1.0), TierParams(1.0, float(lambda2)))
    return NetworkConfig(tiers=tiers, **changes)


@dataclass(frozen=True)
class LinkStats:
    """Association statistics of both directions plus serving-gain laws."""

    dl: tuple
    ul: tuple
    h_dl: tuple
    h_ul: tuple
    intensities: tuple

    @property
    def lam_tilde_dl(self) -> float:
        return self.dl[0].lam_tilde

    @property
    def lam_tilde_ul(self) -> float:
        return self.ul[0].lam_tilde

    @property
    def active_ul_intensity(self) -> float:
        """``sum_k lam_k rho^ul_k``, the intensity of scheduled uplink users."""
        return float(sum(s.rho * lam for s, lam in zip(self.ul, self.intensities)))


def link_stats(cfg: NetworkConfig) -> LinkStats:
    sch = cfg.scheme
    dl = tuple(tier_stats(cfg.tiers, cfg.mu, cfg.alpha, Direction.DOWNLINK, sch))
    ul = tuple(tier_stats(cfg.tiers, cfg.mu, cfg.alpha, Direction.UPLINK, sch))
    h_dl = tuple(gain_ratio_law(t, sch.downlink, Direction.DOWNLINK) for t in cfg.tiers)
    h_ul = tuple(gain_ratio_law(t, sch.uplink, Direction.UPLINK) for t in cfg.tiers)
    return LinkStats(dl=dl, ul=ul, h_dl=h_dl, h_ul=h_ul, intensities=tuple(cfg.intensities.tolist()))
