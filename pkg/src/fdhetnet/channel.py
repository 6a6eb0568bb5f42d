"""Network realizations and exact full-duplex SIRs on them.

The typical user sits at the origin. Downlink interference comes from every
other non-void BS and from every scheduled uplink user that has two-way
traffic; uplink interference is measured at the receiving BS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .association import Candidates
from .errors import ParameterError
from .marks import MarkDistribution, constant, exponential

__all__ = [
    "FadingModel",
    "fading",
    "NetworkRealization",
    "INFINITE_SIR",
    "downlink_sir",
    "uplink_sir",
]

INFINITE_SIR = np.inf

FadingModel = MarkDistribution


def fading(kind: str, law: MarkDistribution | None = None) -> MarkDistribution:
    """``"none"`` (unit gain), ``"rayleigh"`` (unit-mean exponential) or ``"general"``."""
    if kind == "none":
        return constant(1.0)
    if kind == "rayleigh":
        return exponential(1.0)
    if kind == "general":
        if law is None:
            raise ParameterError("general fading needs a mark distribution")
        return law
    raise ParameterError(f"unknown fading kind {kind!r}")


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled drop.

    Parameters
    ----------
    bs_xy : (N, 2) array
        BS positions in km.
    bs_tier : (N,) int array
    bs_power : (N,) array
        Transmit powers in W.
    H : (N,) array
        BS-to-origin gains, reused for the reciprocal uplink of the typical user.
    Hb : (N,) array
        BS-to-uplink-receiver gains.
    V_dl, V_ul : (N,) bool arrays
        Non-void flags.
    sched_xy : (S, 2) array
        Scheduled uplink users, one per non-void uplink BS.
    sched_owner : (S,) int array
        Index of the BS each scheduled user transmits to.
    G, Gb : (S,) arrays
        User-to-origin and user-to-uplink-receiver gains.
    fd : (S,) bool array
        Two-way traffic flags.
    typical : int
        Row of ``sched_*`` holding the typical user, or -1.
    """

    bs_xy: np.ndarray
    bs_tier: np.ndarray
    bs_power: np.ndarray
    H: np.ndarray
    Hb: np.ndarray
    V_dl: np.ndarray
    V_ul: np.ndarray
    sched_xy: np.ndarray
    sched_owner: np.ndarray
    G: np.ndarray
    Gb: np.ndarray
    fd: np.ndarray
    typical: int = -1

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            val = getattr(self, name)
            if isinstance(val, np.ndarray):
                arr = np.array(val)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def n_bs(self) -> int:
        return self.bs_xy.shape[0]

    def candidates(self) -> Candidates:
        d = np.hypot(self.bs_xy[:, 0], self.bs_xy[:, 1])
        return Candidates(tier=self.bs_tier, dist=d, gain_dl=self.H)

    def with_fd(self, fd) -> "NetworkRealization":
        from dataclasses import replace
        return replace(self, fd=np.asarray(fd, dtype=bool))


def _interferers(real: NetworkRealization):
    mask = real.fd.copy()
    if real.typical >= 0:
        mask[real.typical] = False
    return mask


def downlink_sir(real: NetworkRealization, serving: int, eps0: float, Q: float, is_fd_user: bool,
                 alpha: float = 4.0, extra: float = 0.0, ref: float = 1.0) -> float:
    """SIR of the typical user served by BS ``serving``.

    ``extra`` is additive interference from outside the window and ``ref`` the
    path-loss reference distance in the units of the coordinates. Returns
    :data:`INFINITE_SIR` when the denominator is zero.
    """
    if not (0.0 <= eps0 <= 1.0):
        raise ParameterError("eps0 must lie in [0, 1]")
    d2 = np.einsum("ij,ij->i", real.bs_xy, real.bs_xy)
    pl = d2 ** (-0.5 * alpha)
    signal = real.bs_power[serving] * real.H[serving] * pl[serving]
    bs = real.V_dl * real.bs_power * real.H * pl
    i_x = bs.sum() - bs[serving]
    mask = _interferers(real)
    u2 = np.einsum("ij,ij->i", real.sched_xy[mask], real.sched_xy[mask])
    i_u = float(np.sum(Q * real.G[mask] * u2 ** (-0.5 * alpha)))
    den = i_x + i_u + ref ** (-alpha) * eps0 * Q * float(is_fd_user) + extra
    if den <= 0:
        return INFINITE_SIR
    return float(signal / den)


def uplink_sir(real: NetworkRealization, serving: int, eps_star: float, Q: float,
               alpha: float = 4.0, extra: float = 0.0, ref: float = 1.0) -> float:
    """SIR at BS ``serving`` of the typical user's uplink signal."""
    if not (0.0 <= eps_star <= 1.0):
        raise ParameterError("eps_star must lie in [0, 1]")
    rx = real.bs_xy[serving]
    signal = Q * real.H[serving] * float(rx @ rx) ** (-0.5 * alpha)
    dx = real.bs_xy - rx
    d2 = np.einsum("ij,ij->i", dx, dx)
    keep = np.ones(real.n_bs, dtype=bool)
    keep[serving] = False
    i_x = float(np.sum((real.V_ul * real.bs_power * real.Hb)[keep] * d2[keep] ** (-0.5 * alpha)))
    mask = _interferers(real)
    du = real.sched_xy[mask] - rx
    u2 = np.einsum("ij,ij->i", du, du)
    i_u = float(np.sum(Q * real.Gb[mask] * u2 ** (-0.5 * alpha)))
    den = i_x + i_u + ref ** (-alpha) * eps_star * real.bs_power[serving] + extra
    if den <= 0:
        return INFINITE_SIR
    return float(signal / den)
