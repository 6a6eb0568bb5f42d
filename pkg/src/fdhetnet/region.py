"""Achievable (uplink, downlink) rate regions and the rate-optimal traffic pattern.

Points are ``(R_ul, R_dl)`` pairs in nats/s/Hz. The frontier of the largest
region has two branches that meet at the all-FD corner ``f``:

* downlink branch ``D(nu) = (nu C_ul(nu), nu C_dl(nu) + (1 - nu) C_dl_HD)``,
  FD for a fraction ``nu`` of the time and HD downlink otherwise;
* uplink branch ``U(nu) = (nu C_ul(nu) + (1 - nu) C_ul_HD, nu C_dl(nu))``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .network import NetworkConfig
from .rates import hd_rates, rate_pair

__all__ = [
    "NonConcaveError",
    "RateCurve",
    "RateRegion",
    "Regions",
    "build_regions",
    "branch_point",
    "is_concave",
    "OptimalNu",
    "optimal_nu",
    "frontier_slope",
    "golden_section_max",
    "regions_csv",
]

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0
GRID_POINTS = 33


class NonConcaveError(NumericalError):
    """The sampled frontier is not concave."""


class RateCurve:
    """Memoized ``nu -> (C_dl(nu), C_ul(nu))`` plus the HD baselines."""

    def __init__(self, config: NetworkConfig, width: float = 0.5):
        self.config = config
        self.width = width
        self.hd_dl, self.hd_ul = hd_rates(config, width)
        self._cache = {}

    def __call__(self, nu: float):
        nu = float(nu)
        if nu not in self._cache:
            self._cache[nu] = rate_pair(self.config, nu, width=self.width)
        return self._cache[nu]

    @property
    def f(self):
        dl, ul = self(1.0)
        return ul, dl

    def sum_rate(self, nu: float) -> float:
        return float(sum(self(nu)))


def branch_point(curve: RateCurve, nu: float, branch: str = "downlink"):
    """``(R_ul, R_dl)`` on the given frontier branch at time-share ``nu``."""
    dl, ul = curve(nu)
    if branch == "downlink":
        return nu * ul, nu * dl + (1.0 - nu) * curve.hd_dl
    if branch == "uplink":
        return nu * ul + (1.0 - nu) * curve.hd_ul, nu * dl
    raise ValueError(f"unknown branch {branch!r}")


def branch_sum(curve: RateCurve, nu: float, branch: str = "downlink") -> float:
    return float(sum(branch_point(curve, nu, branch)))


def is_concave(points, tol: float = 1e-9) -> bool:
    """True when the polyline only turns clockwise (a concave ``R_dl(R_ul)``).

    ``points`` must be ordered by increasing ``R_ul``.
    """
    p = np.asarray(points, dtype=float)
    if p.shape[0] < 3:
        return True
    d = np.diff(p, axis=0)
    cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
    scale = np.max(np.abs(p)) ** 2
    return bool(np.all(cross <= tol * scale))


def _upper_hull(points):
    """Upper concave envelope of points, including the axis anchors, sorted by x."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


@dataclass(frozen=True)
class RateRegion:
    """A region of achievable ``(R_ul, R_dl)`` pairs.

    ``kind`` is one of ``FD_rectangle``, ``HD_triangle``, ``inf_hull`` and
    ``sup_region``. ``frontier`` holds ``(nu, R_ul, R_dl)`` samples for the
    largest region.
    """

    kind: str
    corners: tuple
    frontier: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if any(min(c) < 0 for c in self.corners):
            raise ValueError("region corners must be nonnegative")

    def contains(self, point, tol: float = 1e-12) -> bool:
        ul, dl = map(float, point)
        if ul < -tol or dl < -tol:
            return False
        if self.kind == "FD_rectangle":
            cu, cd = self.corners[2]
            return ul <= cu + tol and dl <= cd + tol
        if self.kind == "HD_triangle":
            hu = self.corners[2][0]
            hd = self.corners[1][1]
            return ul / hu + dl / hd <= 1.0 + tol
        if self.kind == "inf_hull":
            return _inf_dl(self.corners, ul, dl, tol) or _inf_ul(self.corners, ul, dl, tol)
        hull = _upper_hull([c for c in self.corners] + [(u, d) for _, u, d in self.frontier])
        xs = np.array([h[0] for h in hull])
        ys = np.array([h[1] for h in hull])
        if ul > xs[-1] + tol:
            return False
        return dl <= float(np.interp(ul, xs, ys)) + tol


def _inf_dl(c, ul, dl, tol):
    """Quadrilateral 0, (0, C_dl_HD), f, (C_ul_1, 0)."""
    hd = c[1][1]
    cu, cd = c[2]
    if ul > cu + tol:
        return False
    if hd <= cd:
        return dl <= cd + tol
    return (dl - cd) / (hd - cd) + ul / cu <= 1.0 + tol


def _inf_ul(c, ul, dl, tol):
    """Quadrilateral 0, (0, C_dl_1), f, (C_ul_HD, 0)."""
    hu = c[3][0]
    cu, cd = c[2]
    if dl > cd + tol:
        return False
    if hu <= cu:
        return ul <= cu + tol
    return (ul - cu) / (hu - cu) + dl / cd <= 1.0 + tol


@dataclass(frozen=True)
class Regions:
    FD: RateRegion
    HD: RateRegion
    inf: RateRegion
    sup: RateRegion
    hd: tuple
    f: tuple
    grid: tuple

    def inf_dl(self, point, tol: float = 1e-12) -> bool:
        return _inf_dl(self.inf.corners, *map(float, point), tol)

    def inf_ul(self, point, tol: float = 1e-12) -> bool:
        return _inf_ul(self.inf.corners, *map(float, point), tol)


def build_regions(config: NetworkConfig, nu_grid=None, curve: RateCurve | None = None) -> Regions:
    """Construct ``R_FD``, ``R_HD``, ``R_inf`` and ``R_sup`` for ``config``.

    ``nu_grid`` must contain 0 and 1; it defaults to 33 evenly spaced points.
    """
    grid = np.linspace(0.0, 1.0, GRID_POINTS) if nu_grid is None else np.unique(np.asarray(nu_grid, float))
    if grid[0] != 0.0 or grid[-1] != 1.0:
        raise ValueError("nu grid must include 0 and 1")
    curve = curve or RateCurve(config)
    hd_dl, hd_ul = curve.hd_dl, curve.hd_ul
    fu, fd = curve.f
    origin = (0.0, 0.0)
    FD = RateRegion("FD_rectangle", (origin, (0.0, fd), (fu, fd), (fu, 0.0)))
    HD = RateRegion("HD_triangle", (origin, (0.0, hd_dl), (hd_ul, 0.0)))
    inf = RateRegion("inf_hull", (origin, (0.0, hd_dl), (fu, fd), (hd_ul, 0.0)))
    dl_branch = [(nu, *branch_point(curve, nu, "downlink")) for nu in grid]
    ul_branch = [(nu, *branch_point(curve, nu, "uplink")) for nu in grid[::-1]]
    frontier = tuple(dl_branch + ul_branch[1:])
    sup = RateRegion("sup_region", (origin, (0.0, hd_dl), (fu, fd), (hd_ul, 0.0)), frontier)
    return Regions(FD=FD, HD=HD, inf=inf, sup=sup, hd=(hd_dl, hd_ul), f=(fu, fd), grid=tuple(grid))


def golden_section_max(fn, lo: float, hi: float, tol: float = 1e-6):
    """Maximize a unimodal ``fn`` on ``[lo, hi]``; returns ``(x, fn(x))``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


@dataclass(frozen=True)
class OptimalNu:
    nu: float
    sum_rate: float
    branch: str
    grid: tuple
    grid_sums: tuple


def optimal_nu(config: NetworkConfig, tolerance: float = 1e-5, branch: str = "best",
               curve: RateCurve | None = None) -> OptimalNu:
    """Traffic pattern maximizing the sum rate ``R_ul + R_dl`` along the frontier.

    The 33-point grid locates the best cell, golden-section search refines it
    to ``tolerance``. Raises :class:`NonConcaveError` if the sampled branch is
    not concave.
    """
    curve = curve or RateCurve(config)
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    branches = ("downlink", "uplink") if branch == "best" else (branch,)
    best = None
    for br in branches:
        pts = [branch_point(curve, nu, br) for nu in grid]
        ordered = pts if br == "downlink" else pts[::-1]
        if not is_concave(ordered):
            raise NonConcaveError(f"{br} frontier branch is not concave on the nu grid")
        sums = np.array([u + d for u, d in pts])
        k = int(np.argmax(sums))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, grid.size - 1)]
        nu, val = golden_section_max(lambda v: branch_sum(curve, v, br), lo, hi, tolerance)
        if sums[k] > val:
            nu, val = float(grid[k]), float(sums[k])
        cand = OptimalNu(nu=float(nu), sum_rate=float(val), branch=br, grid=tuple(grid), grid_sums=tuple(sums))
        if best is None or cand.sum_rate > best.sum_rate:
            best = cand
    return best


def frontier_slope(curve: RateCurve, nu: float, branch: str = "downlink", h: float = 1e-3) -> float:
    """Finite-difference ``dR_ul / dR_dl`` along a frontier branch."""
    lo, hi = max(nu - h, 0.0), min(nu + h, 1.0)
    u0, d0 = branch_point(curve, lo, branch)
    u1, d1 = branch_point(curve, hi, branch)
    return (u1 - u0) / (d1 - d0)


def regions_csv(regions: Regions) -> str:
    """Corner and frontier table as CSV text (LF line endings)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["region", "nu [-]", "R_ul [nats/s/Hz]", "R_dl [nats/s/Hz]"])
    for name in ("FD", "HD", "inf"):
        for u, d in getattr(regions, name).corners:
            w.writerow([name, "", f"{u:.10g}", f"{d:.10g}"])
    for nu, u, d in regions.sup.frontier:
        w.writerow(["sup", f"{nu:.10g}", f"{u:.10g}", f"{d:.10g}"])
    return buf.getvalue()
