"""Independent reference computations for the test suite.

Nothing here imports the package. Each oracle follows the model definitions
directly (brute-force sampling, adaptive quadrature in mpmath or scipy) so
that agreement with the package is a two-route check.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree
from scipy.special import gamma as gamma_fn

# shot noise -------------------------------------------------------------------


def laplace_tail_factor(lam, alpha, s, R, mark="exp"):
    """``E[exp(-s I)]`` for the field of a PPP restricted to ``|y| > R``.

    Exact: ``exp(-pi lam int_{R^2}^inf (1 - E exp(-s W v^{-alpha/2})) dv)``.
    """
    beta = alpha / 2.0
    out = []
    for sv in np.atleast_1d(s):
        if mark == "exp":
            f = lambda v: sv * v ** -beta / (1.0 + sv * v ** -beta)
        else:
            f = lambda v: -np.expm1(-sv * v ** -beta)
        val, _ = integrate.quad(f, R * R, np.inf, limit=200, epsabs=1e-14, epsrel=1e-10)
        out.append(np.exp(-np.pi * lam * val))
    return np.array(out)


def mc_laplace_incomplete(n, lam, alpha, s, drops, seed, R=20.0, chunk=500):
    """Monte Carlo ``E[exp(-s I_n)]`` with exponential unit-mean marks.

    The PPP is sampled inside radius ``R``; the field outside the disk is
    independent of it and enters through :func:`laplace_tail_factor`.
    Returns ``(estimate, standard_error)`` arrays over ``s``.
    """
    rng = np.random.default_rng(seed)
    s = np.asarray(s, dtype=float)
    beta = alpha / 2.0
    acc = np.zeros(s.size)
    acc2 = np.zeros(s.size)
    mean_count = lam * np.pi * R * R
    done = 0
    while done < drops:
        m = min(chunk, drops - done)
        counts = rng.poisson(mean_count, m)
        width = counts.max()
        d2 = rng.uniform(0.0, R * R, (m, width))
        d2[np.arange(width)[None, :] >= counts[:, None]] = np.inf
        w = rng.exponential(1.0, (m, width))
        contrib = w * d2 ** -beta
        if n > 0:
            near = np.argpartition(d2, n - 1, axis=1)[:, :n]
            contrib[np.arange(m)[:, None], near] = 0.0
        I = contrib.sum(axis=1)
        e = np.exp(-np.outer(I, s))
        acc += e.sum(axis=0)
        acc2 += (e * e).sum(axis=0)
        done += m
    mean = acc / drops
    se = np.sqrt(np.maximum(acc2 / drops - mean ** 2, 0.0) / drops)
    tail = laplace_tail_factor(lam, alpha, s, R)
    return mean * tail, se * tail


def xi_one_quad(c, alpha, mark="exp"):
    """``E_W int_1^inf (1 - exp(-c W v^{-alpha/2})) dv`` by mpmath quadrature."""
    beta = mp.mpf(alpha) / 2
    c = mp.mpf(c)
    if mark == "exp":
        f = lambda v: c / (v ** beta + c)
        second = 1  # E[W^2] / 2 for Exp(1)
    else:
        f = lambda v: -mp.expm1(-c * v ** -beta)
        second = mp.mpf(1) / 2
    # finite part on geometric breakpoints, then the two-term series tail
    T = max(mp.mpf(10) ** 8, (c * 10 ** 8) ** (1 / beta))
    pts = [mp.mpf(1)]
    while pts[-1] < T:
        pts.append(min(pts[-1] * 10, T))
    body = mp.quad(f, pts)
    tail = c * T ** (1 - beta) / (beta - 1) - second * c * c * T ** (1 - 2 * beta) / (2 * beta - 1)
    return float(body + tail)


def laplace_incomplete_quad(n, lam, alpha, s, mark="exp"):
    """``E[exp(-s I_n)]`` from the gamma law of the ``n``-th squared distance.

    Given the ``n``-th nearest point at squared distance ``y``, the remaining
    points form a PPP on ``|x|^2 > y``; ``u = pi lam y`` is Gamma(n, 1).
    """
    beta = alpha / 2.0

    def integrand(u):
        y = u / (np.pi * lam)
        # field beyond sqrt(y): pi lam y * int_1^inf (...) with c = s y^{-beta}
        xi = xi_one_quad(s * y ** -beta, alpha, mark)
        return np.exp(-u * xi) * u ** (n - 1) * np.exp(-u) / gamma_fn(n)

    pieces = [0.0, 1e-6, 1e-3, 0.1, 1.0, 5.0, 20.0, 60.0 + 4 * n]
    return sum(integrate.quad(integrand, a, b, limit=200, epsabs=1e-13, epsrel=1e-9)[0]
               for a, b in zip(pieces[:-1], pieces[1:]))


# association ------------------------------------------------------------------


def _psi(powers, scheme, direction):
    powers = np.asarray(powers, dtype=float)
    if scheme == "nba":
        return np.ones_like(powers)
    if scheme == "mdroa":
        return powers if direction == "downlink" else np.ones_like(powers)
    raise ValueError(scheme)


def association_drops(powers, lams, alpha, drops, seed, scheme="mdroa", direction="downlink", R=3.0):
    """Brute-force typical-user association over full PPP drops.

    Returns ``(tier_of_each_drop, max_association_value_of_each_drop)``.
    """
    rng = np.random.default_rng(seed)
    psi = _psi(powers, scheme, direction)
    tiers = np.empty(drops, dtype=int)
    best = np.empty(drops)
    for i in range(drops):
        vals = []
        for k, lam in enumerate(lams):
            cnt = rng.poisson(lam * np.pi * R * R)
            r2 = rng.uniform(0.0, R * R, cnt)
            vals.append(psi[k] * r2.min() ** (-alpha / 2.0) if cnt else 0.0)
        vals = np.array(vals)
        tiers[i] = int(np.argmax(vals))
        best[i] = vals.max()
    return tiers, best


def association_drops_vec(powers, lams, alpha, drops, seed, scheme="mdroa", direction="downlink", R=3.0,
                          chunk=20_000):
    """Vectorized :func:`association_drops`: nearest point per tier from full disk samples."""
    rng = np.random.default_rng(seed)
    psi = _psi(powers, scheme, direction)
    tiers, best = [], []
    for start in range(0, drops, chunk):
        n = min(chunk, drops - start)
        vals = np.zeros((n, len(lams)))
        for k, lam in enumerate(lams):
            cnt = rng.poisson(lam * np.pi * R * R, n)
            r2 = rng.uniform(0.0, R * R, cnt.sum())
            mins = np.full(n, np.inf)
            nz = cnt > 0
            offs = np.concatenate(([0], np.cumsum(cnt)[:-1]))[nz]
            mins[nz] = np.minimum.reduceat(r2, offs)
            vals[:, k] = np.where(np.isfinite(mins), psi[k] * mins ** (-alpha / 2.0), 0.0)
        tiers.append(np.argmax(vals, axis=1))
        best.append(vals.max(axis=1))
    return np.concatenate(tiers), np.concatenate(best)


def nonvoid_fraction(powers, lams, alpha, mu, drops, seed, scheme="mdroa", direction="downlink",
                     R=3.5, inner=1.5):
    """Fraction of BSs within ``inner`` of the center that serve at least one user.

    Users form a PPP of intensity ``mu`` on the radius-``R`` disk and each
    associates by the scheme's rule.
    """
    rng = np.random.default_rng(seed)
    psi = _psi(powers, scheme, direction)
    K = len(lams)
    hit = np.zeros(K)
    tot = np.zeros(K)
    for _ in range(drops):
        bs, trees = [], []
        for lam in lams:
            cnt = rng.poisson(lam * np.pi * R * R)
            r = R * np.sqrt(rng.random(cnt))
            th = 2 * np.pi * rng.random(cnt)
            xy = np.c_[r * np.cos(th), r * np.sin(th)]
            bs.append(xy)
            trees.append(cKDTree(xy))
        nu_ = rng.poisson(mu * np.pi * R * R)
        r = R * np.sqrt(rng.random(nu_))
        th = 2 * np.pi * rng.random(nu_)
        users = np.c_[r * np.cos(th), r * np.sin(th)]
        vals = np.empty((nu_, K))
        idx = np.empty((nu_, K), dtype=int)
        for k in range(K):
            d, j = trees[k].query(users)
            vals[:, k] = psi[k] * d ** (-alpha)
            idx[:, k] = j
        choice = np.argmax(vals, axis=1)
        for k in range(K):
            served = np.zeros(len(bs[k]), dtype=bool)
            served[idx[choice == k, k]] = True
            central = np.hypot(bs[k][:, 0], bs[k][:, 1]) < inner
            hit[k] += served[central].sum()
            tot[k] += central.sum()
    return hit / tot


def theta_formula(powers, lams, alpha, scheme="mdroa", direction="downlink"):
    """Association probabilities ``lam_m psi_m^{2/alpha} / sum``."""
    w = np.asarray(lams) * _psi(powers, scheme, direction) ** (2.0 / alpha)
    return w / w.sum()


def rho_formula(powers, lams, alpha, mu, scheme="mdroa", direction="downlink"):
    """Non-void probability ``1 - (1 + L/zeta)^{-zeta}`` with constant biases."""
    th = theta_formula(powers, lams, alpha, scheme, direction)
    load = mu * th / np.asarray(lams)
    zeta = 3.5
    return 1.0 - (1.0 + load / zeta) ** (-zeta)


# rate-optimal association ------------------------------------------------------


def droa_bruteforce(P, d, H, Hb, alpha, self_dl=0.0, self_ul=0.0, rng=None):
    """Argmax of ``log(1 + SIR)`` over candidate BSs, both directions.

    Downlink: the typical user receives the total power ``I0`` (every BS plus
    its own residual ``self_dl``); serving BS ``i`` leaves ``I0 - S_i`` as
    interference. Uplink: every candidate receiver sees the same total
    ``I*`` (a common interference level plus the user's own signal); the
    equivalence argument treats that total as identical across candidates.
    """
    rx = P * H * d ** (-alpha)
    I0 = rx.sum() + self_dl
    with np.errstate(divide="ignore"):
        sir_dl = rx / (I0 - rx)
    sig_ul = Hb * d ** (-alpha)
    common = (rng.exponential(1.0) if rng is not None else 1.0) + self_ul
    Istar = common + sig_ul.max()
    sir_ul = sig_ul / (Istar - sig_ul)
    return int(np.argmax(np.log1p(sir_dl))), int(np.argmax(np.log1p(sir_ul)))


# rate bounds ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _xi1_exp_alpha4(x):
    # alpha = 4, exponential mark of mean x: int_1^inf x / (v^2 + x) dv
    return float(mp.quad(lambda v: x / (v * v + x), [1, mp.inf]))


def rayleigh_bound_quad(P, lams, Q, nu, mu=np.inf, direction="downlink", alpha=4.0):
    """Rayleigh MDROA bound without self-interference, alpha = 4, by quadrature.

    All gains are unit-mean exponential. Downlink bias ``P_m``, uplink bias 1.
    The integrand ``(s/(1+s)) / (s (Xi(s) + 1))`` is integrated over
    ``t = log s`` with scipy's adaptive rule; ``Xi`` comes from
    :func:`_xi1_exp_alpha4` for the BS field and a direct Gamma-function
    expression for the user field.
    """
    assert alpha == 4.0
    P = np.asarray(P, float)
    lams = np.asarray(lams, float)
    th_dl = theta_formula(P, lams, alpha, "mdroa", "downlink")
    th_ul = theta_formula(P, lams, alpha, "mdroa", "uplink")
    if np.isinf(mu):
        rho_dl = rho_ul = np.ones_like(lams)
    else:
        rho_dl = rho_formula(P, lams, alpha, mu, "mdroa", "downlink")
        rho_ul = rho_formula(P, lams, alpha, mu, "mdroa", "uplink")
    lt_dl = float(np.sum(lams * np.sqrt(P)))
    lt_ul = float(np.sum(lams))
    users = float(np.sum(lams * rho_ul))
    g = np.sqrt(np.pi)  # Gamma(1/2)
    eg = np.sqrt(np.pi) / 2.0  # E[G^{1/2}]
    eh = np.sqrt(np.pi) / 2.0

    if direction == "downlink":
        def xi(s):
            # serving tier drops out after scaling by P_m: BS term uses x = s
            bs = sum(th_dl[k] * rho_dl[k] for k in range(len(P))) * _xi1_exp_alpha4(s)
            return bs + nu * g * users / lt_dl * eg * np.sqrt(s * Q)
    else:
        def xi(s):
            bs = sum(th_ul[k] * rho_ul[k] * eh * np.sqrt(P[k] / Q) for k in range(len(P)))
            return g * np.sqrt(s) * (bs + nu * users / lt_ul * eg)

    def f(t):
        s = np.exp(t)
        return (s / (1.0 + s)) / (xi(s) + 1.0)

    val, _ = integrate.quad(f, -40.0, 40.0, limit=400, epsabs=1e-11, epsrel=1e-9)
    return val


def expected_log1p_exp_quad(a):
    """``E[log(1 + a H)]`` for ``H ~ Exp(1)`` by direct quadrature."""
    return float(mp.quad(lambda h: mp.log1p(a * h) * mp.e ** (-h), [0, 1, 10, mp.inf]))


# queues -----------------------------------------------------------------------


def downlink_policy_mode(q_dl, q_ul):
    """Mode of the downlink-opportunistic policy from the queue emptiness pattern.

    Both nonempty: FD. Only downlink: HD downlink. Only uplink: idle, the
    uplink waits. Both empty: idle.
    """
    if q_dl > 0 and q_ul > 0:
        return "FD"
    if q_dl > 0:
        return "HD_DL"
    return "IDLE"


def uplink_policy_mode(q_dl, q_ul):
    if q_dl > 0 and q_ul > 0:
        return "FD"
    if q_ul > 0:
        return "HD_UL"
    return "IDLE"
