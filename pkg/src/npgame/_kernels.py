"""Compiled numerical kernels shared by the library and the episode loops.

Everything here is scalar code under ``numba.njit`` so the per-round work of an
episode (optimistic parameter search, leader grid scan, follower response)
runs without Python overhead. The public modules wrap these functions with
typed, documented entry points.
"""

import math

import numpy as np
from numba import njit

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
TWO_PI = 2.0 * math.pi

# Wichura (1988), algorithm AS 241 (PPND16), coefficients in ascending powers.
_A = np.array([
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3,
])
_B = np.array([
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3,
])
_C = np.array([
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
])
_D = np.array([
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9,
])
_E = np.array([
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
])
_F = np.array([
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15,
])


@njit(cache=True)
def _poly(coef, x):
    acc = 0.0
    for i in range(coef.shape[0] - 1, -1, -1):
        acc = acc * x + coef[i]
    return acc


@njit(cache=True)
def norm_pdf(z):
    return INV_SQRT_2PI * math.exp(-0.5 * z * z)


@njit(cache=True)
def norm_cdf(z):
    return 0.5 * math.erfc(-z / SQRT2)


@njit(cache=True)
def norm_quantile(p):
    """Rational approximation plus one Newton step on the cdf; p in (0, 1)."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        z = q * _poly(_A, r) / _poly(_B, r)
    else:
        r = p if q < 0.0 else 1.0 - p
        r = math.sqrt(-math.log(r))
        if r <= 5.0:
            r -= 1.6
            z = _poly(_C, r) / _poly(_D, r)
        else:
            r -= 5.0
            z = _poly(_E, r) / _poly(_F, r)
        if q < 0.0:
            z = -z
    dens = norm_pdf(z)
    if dens > 1e-300:
        # upper tail is refined on the survival function to keep relative accuracy
        if z > 0.0:
            z += (0.5 * math.erfc(z / SQRT2) - (1.0 - p)) / dens
        else:
            z -= (norm_cdf(z) - p) / dens
    return z


@njit(cache=True)
def psi_loss(mu, sigma, b):
    if sigma <= 0.0:
        return max(0.0, mu - b)
    z = (b - mu) / sigma
    return sigma * (norm_pdf(z) - z * 0.5 * math.erfc(z / SQRT2))


@njit(cache=True)
def expected_sales(mu, sigma, b):
    """E[min(max(D, 0), b)] for D ~ Normal(mu, sigma) and b >= 0."""
    if b <= 0.0:
        return 0.0
    if sigma <= 0.0:
        return min(max(mu, 0.0), b)
    zb = (b - mu) / sigma
    z0 = -mu / sigma
    # int_0^b x f(x) dx  +  b * P(D > b)
    head = mu * (norm_cdf(zb) - norm_cdf(z0)) - sigma * (norm_pdf(zb) - norm_pdf(z0))
    return head + b * 0.5 * math.erfc(zb / SQRT2)


# ---------------------------------------------------------------------------
# optimistic follower model


@njit(cache=True)
def capped_ratio(t0, t1, h_max):
    if t1 <= 0.0:
        return h_max
    return min(t0 / t1, h_max)


@njit(cache=True)
def riskless_order(t0, t1, a, sigma, h_max):
    """Price (H + a)/2 and critical-fractile order under parameters (t0, t1).

    Returns (p, b, feasible). Infeasible means H <= a: price a, order 0.
    """
    h = capped_ratio(t0, t1, h_max)
    if not h > a or a <= 0.0:
        return a, 0.0, False
    p = 0.5 * (h + a)
    mean = max(0.0, t0 - t1 * p)
    if sigma > 0.0:
        b = mean + sigma * norm_quantile((p - a) / p)
    else:
        b = mean
    return p, max(0.0, b), True


@njit(cache=True)
def follower_value(t0, t1, a, sigma, h_max):
    p, b, ok = riskless_order(t0, t1, a, sigma, h_max)
    if not ok:
        return 0.0
    return p * b


@njit(cache=True)
def _boundary_value(c0, c1, r, phi, a, sigma, h_max):
    return follower_value(c0 + r * math.cos(phi), c1 + r * math.sin(phi), a, sigma, h_max)


@njit(cache=True)
def theta_bar_full(c0, c1, r, a, sigma, h_max, n_angles):
    """Angle scan of the ball boundary plus golden refinement.

    Returns (theta0, theta1, phi, value). phi is NaN when the centre wins.
    """
    centre = follower_value(c0, c1, a, sigma, h_max)
    if r <= 0.0:
        return c0, c1, np.nan, centre
    step = TWO_PI / n_angles
    best_k = 0
    best = -np.inf
    for k in range(n_angles):
        v = _boundary_value(c0, c1, r, k * step, a, sigma, h_max)
        if v > best:
            best = v
            best_k = k
    phi_best = best_k * step
    lo = phi_best - step
    hi = phi_best + step
    tol = 1e-7 * TWO_PI
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1 = _boundary_value(c0, c1, r, x1, a, sigma, h_max)
    f2 = _boundary_value(c0, c1, r, x2, a, sigma, h_max)
    while hi - lo > tol:
        if f1 >= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = _boundary_value(c0, c1, r, x1, a, sigma, h_max)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = _boundary_value(c0, c1, r, x2, a, sigma, h_max)
    mid = 0.5 * (lo + hi)
    fm = _boundary_value(c0, c1, r, mid, a, sigma, h_max)
    if fm > best:
        best = fm
        phi_best = mid
    if not best > 0.0 or centre > best:
        return c0, c1, np.nan, centre
    return c0 + r * math.cos(phi_best), c1 + r * math.sin(phi_best), phi_best, best


@njit(cache=True)
def theta_bar_local(c0, c1, r, a, sigma, h_max, phi0):
    """Finite-difference Newton refinement of the boundary angle from a warm start.

    Returns (phi, value, ok). ok is False when the local model is not
    concave or the refined point does not improve on the start; callers then
    fall back to the full scan.
    """
    h = 1e-4
    phi = phi0
    start = _boundary_value(c0, c1, r, phi0, a, sigma, h_max)
    if not start > 0.0:
        return phi0, start, False
    f0 = start
    for _ in range(12):
        fm = _boundary_value(c0, c1, r, phi - h, a, sigma, h_max)
        fp = _boundary_value(c0, c1, r, phi + h, a, sigma, h_max)
        curv = fp - 2.0 * f0 + fm
        if not curv < 0.0:
            return phi0, start, False
        delta = -0.5 * h * (fp - fm) / curv
        if delta > 0.2:
            delta = 0.2
        elif delta < -0.2:
            delta = -0.2
        phi += delta
        f0 = _boundary_value(c0, c1, r, phi, a, sigma, h_max)
        # quadratic convergence: the next correction is O(delta**2)
        if abs(delta) < 1e-5:
            break
    if f0 < start - 1e-12:
        return phi0, start, False
    return phi, f0, True


@njit(cache=True)
def _theta_bar_warm(c0, c1, r, a, sigma, h_max, phi0, n_angles):
    """Warm-started search with full-scan fallback; same contract as theta_bar_full."""
    if r > 0.0 and not np.isnan(phi0):
        phi, val, ok = theta_bar_local(c0, c1, r, a, sigma, h_max, phi0)
        if ok:
            centre = follower_value(c0, c1, a, sigma, h_max)
            if centre <= val:
                return c0 + r * math.cos(phi), c1 + r * math.sin(phi), phi, val
    return theta_bar_full(c0, c1, r, a, sigma, h_max, n_angles)


@njit(cache=True)
def optimistic_ratio(c0, c1, r, h_max):
    """Largest theta0/theta1 over the ball, capped at h_max."""
    if r <= 0.0:
        return capped_ratio(c0, c1, h_max)
    if r >= c1:
        return h_max
    r2 = r * r
    disc = r2 * (c0 * c0 + c1 * c1) - r2 * r2
    if disc < 0.0:
        disc = 0.0
    return min((c0 * c1 + math.sqrt(disc)) / (c1 * c1 - r2), h_max)


@njit(cache=True)
def _leader_score(c0, c1, r, a, sigma, h_max, phi0, n_angles):
    t0, t1, phi, _ = _theta_bar_warm(c0, c1, r, a, sigma, h_max, phi0, n_angles)
    _, b, _ = riskless_order(t0, t1, a, sigma, h_max)
    return a * b, phi


@njit(cache=True)
def _scan(c0, c1, r, sigma, h_max, a_lo, width, k_first, k_last, k_step, n_angles,
          best, best_k, best_phi):
    """Score grid indices k_first..k_last (ascending), warm-starting the angle."""
    phi = np.nan
    prev = np.nan
    for k in range(k_first, k_last + 1, k_step):
        guess = phi
        if not np.isnan(prev) and not np.isnan(phi):
            guess = 2.0 * phi - prev
        last = phi
        s, phi = _leader_score(c0, c1, r, a_lo + k * width, sigma, h_max, guess, n_angles)
        prev = last
        if s > best or (s == best and k < best_k):
            best = s
            best_k = k
            best_phi = phi
        # riskless orders are nonincreasing in a for every theta, so once the
        # whole ball orders nothing every larger a scores zero as well
        if s <= 0.0 and np.isnan(phi) and best > 0.0:
            break
    return best, best_k, best_phi


@njit(cache=True)
def leader_action(c0, c1, r, sigma, h_max, a_lo, a_hi, grid_n, n_angles, stride):
    """Grid scan of a * b_upper(a) with golden refinement around the best cell.

    stride > 1 scans every stride-th grid point first and then the full
    resolution around the coarse winner. Returns (a, score, degenerate, phi)
    where phi is the boundary angle of theta-bar at the returned a.
    """
    h_star = optimistic_ratio(c0, c1, r, h_max)
    top = min(a_hi, h_star * (1.0 - 1e-6))
    if not top > a_lo:
        return a_lo, 0.0, True, np.nan
    width = (top - a_lo) / grid_n
    if stride <= 1:
        best, best_k, best_phi = _scan(c0, c1, r, sigma, h_max, a_lo, width, 1, grid_n,
                                       1, n_angles, -np.inf, grid_n + 1, np.nan)
    else:
        best, best_k, best_phi = _scan(c0, c1, r, sigma, h_max, a_lo, width, stride,
                                       grid_n, stride, n_angles, -np.inf, grid_n + 1,
                                       np.nan)
        if not best > 0.0:
            best_k = stride
        k_first = max(1, best_k - stride + 1)
        k_last = min(grid_n, best_k + stride - 1)
        best, best_k, best_phi = _scan(c0, c1, r, sigma, h_max, a_lo, width, k_first,
                                       k_last, 1, n_angles, best, best_k, best_phi)
    a_best = a_lo + best_k * width
    if not best > 0.0:
        return a_lo + width, 0.0, False, np.nan
    lo = a_lo + (best_k - 1) * width
    hi = min(a_lo + (best_k + 1) * width, top)
    tol = 1e-7 * (top - a_lo)
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, p1 = _leader_score(c0, c1, r, x1, sigma, h_max, best_phi, n_angles)
    f2, p2 = _leader_score(c0, c1, r, x2, sigma, h_max, best_phi, n_angles)
    while hi - lo > tol:
        if f1 >= f2:
            hi = x2
            x2 = x1
            f2 = f1
            p2 = p1
            x1 = hi - GOLDEN * (hi - lo)
            f1, p1 = _leader_score(c0, c1, r, x1, sigma, h_max, p2, n_angles)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            p1 = p2
            x2 = lo + GOLDEN * (hi - lo)
            f2, p2 = _leader_score(c0, c1, r, x2, sigma, h_max, p1, n_angles)
    mid = 0.5 * (lo + hi)
    fm, pm = _leader_score(c0, c1, r, mid, sigma, h_max, p1, n_angles)
    if fm > best:
        return mid, fm, False, pm
    return a_best, best, False, best_phi


@njit(cache=True)
def follower_action(c0, c1, r, a, sigma, h_max, n_angles, phi0):
    """Optimistic follower: optimistic parameters, riskless price, fractile order.

    phi0 is an optional warm start (NaN for a cold full scan).
    """
    t0, t1, _, _ = _theta_bar_warm(c0, c1, r, a, sigma, h_max, phi0, n_angles)
    p, b, ok = riskless_order(t0, t1, a, sigma, h_max)
    return p, b


# ---------------------------------------------------------------------------
# shared ridge estimator and episode loops


@njit(cache=True)
def ridge_solve(g00, g01, g11, m0, m1):
    det = g00 * g11 - g01 * g01
    return (g11 * m0 - g01 * m1) / det, (g00 * m1 - g01 * m0) / det


@njit(cache=True)
def radius(n, kappa):
    if n < 3:
        return kappa
    return kappa * math.sqrt(math.log(n) / n)


@njit(cache=True)
def h_cap(c0, c1, price_hi):
    return min(4.0 * c0 / max(c1, 0.1), 2.0 * price_hi)


@njit(cache=True)
def _play_round(g, m, n, kappa, sigma, price_hi, a, phi0, true0, true1, true_sigma,
                noise, out, t, latent):
    """Follower response, demand draw, rewards, estimator update for one round."""
    c0, c1 = ridge_solve(g[0], g[1], g[2], m[0], m[1])
    r = radius(n, kappa)
    h_max = h_cap(c0, c1, price_hi)
    t0, t1, phi, _ = _theta_bar_warm(c0, c1, r, a, sigma, h_max, phi0, 256)
    p, b, _ = riskless_order(t0, t1, a, sigma, h_max)
    mean = max(0.0, true0 - true1 * p)
    d = max(0.0, mean + true_sigma * noise)
    y = d
    if latent:
        y = true0 - true1 * p + true_sigma * noise
    out[t, 0] = a
    out[t, 1] = p
    out[t, 2] = b
    out[t, 3] = d
    out[t, 4] = a * b
    out[t, 5] = p * min(d, b) - a * b
    out[t, 6] = c0
    out[t, 7] = c1
    out[t, 8] = r
    out[t, 9] = h_max
    # features (1, -p); target realized demand
    g[0] += 1.0
    g[1] -= p
    g[2] += p * p
    m[0] += y
    m[1] -= p * y
    return phi


@njit(cache=True)
def run_lnpg(true0, true1, true_sigma, sigma, kappa, lam, price_lo, price_hi,
             grid_n, stride, noise, out, flags, latent):
    """Columns of out: a, p, b, demand, g_a, g_b, then the ball (centre, radius, cap)
    the round acted on. flags marks degenerate rounds."""
    g = np.array([lam, 0.0, lam])
    m = np.zeros(2)
    for t in range(noise.shape[0]):
        c0, c1 = ridge_solve(g[0], g[1], g[2], m[0], m[1])
        r = radius(t, kappa)
        h_max = h_cap(c0, c1, price_hi)
        a, _, degenerate, phi = leader_action(c0, c1, r, sigma, h_max, price_lo,
                                              price_hi, grid_n, 256, stride)
        flags[t] = degenerate
        _play_round(g, m, t, kappa, sigma, price_hi, a, phi, true0, true1, true_sigma,
                    noise[t], out, t, latent)


@njit(cache=True)
def run_ucb(true0, true1, true_sigma, sigma, kappa, lam, price_hi, arms, c_explore,
            noise, out, pulls, latent):
    """UCB1 leader over fixed wholesale-price arms against the optimistic riskless follower."""
    k_arms = arms.shape[0]
    counts = np.zeros(k_arms)
    sums = np.zeros(k_arms)
    scale = 0.0
    g = np.array([lam, 0.0, lam])
    m = np.zeros(2)
    phi = np.nan
    for t in range(noise.shape[0]):
        if t < k_arms:
            arm = t
        else:
            arm = 0
            best = -np.inf
            bonus = 2.0 * math.log(t + 1)
            for k in range(k_arms):
                mean = sums[k] / counts[k]
                if scale > 0.0:
                    mean /= scale
                idx = mean + c_explore * math.sqrt(bonus / counts[k])
                if idx > best:
                    best = idx
                    arm = k
        phi = _play_round(g, m, t, kappa, sigma, price_hi, arms[arm], phi, true0, true1,
                          true_sigma, noise[t], out, t, latent)
        reward = out[t, 4]
        counts[arm] += 1.0
        sums[arm] += reward
        if abs(reward) > scale:
            scale = abs(reward)
        pulls[t] = arm
