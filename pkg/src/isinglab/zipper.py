"""Loewner driving-function extraction (vertical-slit zipper) and kappa
estimation from ensembles of chordal interfaces in the upper half-plane.

The curve is parametrized by h-capacity: zipping point k through the slit
map g(z) = W_k + sqrt((z - W_k)^2 + h_k^2) adds h_k^2 / 4 to the capacity,
read off the 2t/z coefficient of the composed expansion.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _zip_kernel(pts_re, pts_im, ts, ws, hs):
    n = pts_re.shape[0]
    t = 0.0
    for k in range(n):
        wk = pts_re[k]
        hk = pts_im[k]
        if hk < 0.0:
            hk = 0.0
        t += hk * hk / 4.0
        ts[k] = t
        ws[k] = wk
        hs[k] = hk
        # apply the slit map to the remaining points
        for j in range(k + 1, n):
            zr = pts_re[j] - wk
            zi = pts_im[j]
            # complex sqrt of (z^2 + h^2) with branch Im >= 0
            ar = zr * zr - zi * zi + hk * hk
            ai = 2.0 * zr * zi
            r = math.sqrt(math.sqrt(ar * ar + ai * ai))
            th = 0.5 * math.atan2(ai, ar)
            sr = r * math.cos(th)
            si = r * math.sin(th)
            if si < 0.0:
                sr = -sr
                si = -si
            if si == 0.0 and zr < 0.0:
                sr = -abs(sr)
            pts_re[j] = wk + sr
            pts_im[j] = si
    return t


def extract_driving(points):
    """Zip a half-plane curve; returns (t, W, h) arrays.

    points: complex curve samples ordered from the boundary start (points
    at or below the real axis are dropped).
    """
    z = np.asarray(points, dtype=complex)
    z = z[z.imag > 1e-12]
    if len(z) < 2:
        raise ValueError("curve too short to zip")
    pr = z.real.copy()
    pi = z.imag.copy()
    ts = np.empty(len(z))
    ws = np.empty(len(z))
    hs = np.empty(len(z))
    _zip_kernel(pr, pi, ts, ws, hs)
    return ts, ws, hs


@njit(cache=True)
def _unzip_kernel(ws, hs, k, wr, wi):
    # apply inverse slit maps g_j^{-1}(w) = W_j + sqrt((w - W_j)^2 - h_j^2)
    # for j = k-1 .. 0, branch with Im >= 0
    for j in range(k - 1, -1, -1):
        zr = wr - ws[j]
        zi = wi
        ar = zr * zr - zi * zi - hs[j] * hs[j]
        ai = 2.0 * zr * zi
        r = math.sqrt(math.sqrt(ar * ar + ai * ai))
        th = 0.5 * math.atan2(ai, ar)
        sr = r * math.cos(th)
        si = r * math.sin(th)
        if si < 0.0:
            sr = -sr
            si = -si
        if si == 0.0 and zr < 0.0:
            sr = -abs(sr)
        wr = ws[j] + sr
        wi = si
    return wr, wi


def reconstruct_curve(ts, ws, hs):
    """Invert the zipper: curve points from the driving record."""
    out = np.empty(len(ws), dtype=complex)
    for k in range(len(ws)):
        wr, wi = _unzip_kernel(ws, hs, k, ws[k], hs[k])
        out[k] = complex(wr, wi)
    return out


def round_trip_error(points):
    """Max |reconstructed - original| over the zipped curve."""
    z = np.asarray(points, dtype=complex)
    z = z[z.imag > 1e-12]
    ts, ws, hs = extract_driving(z)
    back = reconstruct_curve(ts, ws, hs)
    return float(np.abs(back - z).max())


def driving_on_grid(ts, ws, grid):
    """Piecewise-linear driving samples W(t) on a common grid, W(0) = 0."""
    return np.interp(grid, np.concatenate(([0.0], ts)),
                     np.concatenate(([0.0], ws)))


def estimate_kappa(drivings, t_max=None, n_grid=40, n_boot=200, seed=0,
                   t_min_frac=0.05):
    """kappa estimate from an ensemble of (t, W) driving records.

    Fits Var[W(t)] = kappa * t by least squares through the origin on a
    common grid; the confidence interval is a bootstrap over interfaces.
    """
    if len(drivings) < 2:
        raise ValueError("need at least two interfaces")
    finals = [ts[-1] for ts, _ in drivings]
    if t_max is None:
        t_max = float(np.quantile(finals, 0.10))
    grid = np.linspace(t_min_frac * t_max, t_max, n_grid)
    samples = np.array([driving_on_grid(ts, ws, grid) for ts, ws in drivings])

    def fit(rows):
        var = rows.var(axis=0, ddof=1)
        return float((grid * var).sum() / (grid * grid).sum())

    kappa = fit(samples)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, len(samples), len(samples))
        boots.append(fit(samples[idx]))
    lo, hi = np.quantile(boots, [0.025, 0.975])
    return {"kappa": kappa, "ci": (float(lo), float(hi)), "t_max": t_max,
            "n_interfaces": len(samples),
            "mean_drift": float(np.abs(samples.mean(axis=0)).max())}
