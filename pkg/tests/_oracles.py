"""Independent dense-grid reference implementations used by the tests.

These were written and frozen before the production quadrature and use a
different discretization everywhere: uniform trapezoid sums with one
Richardson step, a reciprocal substitution for the far tail, and explicit
integration-by-parts terms for oscillatory remainders.
"""

import numpy as np


def j_density(w, coupling, separation, cutoff):
    """Spectral density, written out independently of the package."""
    w = np.asarray(w, dtype=float)
    neg = w < 0.0
    wn = np.where(neg, w, -1.0)
    val = np.pi * coupling * np.abs(wn) \
        * (1.0 - np.sinc(separation * wn / np.pi)) / (1.0 + (wn / cutoff) ** 2)
    return np.where(neg, val, 0.0)


def oracle_hilbert(x, coupling=0.2, separation=20.0, cutoff=2.0,
                   h=5e-5, window=60.0):
    """Principal-value transform by singularity-subtracted dense trapezoid."""
    x = float(x)
    P, d, wc = coupling, separation, cutoff
    if P == 0.0:
        return 0.0
    if x < 0.0:
        # anchor the grid so x and 0 are nodes and interval counts are even
        n_right = 2 * max(1, round(abs(x) / (2.0 * h)))
        ha = abs(x) / n_right
        n_left = int(np.ceil((window - abs(x)) / ha))
        n_left += n_left % 2
        grid = x + ha * np.arange(-n_left, n_right + 1)
        lw = -grid[0]
        jx = float(j_density(x, P, d, wc))
        vals = j_density(grid, P, d, wc)
        integ = np.empty_like(grid)
        mask = np.abs(grid - x) > 0.5 * ha
        integ[mask] = (vals[mask] - jx) / (grid[mask] - x)
        integ[~mask] = (j_density(x + ha, P, d, wc)
                        - j_density(x - ha, P, d, wc)) / (2.0 * ha)
        t_fine = np.trapezoid(integ, dx=ha)
        t_coarse = np.trapezoid(integ[::2], dx=2.0 * ha)
        core = (4.0 * t_fine - t_coarse) / 3.0
        core += jx * (np.log(abs(x)) - np.log(lw + x))
    else:
        n = int(np.ceil(window / h))
        n += n % 2
        grid = np.linspace(-window, 0.0, n + 1)
        ha = window / n
        lw = window
        integ = np.zeros_like(grid)
        integ[:-1] = j_density(grid[:-1], P, d, wc) / (grid[:-1] - x)
        if x > 0.0:
            integ[-1] = 0.0
        t_fine = np.trapezoid(integ, dx=ha)
        t_coarse = np.trapezoid(integ[::2], dx=2.0 * ha)
        core = (4.0 * t_fine - t_coarse) / 3.0
    # smooth far tail by u = 1/v substitution
    m = 40000
    v = np.linspace(0.0, 1.0 / lw, m + 1)
    g = np.empty_like(v)
    g[0] = np.pi * P * wc * wc
    u = 1.0 / v[1:]
    g[1:] = (np.pi * P * u / ((1.0 + (u / wc) ** 2) * (u + x))) / (v[1:] ** 2)
    tail_smooth = -np.trapezoid(g, dx=v[1] - v[0])
    # oscillatory far tail, two integration-by-parts terms
    amp = wc * wc / ((wc * wc + lw * lw) * (lw + x))
    damp = -wc * wc * (2.0 * lw * (lw + x) + (wc * wc + lw * lw)) \
        / ((wc * wc + lw * lw) ** 2 * (lw + x) ** 2)
    tail_osc = (np.pi * P / d) * (np.cos(d * lw) * amp / d
                                  - np.sin(d * lw) * damp / (d * d))
    return -(core + tail_smooth + tail_osc) / np.pi


def oracle_slope0(coupling=0.2, separation=20.0, cutoff=2.0,
                  h=5e-5, window=60.0):
    """Slope of the transform at zero by dense trapezoid of J(w)/w^2."""
    P, d, wc = coupling, separation, cutoff
    if P == 0.0:
        return 0.0
    n = int(np.ceil(window / h))
    n += n % 2
    grid = np.linspace(-window, 0.0, n + 1)
    ha = window / n
    integ = np.zeros_like(grid)
    integ[:-1] = j_density(grid[:-1], P, d, wc) / (grid[:-1] ** 2)
    t_fine = np.trapezoid(integ, dx=ha)
    t_coarse = np.trapezoid(integ[::2], dx=2.0 * ha)
    core = (4.0 * t_fine - t_coarse) / 3.0
    t_rat = np.pi * P * 0.5 * np.log(1.0 + (wc / window) ** 2)
    amp = wc * wc / (window ** 2 * (wc * wc + window ** 2))
    damp = -2.0 * wc * wc * (2.0 * window ** 2 + wc * wc) \
        / (window ** 3 * (wc * wc + window ** 2) ** 2)
    t_osc = (np.pi * P / d) * (np.cos(d * window) * amp / d
                               - np.sin(d * window) * damp / (d * d))
    return -(core + t_rat - t_osc) / np.pi


def oracle_correlation(tau, coupling=0.2, separation=20.0, cutoff=2.0,
                       span=3000.0, h=5e-4):
    """Correlation by dense Fourier trapezoid with analytic tail correction."""
    P, d, wc = coupling, separation, cutoff
    n = int(np.ceil(span / h))
    n += n % 2
    w = np.linspace(0.0, span, n + 1)
    big_g = (w - np.sin(d * w) / d) / (1.0 + (w / wc) ** 2)
    f = big_g * np.exp(-1j * w * tau)
    t_fine = np.trapezoid(f, dx=w[1] - w[0])
    t_coarse = np.trapezoid(f[::2], dx=2.0 * (w[1] - w[0]))
    val = (4.0 * t_fine - t_coarse) / 3.0
    # tail beyond the truncation, split so the interference term's beat
    # against the Fourier factor is kept (it goes non-oscillatory at tau=d)
    lor_end = 1.0 / (1.0 + (span / wc) ** 2)

    def lor_tail(mu):
        if abs(mu) < 1e-9:
            return wc * (np.pi / 2.0 - np.arctan(span / wc))
        return lor_end * np.exp(-1j * span * mu) / (1j * mu)

    val += span * lor_end * np.exp(-1j * span * tau) / (1j * tau)
    val += (lor_tail(tau + d) - lor_tail(tau - d)) / (2j * d)
    return 0.5 * P * val
