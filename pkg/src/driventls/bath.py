"""Phonon bath models: spectral density, principal-value transform, correlation.

The physical environment is a bulk piezo-electric phonon field seen by a
biased double dot.  Its spectral density is supported on negative
frequencies, suppressed at low frequency by dot-to-dot interference, and cut
off at high frequency by the dot wavefunction extent.  All frequencies are
dimensionless, measured in units of the drive frequency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure

__all__ = ["Bath", "PhononBath", "FlatBath", "CustomBath"]


def _panel_integrate(f, a, b, tol, base_width, max_refine=9):
    """Integrate f over [a, b] by composite Gauss-Legendre panels.

    The panel count is doubled until two successive estimates agree within
    tol (global h-refinement).  f must accept an ndarray of nodes and return
    an ndarray of values.  Returns (value, error_estimate).
    """
    if b <= a:
        return 0.0, 0.0
    nodes, weights = np.polynomial.legendre.leggauss(12)
    n = max(4, int(math.ceil((b - a) / base_width)))
    prev = None
    for _ in range(max_refine):
        edges = np.linspace(a, b, n + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
        cur = float(np.sum(vals * weights[None, :] * half[:, None]))
        if prev is not None and abs(cur - prev) <= tol:
            return cur, abs(cur - prev)
        prev = cur
        n *= 2
    raise QuadratureFailure(
        f"panel refinement stalled above tol={tol:g} on [{a:g}, {b:g}]")


class Bath:
    """Interface shared by all bath models.

    A bath exposes the spectral density J, its Hilbert transform F (the
    principal-value companion generating dispersive shifts), the slope F'(0),
    the half-range response (J(w) +/- i F(w))/2, and the time-domain
    correlation function.
    """

    def spectral_density(self, omega):
        raise NotImplementedError

    def hilbert_transform(self, x):
        raise NotImplementedError

    def hilbert_slope0(self):
        raise NotImplementedError

    def correlation(self, tau):
        raise NotImplementedError

    def one_sided_response(self, omega, sign=+1):
        """Half-range response (J(omega) + i*sign*F(omega))/2 with sign = +1 or -1."""
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        j = float(self.spectral_density(omega))
        f = self.hilbert_transform(omega)
        return complex(0.5 * j, 0.5 * sign * f)


@dataclass(frozen=True)
class PhononBath(Bath):
    """Piezo-electric phonon bath of a driven double dot.

    Parameters
    ----------
    coupling : float
        Dimensionless electron-phonon coupling strength; the spectral density
        and its transform are exactly linear in it.
    separation : float
        Dot separation times drive frequency over sound speed; sets the
        interference oscillation period of the spectral density.
    cutoff : float
        High-frequency cutoff from the spatial extent of the dot states.
    quad_tol : float
        Absolute error target for the Hilbert transform quadrature.
    """

    coupling: float
    separation: float
    cutoff: float
    quad_tol: float = 1e-9
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError("coupling must be nonnegative")
        if self.separation <= 0:
            raise ValueError("separation must be positive")
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")
        if self.quad_tol <= 0:
            raise ValueError("quad_tol must be positive")

    # -- spectral density -------------------------------------------------

    def _unit_density(self, w):
        # density at unit coupling; vectorized; exactly zero for w >= 0
        w = np.asarray(w, dtype=float)
        neg = w < 0.0
        wn = np.where(neg, w, -1.0)
        # np.sinc is normalized; np.sinc(y/pi) = sin(y)/y
        interference = 1.0 - np.sinc(self.separation * wn / np.pi)
        lorentz = 1.0 + (wn / self.cutoff) ** 2
        val = np.pi * np.abs(wn) * interference / lorentz
        return np.where(neg, val, 0.0)

    def spectral_density(self, omega):
        """J(omega): nonnegative, zero for omega >= 0, linear in coupling."""
        out = self.coupling * self._unit_density(omega)
        return out if out.ndim else float(out)

    # -- Hilbert transform ------------------------------------------------

    def hilbert_transform(self, x):
        """F(x) = -(1/pi) PV integral of J(w)/(w - x) over all w.

        Computed by adaptive panel quadrature with singularity subtraction on
        a finite window plus closed-form treatment of the far tail.  Values
        are cached on the exact argument; absolute error <= quad_tol for
        coupling <= 1, and <= quad_tol * coupling above that.
        """
        x = float(x)
        if self.coupling == 0.0:
            return 0.0
        hit = self._cache.get(x)
        if hit is not None:
            return hit
        value = self.coupling * self._unit_hilbert(x)
        self._cache[x] = value
        return value

    def _unit_hilbert(self, x):
        tol = self.quad_tol / max(1.0, self.coupling)
        wc = self.cutoff
        d = self.separation
        L = 50.0 * wc
        if x < 0.0:
            # keep the singular point well inside the quadrature window
            L = max(L, 2.0 * abs(x) + 10.0 * wc)
        base = min(math.pi / d, L / 8.0)
        if x < 0.0:
            jx = float(self._unit_density(x))

            def integrand(w):
                return (self._unit_density(w) - jx) / (w - x)

            v1, _ = _panel_integrate(integrand, -L, x, 0.25 * tol, base)
            v2, _ = _panel_integrate(integrand, x, 0.0, 0.25 * tol, base)
            core = v1 + v2 + jx * (math.log(abs(x)) - math.log(L + x))
        else:
            def integrand(w):
                return self._unit_density(w) / (w - x)

            core, _ = _panel_integrate(integrand, -L, 0.0, 0.5 * tol, base)
        return -(core + self._unit_hilbert_tail(x, L)) / math.pi

    def _unit_hilbert_tail(self, x, L):
        # integral of J1(w)/(w - x) over (-inf, -L], by u = -w:
        #   -pi * wc^2 * [ I_rat - I_osc / d ]
        # with I_rat closed-form and I_osc a two-term large-d expansion.
        wc = self.cutoff
        d = self.separation
        denom = x * x + wc * wc
        c = -x / denom
        b = wc * wc / denom
        i_rat = (b / wc) * (0.5 * math.pi - math.atan(L / wc)) \
            - c * math.log((L + x) / math.hypot(L, wc))
        amp = 1.0 / ((wc * wc + L * L) * (L + x))
        damp = -(2.0 * L * (L + x) + (wc * wc + L * L)) \
            / ((wc * wc + L * L) ** 2 * (L + x) ** 2)
        i_osc = math.cos(d * L) * amp / d - math.sin(d * L) * damp / (d * d)
        return -math.pi * wc * wc * (i_rat - i_osc / d)

    def hilbert_slope0(self):
        """F'(0) = -(1/pi) integral of J(w)/w^2; negative for coupling > 0."""
        if self.coupling == 0.0:
            return 0.0
        hit = self._cache.get("slope0")
        if hit is not None:
            return hit
        value = self.coupling * self._unit_slope0()
        self._cache["slope0"] = value
        return value

    def _unit_slope0(self):
        tol = self.quad_tol / max(1.0, self.coupling)
        wc = self.cutoff
        d = self.separation
        L = 50.0 * wc
        base = min(math.pi / d, L / 8.0)

        def integrand(w):
            return self._unit_density(w) / (w * w)

        core, _ = _panel_integrate(integrand, -L, 0.0, 0.5 * tol, base)
        # tail by u = -w: pi * [ (1/2) log(1 + (wc/L)^2) - I_osc / d ]
        t_rat = 0.5 * math.log(1.0 + (wc / L) ** 2)
        amp = wc * wc / (L * L * (wc * wc + L * L))
        damp = -2.0 * wc * wc * (2.0 * L * L + wc * wc) \
            / (L ** 3 * (wc * wc + L * L) ** 2)
        i_osc = math.cos(d * L) * amp / d - math.sin(d * L) * damp / (d * d)
        tail = math.pi * (t_rat - i_osc / d)
        return -(core + tail) / math.pi

    # -- correlation function ---------------------------------------------

    def correlation(self, tau):
        """C(tau) = (1/2pi) integral of J(-w) e^{-i w tau} over w >= 0.

        Evaluated by Fourier-weighted adaptive quadrature with the
        interference factor expanded into shifted frequencies.  C(0)
        diverges logarithmically under this soft cutoff, so zero delay is
        rejected for nonzero coupling.
        """
        tau = float(tau)
        if self.coupling == 0.0:
            return 0.0 + 0.0j
        if tau < 0.0:
            return self.correlation(-tau).conjugate()
        if tau == 0.0:
            raise QuadratureFailure(
                "correlation at zero delay diverges logarithmically "
                "for this cutoff; evaluate at tau > 0")
        wc = self.cutoff
        d = self.separation
        errors = []

        def lor(w):
            return 1.0 / (1.0 + (w / wc) ** 2)

        def ramp(w):
            return w / (1.0 + (w / wc) ** 2)

        def fourier(f, kind, freq):
            val, err = integrate.quad(
                f, 0.0, np.inf, weight=kind, wvar=freq,
                epsabs=1e-11, limit=500, limlst=400)
            errors.append(err)
            return val

        def lor_sin(freq):
            if freq == 0.0:
                return 0.0
            return math.copysign(1.0, freq) * fourier(lor, "sin", abs(freq))

        def lor_cos(freq):
            if freq == 0.0:
                return 0.5 * math.pi * wc
            return fourier(lor, "cos", abs(freq))

        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                g1_cos = fourier(ramp, "cos", tau)
                g1_sin = fourier(ramp, "sin", tau)
                g2_cos = (lor_sin(d + tau) + lor_sin(d - tau)) / (2.0 * d)
                g2_sin = (lor_cos(d - tau) - lor_cos(d + tau)) / (2.0 * d)
            except integrate.IntegrationWarning as exc:
                raise QuadratureFailure(
                    f"correlation quadrature failed at tau={tau:g}") from exc
        if sum(errors) > 1e-7:
            raise QuadratureFailure(
                f"correlation error estimate {sum(errors):g} too large "
                f"at tau={tau:g}")
        re = 0.5 * self.coupling * (g1_cos - g2_cos)
        im = -0.5 * self.coupling * (g1_sin - g2_sin)
        return complex(re, im)


class FlatBath(Bath):
    """Structureless bath: one constant spectral level at every frequency.

    No dispersive part (F = 0 identically).  Breaks detailed balance on
    purpose; used for limit checks where the response must not distinguish
    shifted frequencies.
    """

    def __init__(self, level):
        if level < 0:
            raise ValueError("level must be nonnegative")
        self.level = float(level)

    def spectral_density(self, omega):
        w = np.asarray(omega, dtype=float)
        out = np.full_like(w, self.level)
        return out if out.ndim else float(out)

    def hilbert_transform(self, x):
        return 0.0

    def hilbert_slope0(self):
        return 0.0

    def one_sided_response(self, omega, sign=+1):
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        return complex(0.5 * self.level, 0.0)

    def correlation(self, tau):
        raise NotImplementedError(
            "a flat spectrum has a delta correlation; not representable")


class CustomBath(Bath):
    """Bath assembled from user-supplied callables, for synthetic limits.

    Parameters
    ----------
    spectral : callable
        Vectorized spectral density of one frequency argument.
    hilbert : callable, optional
        Transform F(x); defaults to zero everywhere.
    slope0 : float
        Value reported for F'(0).
    """

    def __init__(self, spectral, hilbert=None, slope0=0.0):
        self._spectral = spectral
        self._hilbert = hilbert
        self._slope0 = float(slope0)

    def spectral_density(self, omega):
        w = np.asarray(omega, dtype=float)
        out = np.asarray(self._spectral(w), dtype=float)
        return out if out.ndim else float(out)

    def hilbert_transform(self, x):
        if self._hilbert is None:
            return 0.0
        return float(self._hilbert(float(x)))

    def hilbert_slope0(self):
        return self._slope0
