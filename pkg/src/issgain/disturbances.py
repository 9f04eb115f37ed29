"""Boundary disturbance signals d(t) with two derivatives.

Classical solutions need d twice continuously differentiable, so every kind
carries evaluators for d, d' and d''.  Tabulated signals are cubic-spline
interpolants and only piecewise C2; constructing one emits a
:class:`SmoothnessWarning`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import SmoothnessWarning


@dataclass(frozen=True, eq=False)
class DisturbanceSignal:
    kind: str                      # constant | sinusoid | smoothed_step | tabulated
    amplitude: float = 0.0
    frequency: float = 0.0         # angular frequency of the sinusoid
    phase: float = 0.0
    offset: float = 0.0
    ramp_time: float = 1.0
    _spline: object = field(default=None, repr=False)

    @classmethod
    def constant(cls, amplitude: float) -> "DisturbanceSignal":
        return cls("constant", amplitude=float(amplitude))

    @classmethod
    def sinusoid(cls, amplitude: float, omega: float, phase: float = 0.0,
                 offset: float = 0.0) -> "DisturbanceSignal":
        return cls("sinusoid", amplitude=float(amplitude), frequency=float(omega),
                   phase=float(phase), offset=float(offset))

    @classmethod
    def smoothed_step(cls, amplitude: float, ramp_time: float) -> "DisturbanceSignal":
        if ramp_time <= 0:
            raise ValueError("ramp_time must be positive")
        return cls("smoothed_step", amplitude=float(amplitude), ramp_time=float(ramp_time))

    @classmethod
    def tabulated(cls, times, values) -> "DisturbanceSignal":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        warnings.warn("tabulated disturbances are only piecewise C2",
                      SmoothnessWarning, stacklevel=2)
        return cls("tabulated", _spline=CubicSpline(times, values))

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.amplitude, dtype=float)
        if self.kind == "sinusoid":
            return self.offset + self.amplitude * np.sin(self.frequency * t + self.phase)
        if self.kind == "smoothed_step":
            u = np.clip(t / self.ramp_time, 0.0, 1.0)
            return self.amplitude * u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)
        return self._spline(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(t, dtype=float)
        if self.kind == "sinusoid":
            return self.amplitude * self.frequency * np.cos(self.frequency * t + self.phase)
        if self.kind == "smoothed_step":
            u = np.clip(t / self.ramp_time, 0.0, 1.0)
            return self.amplitude * 30.0 * u * u * (1.0 - u) ** 2 / self.ramp_time
        return self._spline(t, 1)

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(t, dtype=float)
        if self.kind == "sinusoid":
            return -self.amplitude * self.frequency ** 2 * np.sin(self.frequency * t + self.phase)
        if self.kind == "smoothed_step":
            u = np.clip(t / self.ramp_time, 0.0, 1.0)
            return self.amplitude * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / self.ramp_time ** 2
        return self._spline(t, 2)

    def exp_convolution(self, lam: float, t0: float, t1: float) -> float:
        """integral_{t0}^{t1} e^{-lam (t1 - s)} d(s) ds.

        Closed form for constant and sinusoid kinds (this is what makes the
        exponential integrator exact for them); composite quadratic-in-s
        exponential moments otherwise.
        """
        if self.kind == "constant":
            return self.amplitude * _j_moments(lam, t1 - t0, 0)[0]
        if self.kind == "sinusoid":
            om, ph = self.frequency, self.phase
            base = self.offset * _j_moments(lam, t1 - t0, 0)[0]
            if om == 0.0:
                return base + self.amplitude * math.sin(ph) * _j_moments(lam, t1 - t0, 0)[0]
            den = lam * lam + om * om
            def antider(s, w):  # e^{-lam (t1-s)} (lam sin - om cos)(om s + ph)/den
                return w * (lam * math.sin(om * s + ph) - om * math.cos(om * s + ph)) / den
            return base + self.amplitude * (
                antider(t1, 1.0) - antider(t0, math.exp(-lam * (t1 - t0))))
        return _quadratic_exp_quadrature(self.value, lam, t0, t1)

    def exp_convolution_derivative(self, lam: float, t0: float, t1: float) -> float:
        """integral_{t0}^{t1} e^{-lam (t1 - s)} d'(s) ds."""
        if self.kind == "constant":
            return 0.0
        if self.kind == "sinusoid":
            om, ph = self.frequency, self.phase
            shifted = DisturbanceSignal.sinusoid(self.amplitude * om, om, ph + math.pi / 2.0)
            return shifted.exp_convolution(lam, t0, t1)
        return _quadratic_exp_quadrature(self.derivative, lam, t0, t1)


def _j_moments(lam: float, delta: float, kmax: int) -> list[float]:
    """J_k = integral_0^delta e^{-lam (delta - s)} s^k ds for k = 0..kmax."""
    x = lam * delta
    if abs(x) < 1e-5:
        # series to avoid cancellation: J_0 = delta (1 - x/2 + x^2/6 - ...)
        j = [delta * (1.0 - x / 2.0 + x * x / 6.0 - x ** 3 / 24.0)]
    else:
        j = [-math.expm1(-x) / lam]
    for k in range(1, kmax + 1):
        j.append((delta ** k - k * j[k - 1]) / lam)
    return j


def _quadratic_exp_quadrature(fn, lam: float, t0: float, t1: float,
                              n_sub: int | None = None) -> float:
    """Exponential-weighted quadrature: fn interpolated by parabolas per
    substep, the kernel e^{-lam (t1-s)} integrated exactly (stable for stiff
    lam where plain quadrature underflows)."""
    if n_sub is None:
        n_sub = max(16, min(256, math.ceil(64.0 * (t1 - t0))))
    total = 0.0
    edges = np.linspace(t0, t1, n_sub + 1)
    for i in range(n_sub):
        a, b = edges[i], edges[i + 1]
        delta = b - a
        mid = 0.5 * (a + b)
        f0, fm, f1 = (float(fn(np.asarray(x))) for x in (a, mid, b))
        # parabola f(a + s) = c0 + c1 s + c2 s^2 on s in [0, delta]
        c0 = f0
        c1 = (-3.0 * f0 + 4.0 * fm - f1) / delta
        c2 = 2.0 * (f0 - 2.0 * fm + f1) / delta ** 2
        j0, j1, j2 = _j_moments(lam, delta, 2)
        piece = c0 * j0 + c1 * j1 + c2 * j2
        total = total * math.exp(-lam * delta) + piece
    return total
