"""ISS gain constants for boundary-disturbed parabolic problems.

The gain constant is

    C = p(0)/sqrt(b1^2+b2^2) * sqrt( sum_n lambda_n^{-2} |b1 phi_n'(0) - b2 phi_n(0)|^2 )
      = sqrt( integral r(z) xtilde(z)^2 dz )

with ``xtilde`` the steady state driven by boundary datum sqrt(b1^2+b2^2).
Both routes are implemented and must agree; the transport family
(p = D, r = 1, q = k + v^2/4D, Dirichlet inlet, Robin exit with parameter a)
additionally has closed forms in zeta = sqrt(v^2+4kD)/(2D):

    G(zeta, a)   = sqrt(c1^2 (e^{2z}-1)/2z + c2^2 (1-e^{-2z})/2z + 2 c1 c2)
    G(zeta, inf) = (e^{2z}-1)^{-1} sqrt((e^{4z}-1-4z e^{2z})/(2z))

where the sine frequencies are omega_n = (n - mu_n(a)) pi and mu_n solves
tan(mu pi) + mu pi / a = n pi / a on (0, 1/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import polygamma

from .errors import InadmissibleCase, UncertifiedHypothesis
from .grids import uniform_grid
from .sturm_liouville import (
    SLProblem,
    Spectrum,
    check_hypothesis_H,
    solve_spectrum,
    solve_steady_bvp,
    weighted_norm,
)

DEFAULT_SERIES_N = 10_000

_PI2 = math.pi ** 2
_PI4 = math.pi ** 4


@dataclass(frozen=True)
class GainReport:
    """Gain constant with route and ISS envelope parameters.

    ``tail_estimate`` is expressed in gain units: the tail-corrected value of
    the constant is ``gain_C + tail_estimate`` (zero for non-series routes).
    ``iss_gain`` is the envelope gain C sqrt((1+1/eps)/(b1^2+b2^2)).
    """

    gain_C: float
    route: str                     # "series" | "bvp_integral" | "closed_form"
    truncation_N: int
    tail_estimate: float
    epsilon: float
    iss_overshoot: float
    iss_decay_rate: float
    iss_gain: float
    boundary_norm: float = 1.0
    series_value: float | None = None
    closed_value: float | None = None
    discrepancy: float | None = None

    @property
    def tail_corrected(self) -> float:
        return self.gain_C + self.tail_estimate

    def to_kv_block(self) -> str:
        pairs = [
            ("gain_C", self.gain_C),
            ("route", self.route),
            ("truncation_N", self.truncation_N),
            ("tail_estimate", self.tail_estimate),
            ("epsilon", self.epsilon),
            ("iss_overshoot", self.iss_overshoot),
            ("iss_decay_rate", self.iss_decay_rate),
            ("iss_gain", self.iss_gain),
            ("boundary_norm", self.boundary_norm),
        ]
        if self.series_value is not None:
            pairs.append(("series_value", self.series_value))
        if self.closed_value is not None:
            pairs.append(("closed_value", self.closed_value))
        if self.discrepancy is not None:
            pairs.append(("discrepancy", self.discrepancy))
        lines = []
        for key, val in pairs:
            if isinstance(val, str):
                lines.append(f"{key} = {val}")
            elif isinstance(val, int):
                lines.append(f"{key} = {val}")
            else:
                lines.append(f"{key} = {val:.12g}")
        return "\n".join(lines)


def _report(gain, route, n, tail, epsilon, decay, bnorm, **extra) -> GainReport:
    corrected = gain + tail
    return GainReport(
        gain_C=gain, route=route, truncation_N=n, tail_estimate=tail,
        epsilon=epsilon, iss_overshoot=math.sqrt(1.0 + epsilon),
        iss_decay_rate=decay,
        iss_gain=corrected * math.sqrt(1.0 + 1.0 / epsilon) / bnorm,
        boundary_norm=bnorm, **extra)


@dataclass(frozen=True)
class TransportCase:
    """Transport tube parameters; ``a`` is the exit parameter, inf = Dirichlet."""

    D: float
    v: float
    k: float
    a: float  # in [0, inf]

    def __post_init__(self):
        if self.D <= 0:
            raise InadmissibleCase("diffusion coefficient D must be positive")
        if self.v < 0:
            raise InadmissibleCase("velocity v must be nonnegative")
        if self.a < 0:
            raise InadmissibleCase("exit parameter a must be in [0, inf]")

    @classmethod
    def from_zeta(cls, zeta: float, a: float, D: float = 1.0) -> "TransportCase":
        if zeta < 0:
            raise InadmissibleCase("zeta must be nonnegative")
        return cls(D=D, v=2.0 * D * zeta, k=0.0, a=a)

    @property
    def discriminant(self) -> float:
        return self.v ** 2 + 4.0 * self.k * self.D

    @property
    def zeta(self) -> float:
        disc = self.discriminant
        if disc < 0:
            raise InadmissibleCase(
                f"k > -v^2/(4D) required for a real zeta (k={self.k}, v={self.v}, D={self.D})")
        return math.sqrt(disc) / (2.0 * self.D)

    @property
    def q_eff(self) -> float:
        """Constant potential of the transformed problem: k + v^2/(4D)."""
        return self.k + self.v ** 2 / (4.0 * self.D)

    def lambda1(self) -> float:
        mu1 = mu_root(1, self.a)
        return self.D * (self.zeta ** 2 + _PI2 * (1.0 - mu1) ** 2)


# ---------------------------------------------------------------------------
# mu roots and transport eigendata


def mu_roots(n: np.ndarray | int, a: float) -> np.ndarray:
    """Solutions mu_n(a) in [0, 1/2] of tan(mu pi) + mu pi / a = n pi / a.

    mu_n(inf) = 0 and mu_n(0) = 1/2 exactly.  For 0 < a < inf the root is
    bracketed in (0, 1/2), bisected to 1e-12 and polished with the arctan
    fixed point delta = arctan(a / ((n - 1/2 + delta) pi)) / pi (delta =
    1/2 - mu), which is contractive for every n >= 1 and brings the residual
    down to rounding level.
    """
    ns = np.atleast_1d(np.asarray(n, dtype=float))
    if np.any(ns < 1):
        raise ValueError("mode index must be >= 1")
    if math.isinf(a):
        return np.zeros_like(ns)
    if a == 0.0:
        return np.full_like(ns, 0.5)
    if a < 0.0:
        raise InadmissibleCase("exit parameter a must be in [0, inf]")
    lo = np.full_like(ns, 1e-12)
    hi = np.full_like(ns, 0.5 - 1e-14)

    def f(mu):
        return np.tan(mu * math.pi) + (mu - ns) * math.pi / a

    for _ in range(45):
        mid = 0.5 * (lo + hi)
        neg = f(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    delta = 0.5 - 0.5 * (lo + hi)
    for _ in range(3):
        delta = np.arctan(a / ((ns - 0.5 + delta) * math.pi)) / math.pi
    return 0.5 - delta


def mu_root(n: int, a: float) -> float:
    return float(mu_roots(np.array([n], dtype=float), a)[0])


def transport_series_terms(zeta: float, a: float, N: int) -> np.ndarray:
    """Terms of the squared-gain series (2/pi^2) (n-mu)^3 / (...)."""
    ns = np.arange(1, N + 1, dtype=float)
    mu = mu_roots(ns, a)
    x = ns - mu
    corr = x + np.sin(2.0 * mu * math.pi) / (2.0 * math.pi)
    return 2.0 * x ** 3 / (_PI2 * corr * (zeta ** 2 / _PI2 + x ** 2) ** 2)


def transport_series_tail(zeta: float, a: float, N: int) -> float:
    """Estimate of the squared-gain series remainder beyond N terms.

    Two-term asymptotics: sum_{n>N} 2/omega_n^2 - 4 zeta^2/omega_n^4 with
    omega_n ~ (n - mu_inf) pi; relative error O(1/N) of the remainder.
    """
    mu_inf = 0.0 if math.isinf(a) else 0.5
    nu = N + 1.0 - mu_inf
    tail = 2.0 / _PI2 * polygamma(1, nu)
    tail -= 4.0 * zeta ** 2 / _PI4 * polygamma(3, nu) / 6.0
    return float(max(tail, 0.0))


def _zero_zeta_gain(a: float) -> float:
    """Limit of G(zeta, a) at zeta -> 0+: the L2 norm of 1 - a z/(1+a)."""
    if math.isinf(a):
        return 1.0 / math.sqrt(3.0)
    alpha = a / (1.0 + a)
    return math.sqrt(1.0 - alpha + alpha ** 2 / 3.0)


def transport_gain_closed(zeta: float, a: float) -> float:
    """Right-hand closed/integral form of the gain via the steady state.

    Exponentials are arranged around e^{-2 zeta} so the expression stays
    finite for large zeta.
    """
    if zeta < 0:
        raise InadmissibleCase("zeta must be nonnegative")
    if zeta < 1e-5:
        # G^2 is analytic in zeta^2, so the limit is accurate to O(zeta^2)
        # here, while the direct formula starts cancelling catastrophically.
        return _zero_zeta_gain(a)
    em2 = math.expm1(-2.0 * zeta)          # e^{-2z} - 1 < 0
    e2 = em2 + 1.0                         # e^{-2z}
    if math.isinf(a):
        num = -math.expm1(-4.0 * zeta) - 4.0 * zeta * e2
        den = 2.0 * zeta * em2 * em2
        return math.sqrt(num / den)
    denom = (zeta + a) + (zeta - a) * e2
    c1s = (zeta - a) / denom               # c1 e^{2 zeta}, scaled
    c2s = (zeta + a) / denom
    g2 = (c1s * c1s * (e2 - e2 * e2) + c2s * c2s * (-em2)) / (2.0 * zeta) \
        + 2.0 * c1s * c2s * e2
    return math.sqrt(max(g2, 0.0))


def steady_state_coefficients(zeta: float, a: float) -> tuple[float, float]:
    """(c1, c2) of the steady profile c1 e^{zeta z} + c2 e^{-zeta z}."""
    if math.isinf(a):
        den = math.expm1(2.0 * zeta)
        return -1.0 / den, (den + 1.0) / den
    den = (zeta + a) * math.exp(2.0 * zeta) + zeta - a
    return (zeta - a) / den, (zeta + a) * math.exp(2.0 * zeta) / den


def transport_gain(case: TransportCase, N: int = DEFAULT_SERIES_N,
                   epsilon: float = 1.0) -> GainReport:
    """Gain of the transport problem by series and closed routes.

    ``gain_C`` carries the closed-form value; the tail-corrected series value
    and the discrepancy between the two routes are attached.
    """
    zeta = case.zeta                        # raises InadmissibleCase if complex
    if zeta == 0.0:
        gain = _zero_zeta_gain(case.a)
        series = gain
    else:
        gain = transport_gain_closed(zeta, case.a)
        s_partial = float(np.sum(transport_series_terms(zeta, case.a, N)))
        series = math.sqrt(s_partial + transport_series_tail(zeta, case.a, N))
    return _report(gain, "closed_form", N, 0.0, epsilon,
                   decay=case.lambda1(), bnorm=1.0,
                   series_value=series, closed_value=gain,
                   discrepancy=abs(series - gain))


def backstepping_gain(c: float, D: float, N: int = DEFAULT_SERIES_N,
                      epsilon: float = 1.0) -> GainReport:
    """Gain of the Dirichlet target problem q = c: G(sqrt(c/D), inf)."""
    if c < 0:
        raise InadmissibleCase("target coefficient c must be nonnegative")
    if D <= 0:
        raise InadmissibleCase("diffusion coefficient D must be positive")
    zeta = math.sqrt(c / D)
    decay = c + D * _PI2
    if c == 0.0:
        gain = 1.0 / math.sqrt(3.0)
        return _report(gain, "closed_form", N, 0.0, epsilon, decay, 1.0,
                       series_value=gain, closed_value=gain, discrepancy=0.0)
    gain = transport_gain_closed(zeta, math.inf)
    s_partial = float(np.sum(transport_series_terms(zeta, math.inf, N)))
    series = math.sqrt(s_partial + transport_series_tail(zeta, math.inf, N))
    return _report(gain, "closed_form", N, 0.0, epsilon, decay, 1.0,
                   series_value=series, closed_value=gain,
                   discrepancy=abs(series - gain))


def advection_gain(v: float, D: float, k: float = 0.0,
                   form: str = "derivation") -> float:
    """Weighted-L2 gain of the pure advection equation.

    ``derivation``: sqrt((1 - e^{-X})/X) with X = v/D + 2k/v, the form the
    estimate's derivation actually produces (and which the exact solution
    attains for constant inputs).  ``legacy``: an alternate argument
    l pi^{-1} zeta^2 + pi l^{-1} with l = 2D/(v pi^2) seen in circulated
    gain plots; kept for comparison only, it is inconsistent with the
    derivation (the consistent reading would be l pi^2 zeta^2 + l^{-1}/pi^2,
    which reduces back to X).
    """
    if v <= 0 or D <= 0:
        raise InadmissibleCase("v and D must be positive")
    x = v / D + 2.0 * k / v
    if x <= 0:
        raise InadmissibleCase("v/D + 2k/v must be positive")
    if form == "legacy":
        ell = 2.0 * D / (v * _PI2)
        zeta = math.sqrt(v * v + 4.0 * k * D) / (2.0 * D)
        x = ell / math.pi * zeta ** 2 + math.pi / ell
    elif form != "derivation":
        raise ValueError("form must be 'derivation' or 'legacy'")
    return math.sqrt(-math.expm1(-x) / x)


# ---------------------------------------------------------------------------
# generic series / BVP routes


def _certify(problem: SLProblem, spectrum: Spectrum):
    report = check_hypothesis_H(spectrum, problem)
    if not report.certified:
        raise UncertifiedHypothesis(
            f"hypothesis not certified (lambda1={report.lambda1:.6g}, method={report.method})")
    return report


def gain_series(problem: SLProblem, spectrum: Spectrum, N: int,
                epsilon: float = 1.0, require_certified: bool = True) -> GainReport:
    """Series route: partial sum of p(0)^2 lambda_n^{-2}|b1 phi'(0)-b2 phi(0)|^2.

    ``gain_C`` is the square root of the certified partial sum;
    ``tail_estimate`` is the estimated remainder converted to gain units, so
    ``gain_C + tail_estimate`` is the tail-corrected constant.
    """
    if N < 0 or N > spectrum.n_modes:
        raise ValueError("need 0 <= N <= number of computed modes")
    if require_certified:
        _certify(problem, spectrum)
    s = problem.boundary_norm
    b1n, b2n = problem.b1 / s, problem.b2 / s
    p0 = float(problem.p(np.zeros(1))[0])
    lam = spectrum.eigenvalues[:N]
    num = p0 * (b1n * spectrum.derivatives_at_0[:N] - b2n * spectrum.values_at_0[:N])
    terms = (num / lam) ** 2
    partial = float(np.sum(terms))
    tail_sq = _series_tail_generic(problem, spectrum, terms, N, b1n)
    gain = math.sqrt(partial)
    tail_gain = math.sqrt(partial + tail_sq) - gain
    return _report(gain, "series", N, tail_gain, epsilon,
                   decay=float(spectrum.eigenvalues[0]), bnorm=s)


def _series_tail_generic(problem: SLProblem, spectrum: Spectrum,
                         terms: np.ndarray, N: int, b1n: float) -> float:
    """Squared-gain tail beyond mode N.

    Constant coefficients with a Dirichlet inlet follow the transport
    asymptotics exactly; otherwise a power-law fit of the computed terms is
    used (terms ~ beta / n^gamma summed with the Hurwitz zeta).
    """
    if problem.has_constant_coefficients and problem.b2 == 0.0:
        r0 = problem.r.value
        mu_inf = 0.0 if problem.a2 == 0.0 else 0.5
        zeta_sq = problem.q.value / problem.p.value
        nu = N + 1.0 - mu_inf
        tail = 2.0 * r0 * b1n ** 2 / _PI2 * polygamma(1, nu)
        tail -= 4.0 * r0 * b1n ** 2 * zeta_sq / _PI4 * polygamma(3, nu) / 6.0
        return float(max(tail, 0.0))
    if N == 0:
        return math.inf
    from scipy.special import zeta as hurwitz_zeta
    half = max(N // 2, 1)
    ns = np.arange(half + 1, N + 1, dtype=float)
    vals = terms[half:]
    good = vals > 0
    if good.sum() < 3:
        return math.inf
    slope, logbeta = np.polyfit(np.log(ns[good]), np.log(vals[good]), 1)
    gamma = -slope
    if gamma <= 1.0:
        return math.inf
    return float(math.exp(logbeta) * hurwitz_zeta(gamma, N + 1))


def gain_bvp(problem: SLProblem, epsilon: float = 1.0,
             spectrum: Spectrum | None = None,
             require_certified: bool = True) -> GainReport:
    """Integral route: C = || xtilde ||_r with datum sqrt(b1^2+b2^2).

    The squared norm is Richardson-extrapolated across the grid and its
    refinement (both second-order accurate).
    """
    if spectrum is None:
        spectrum = solve_spectrum(problem, min(16, max(10, problem.resolution // 8)))
    if require_certified:
        _certify(problem, spectrum)
    bv = problem.boundary_norm
    x1 = solve_steady_bvp(problem, bv)
    s1 = weighted_norm(x1, problem) ** 2
    fine = problem.with_resolution(2 * problem.resolution)
    x2 = solve_steady_bvp(fine, bv)
    s2 = weighted_norm(x2, fine) ** 2
    gain = math.sqrt(max((4.0 * s2 - s1) / 3.0, 0.0))
    return _report(gain, "bvp_integral", 0, 0.0, epsilon,
                   decay=float(spectrum.eigenvalues[0]), bnorm=bv)


def analytic_transport_spectrum(case: TransportCase, n_modes: int,
                                resolution: int = 256) -> Spectrum:
    """Exact eigendata of the constant-coefficient transport family.

    Used where large mode counts are needed (deep series partial sums,
    high-accuracy references); the finite-difference route in
    :mod:`issgain.sturm_liouville` stays independent of it.
    """
    ns = np.arange(1, n_modes + 1, dtype=float)
    mu = mu_roots(ns, case.a)
    omega = (ns - mu) * math.pi
    lam = case.q_eff + case.D * omega ** 2
    sinc = np.sin(2.0 * omega) / (2.0 * omega)
    amp = np.sqrt(2.0 / (1.0 - sinc))
    grid = uniform_grid(resolution)
    phi = amp[:, None] * np.sin(omega[:, None] * grid[None, :])
    return Spectrum(eigenvalues=lam, eigenfunctions=phi,
                    derivatives_at_0=amp * omega,
                    values_at_0=np.zeros_like(lam), grid=grid)


# ---------------------------------------------------------------------------
# Figure-1 sweep


@dataclass(frozen=True)
class SweepTable:
    """Gain comparison over a zeta grid at k = 0."""

    zetas: np.ndarray
    a_values: tuple
    g_columns: dict
    advection: np.ndarray
    advection_form: str

    HEADER = "zeta,G_a0,G_a1,G_ainf,G_advection"

    def column(self, a: float) -> np.ndarray:
        return self.g_columns[a]

    def rows(self):
        cols = [self.g_columns[a] for a in self.a_values]
        for i, z in enumerate(self.zetas):
            yield (z, *[c[i] for c in cols], self.advection[i])

    def ordering_ok(self) -> bool:
        """Strict decrease of G along the a_values list, every row."""
        cols = [self.g_columns[a] for a in self.a_values]
        return all(np.all(cols[j] > cols[j + 1]) for j in range(len(cols) - 1))

    def nonincreasing_columns(self) -> dict:
        out = {a: bool(np.all(np.diff(col) <= 1e-12)) for a, col in self.g_columns.items()}
        out["advection"] = bool(np.all(np.diff(self.advection) <= 1e-12))
        return out

    def crossovers(self, a: float = math.inf) -> list[tuple[float, float]]:
        """Brackets [zeta_i, zeta_{i+1}] where advection - G(., a) changes sign."""
        diff = self.advection - self.g_columns[a]
        sgn = np.sign(diff)
        idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
        return [(float(self.zetas[i]), float(self.zetas[i + 1])) for i in idx]


def sweep_figure1(zeta_grid, a_values=(0.0, 1.0, math.inf), k: float = 0.0,
                  N: int = DEFAULT_SERIES_N,
                  advection_form: str = "derivation") -> SweepTable:
    """Gain columns G(zeta, a) plus the advection gain over a zeta grid.

    Only k = 0 is supported: for k = 0 the parameter l = 2D/(v pi^2) of the
    advection estimate reduces to 1/(pi^2 zeta) and the advection argument is
    a function of zeta alone; for k != 0 it would depend on v and D
    separately.
    """
    if k != 0.0:
        raise ValueError("sweep supports k = 0 only (see docstring)")
    zetas = np.asarray(zeta_grid, dtype=float)
    if np.any(zetas <= 0):
        raise ValueError("zeta grid must be positive")
    g_cols = {
        a: np.array([transport_gain_closed(z, a) for z in zetas])
        for a in a_values
    }
    adv = np.array([advection_gain(v=2.0 * z, D=1.0, k=0.0, form=advection_form)
                    for z in zetas])
    return SweepTable(zetas, tuple(a_values), g_cols, adv, advection_form)
