"""Sturm-Liouville operator on [0,1]: spectrum, steady BVP and expansions.

The operator is ``A f = -(p f')'/r + (q/r) f`` with separated boundary
conditions ``b1 f(0) + b2 f'(0) = 0`` and ``a1 f(1) + a2 f'(1) = 0``.
Discretisation is a symmetric finite-volume scheme on a uniform grid:
interior rows are the classical second-order three-point stencil, Robin or
Neumann ends use half-cells with the boundary flux eliminated through the
boundary condition.  The scheme is a generalized symmetric tridiagonal
eigenproblem ``T x = lambda B x`` with diagonal mass ``B``, so the computed
spectrum is real and the eigenvectors are B-orthogonal by construction.

Eigenvalues *and* eigenvectors are Richardson-extrapolated across the grid
and its refinement (both are second-order accurate with a smooth leading
error term, so extrapolation yields fourth order).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.special import zeta as hurwitz_zeta

from .coefficients import Coefficient
from .errors import (
    ConvergenceFailure,
    DegenerateBoundary,
    NonPositiveCoefficient,
    SingularBVP,
)
from .grids import (
    GridFunction,
    derivative_at_left,
    derivative_at_right,
    require_same_grid,
    simpson_weights,
    uniform_grid,
)

DEFAULT_RESOLUTION = 256

# Bound sup|phi_n| <= sqrt(2 pi / (pi - 1)) for sine-type eigenfunctions,
# valid whenever 2*omega_n >= pi.
_SINE_SUP_BOUND = math.sqrt(2.0 * math.pi / (math.pi - 1.0))


@dataclass(frozen=True, eq=False)
class SLProblem:
    """Validated operator data: coefficients, boundary constants and grid."""

    p: Coefficient
    q: Coefficient
    r: Coefficient
    a1: float
    a2: float
    b1: float
    b2: float
    resolution: int

    @property
    def grid(self) -> np.ndarray:
        return uniform_grid(self.resolution)

    @property
    def spacing(self) -> float:
        return 1.0 / self.resolution

    @property
    def boundary_norm(self) -> float:
        """sqrt(b1^2 + b2^2), the scale of the inlet boundary functional."""
        return math.hypot(self.b1, self.b2)

    @property
    def has_constant_coefficients(self) -> bool:
        return self.p.is_constant and self.q.is_constant and self.r.is_constant

    def with_resolution(self, resolution: int) -> "SLProblem":
        return build_problem(self.p, self.q, self.r, self.a1, self.a2,
                             self.b1, self.b2, resolution)

    def sample(self, resolution: int | None = None):
        """Node samples (p, q, r) and midpoint samples of p."""
        m = self.resolution if resolution is None else resolution
        grid = uniform_grid(m)
        mid = 0.5 * (grid[:-1] + grid[1:])
        return self.p(grid), self.q(grid), self.r(grid), self.p(mid)


def build_problem(p, q, r, a1, a2, b1, b2, resolution: int = DEFAULT_RESOLUTION) -> SLProblem:
    """Validate coefficients and boundary constants and fix the grid.

    ``p``, ``q``, ``r`` may be floats or :class:`Coefficient` handles.
    Boundary constants are stored unnormalized; division by
    sqrt(b1^2+b2^2) happens only where the gain formulas require it.
    """
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    if resolution % 2:
        raise ValueError("resolution must be even (composite Simpson quadrature)")
    p = Coefficient.coerce(p)
    q = Coefficient.coerce(q)
    r = Coefficient.coerce(r)
    if abs(a1) + abs(a2) == 0.0:
        raise DegenerateBoundary("|a1| + |a2| must be positive")
    if abs(b1) + abs(b2) == 0.0:
        raise DegenerateBoundary("|b1| + |b2| must be positive")
    grid = uniform_grid(resolution)
    dense = np.linspace(0.0, 1.0, 4 * resolution + 1)
    for name, coeff in (("p", p), ("r", r)):
        if np.min(coeff(dense)) <= 0.0:
            raise NonPositiveCoefficient(f"{name}(z) must be strictly positive on [0,1]")
    if not np.all(np.isfinite(q(grid))):
        raise ValueError("q(z) must be finite")
    return SLProblem(p, q, r, float(a1), float(a2), float(b1), float(b2), resolution)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """First eigenpairs, ordered increasingly, normalized to ||phi||_r = 1.

    ``eigenfunctions`` has shape (n_modes, n_nodes).  Sign convention: the
    first nonzero of (phi(0), phi'(0)) is positive.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    derivatives_at_0: np.ndarray
    values_at_0: np.ndarray
    grid: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    def phi(self, n: int) -> GridFunction:
        """Eigenfunction ``n`` (1-based) as a grid function."""
        return GridFunction(self.grid, self.eigenfunctions[n - 1])


@dataclass(frozen=True)
class HypothesisReport:
    lambda1: float
    positive: bool
    partial_sum: float
    tail_bound: float
    certified: bool
    n_partial: int
    method: str  # "transport-bound" | "heuristic-fit" | "none"


def _assemble(problem: SLProblem, resolution: int):
    """Stiffness diagonal/off-diagonal, mass diagonal, and active index range."""
    m = resolution
    h = 1.0 / m
    pn, qn, rn, ph = problem.sample(m)
    diag = np.empty(m + 1)
    off = -ph / h                      # off[i] couples nodes i and i+1
    diag[1:m] = (ph[:-1] + ph[1:]) / h + qn[1:m] * h
    mass = rn * h

    lo, hi = 0, m
    if problem.b2 == 0.0:
        lo = 1
    else:
        diag[0] = ph[0] / h - pn[0] * (problem.b1 / problem.b2) + qn[0] * h / 2.0
        mass[0] = rn[0] * h / 2.0
    if problem.a2 == 0.0:
        hi = m - 1
    else:
        diag[m] = ph[m - 1] / h + pn[m] * (problem.a1 / problem.a2) + qn[m] * h / 2.0
        mass[m] = rn[m] * h / 2.0
    return diag, off, mass, lo, hi


def _solve_raw_spectrum(problem: SLProblem, resolution: int, n_modes: int):
    """Eigenpairs of the finite-volume scheme at one resolution."""
    diag, off, mass, lo, hi = _assemble(problem, resolution)
    d = diag[lo:hi + 1] / mass[lo:hi + 1]
    e = off[lo:hi] / np.sqrt(mass[lo:hi] * mass[lo + 1:hi + 1])
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, n_modes - 1))
    phi = np.zeros((n_modes, resolution + 1))
    phi[:, lo:hi + 1] = (v / np.sqrt(mass[lo:hi + 1])[:, None]).T
    return w, phi


def _simpson_normalize(phi: np.ndarray, r_nodes: np.ndarray, h: float) -> np.ndarray:
    w = simpson_weights(phi.shape[-1])
    nrm = np.sqrt(h * np.sum(w * r_nodes * phi * phi, axis=-1))
    return phi / nrm[..., None]


def solve_spectrum(problem: SLProblem, n_modes: int) -> Spectrum:
    """First ``n_modes`` eigenpairs with two-grid Richardson extrapolation.

    Raises :class:`ConvergenceFailure` when the grid cannot resolve the
    requested modes or the two-grid eigenvalue estimates disagree badly.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    m = problem.resolution
    if n_modes > m // 6:
        raise ConvergenceFailure(
            f"resolution {m} too coarse for {n_modes} modes (need >= {6 * n_modes})")
    h = problem.spacing
    rn = problem.r(problem.grid)

    w1, phi1 = _solve_raw_spectrum(problem, m, n_modes)
    w2, phi2_fine = _solve_raw_spectrum(problem, 2 * m, n_modes)

    lam = (4.0 * w2 - w1) / 3.0
    disagreement = np.abs(w2 - w1) / np.maximum(np.abs(lam), 1.0)
    if np.any(disagreement > 0.05):
        n_bad = int(np.argmax(disagreement > 0.05)) + 1
        raise ConvergenceFailure(
            f"two-grid eigenvalue estimates disagree at mode {n_bad} "
            f"(relative gap {disagreement.max():.2e})")

    rn_fine = problem.r(np.linspace(0.0, 1.0, 2 * m + 1))
    phi1 = _simpson_normalize(phi1, rn, h)
    phi2_fine = _simpson_normalize(phi2_fine, rn_fine, h / 2.0)
    align = np.sign(np.sum(phi1 * phi2_fine[:, ::2], axis=-1))
    align[align == 0.0] = 1.0
    phi2_fine *= align[:, None]
    phi = _simpson_normalize((4.0 * phi2_fine[:, ::2] - phi1) / 3.0, rn, h)

    # boundary derivatives converge one order slower when extracted from the
    # extrapolated vector; extrapolating the stencil values of the two raw
    # solves keeps them at fourth order
    d0_coarse = np.array([derivative_at_left(row, h) for row in phi1])
    d0_fine = np.array([derivative_at_left(row, h / 2.0) for row in phi2_fine])
    d0 = (4.0 * d0_fine - d0_coarse) / 3.0
    v0 = phi[:, 0]
    scale = np.max(np.abs(phi), axis=-1)
    sign = np.where(np.abs(v0) > 1e-9 * scale, np.sign(v0), np.sign(d0))
    sign[sign == 0.0] = 1.0
    phi *= sign[:, None]
    d0 *= sign
    v0 = phi[:, 0]

    order = np.argsort(lam)
    return Spectrum(lam[order], phi[order], d0[order], v0[order], problem.grid.copy())


def _tail_constant_coefficients(problem: SLProblem, n_from: int) -> float:
    """Upper bound on sum_{n > n_from} max|phi_n| / lambda_n for constant p,q,r.

    Uses lambda_n >= (q + D pi^2 (n - s)^2)/r0 with s = 1/2 for a Dirichlet
    inlet (the sine family) and s = 1 in general, plus the uniform sup bound
    on normalized sine-type eigenfunctions.
    """
    d_coef = problem.p.value
    q0 = problem.q.value
    r0 = problem.r.value
    shift = 0.5 if problem.b2 == 0.0 else 1.0
    sup_phi = _SINE_SUP_BOUND / math.sqrt(r0)
    c = d_coef * math.pi ** 2

    n_direct = 2000
    ns = np.arange(n_from + 1, n_from + n_direct + 1, dtype=float)
    denom = q0 + c * (ns - shift) ** 2
    if np.any(denom <= 0.0):
        return math.inf
    total = float(np.sum(1.0 / denom))
    a = n_from + n_direct + 0.5 - shift   # integral comparison from here on
    if q0 > 0.0:
        total += (math.pi / 2.0 - math.atan(a * math.sqrt(c / q0))) / math.sqrt(q0 * c)
    elif q0 == 0.0:
        total += 1.0 / (c * a)
    else:
        mu = math.sqrt(-q0)
        sc = math.sqrt(c)
        if sc * a <= mu:
            return math.inf
        total += math.log((sc * a + mu) / (sc * a - mu)) / (2.0 * mu * sc)
    return sup_phi * r0 * total


def _tail_heuristic(lam: np.ndarray, sup_phi: np.ndarray, n_from: int) -> tuple[float, bool]:
    """Power-law fit lambda_n ~ alpha n^beta; tail via the Hurwitz zeta."""
    n = np.arange(1, lam.size + 1, dtype=float)
    half = lam.size // 2
    mask = lam[half:] > 0
    if mask.sum() < 3:
        return math.inf, False
    logn = np.log(n[half:][mask])
    logl = np.log(lam[half:][mask])
    beta, logalpha = np.polyfit(logn, logl, 1)
    if beta <= 1.0:
        return math.inf, False
    alpha = math.exp(logalpha)
    tail = float(1.05 * sup_phi.max() / alpha * hurwitz_zeta(beta, n_from + 1))
    return tail, True


def check_hypothesis_H(spectrum: Spectrum, problem: SLProblem) -> HypothesisReport:
    """Certify positivity of lambda_1 and summability of lambda_n^{-1} sup|phi_n|.

    The tail beyond the computed modes is bounded analytically for
    constant-coefficient problems; otherwise a heuristic power-law fit is
    reported and the hypothesis is left uncertified.
    """
    if spectrum.n_modes < 10:
        raise ValueError("hypothesis check needs at least 10 computed modes")
    lam = spectrum.eigenvalues
    lambda1 = float(lam[0])
    positive = lambda1 > 0.0
    sup_phi = np.max(np.abs(spectrum.eigenfunctions), axis=-1)
    pos = lam > 0.0
    partial = float(np.sum(sup_phi[pos] / lam[pos]))

    if not positive:
        return HypothesisReport(lambda1, False, partial, math.inf, False,
                                spectrum.n_modes, "none")
    if problem.has_constant_coefficients:
        tail = _tail_constant_coefficients(problem, spectrum.n_modes)
        certified = math.isfinite(tail)
        return HypothesisReport(lambda1, True, partial, tail, certified,
                                spectrum.n_modes, "transport-bound")
    tail, ok = _tail_heuristic(lam, sup_phi, spectrum.n_modes)
    return HypothesisReport(lambda1, True, partial, tail, False,
                            spectrum.n_modes, "heuristic-fit")


def solve_steady_bvp(problem: SLProblem, boundary_value: float,
                     resolution: int | None = None) -> GridFunction:
    """Solve ``(p x')' - q x = 0`` with inlet datum and homogeneous exit.

    Inlet: ``b1 x(0) + b2 x'(0) = boundary_value``; exit:
    ``a1 x(1) + a2 x'(1) = 0``.  Unique solvability needs 0 outside the
    spectrum (guaranteed by a certified hypothesis, lambda_1 > 0).
    Raises :class:`SingularBVP` when the discrete system is near-singular.
    """
    m = problem.resolution if resolution is None else resolution
    diag, off, mass, lo, hi = _assemble(problem, m)
    h = 1.0 / m
    pn, _, _, ph = problem.sample(m)
    n_active = hi - lo + 1
    rhs = np.zeros(n_active)
    left_value = 0.0
    if problem.b2 == 0.0:
        left_value = boundary_value / problem.b1
        rhs[0] += ph[0] / h * left_value
    else:
        rhs[0] += -pn[0] * boundary_value / problem.b2

    ab = np.zeros((3, n_active))
    ab[0, 1:] = off[lo:hi]
    ab[1, :] = diag[lo:hi + 1]
    ab[2, :-1] = off[lo:hi]
    try:
        x_active = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularBVP("steady BVP matrix is singular") from exc
    scale = max(abs(boundary_value), 1e-30)
    if not np.all(np.isfinite(x_active)) or np.max(np.abs(x_active)) > 1e10 * scale:
        raise SingularBVP("steady BVP is near-singular (an eigenvalue is close to 0)")

    x = np.zeros(m + 1)
    x[lo:hi + 1] = x_active
    if problem.b2 == 0.0:
        x[0] = left_value
    grid = uniform_grid(m)
    return GridFunction(grid, x,
                        deriv_left=derivative_at_left(x, h),
                        deriv_right=derivative_at_right(x, h))


def steady_bvp_residual(problem: SLProblem, x: GridFunction, boundary_value: float) -> float:
    """Relative residual of the discrete two-point BVP equations."""
    m = x.resolution
    diag, off, _, lo, hi = _assemble(problem, m)
    h = 1.0 / m
    pn, _, _, ph = problem.sample(m)
    rhs = np.zeros(hi - lo + 1)
    if problem.b2 == 0.0:
        rhs[0] += ph[0] / h * (boundary_value / problem.b1)
    else:
        rhs[0] += -pn[0] * boundary_value / problem.b2
    v = x.values[lo:hi + 1]
    res = diag[lo:hi + 1] * v
    res[:-1] += off[lo:hi] * v[1:]
    res[1:] += off[lo:hi] * v[:-1]
    res -= rhs
    scale = max(np.max(np.abs(rhs)), np.max(np.abs(diag[lo:hi + 1] * v)), 1e-30)
    return float(np.max(np.abs(res)) / scale)


def weighted_norm(f: GridFunction, problem: SLProblem) -> float:
    """||f||_r by composite Simpson quadrature on the problem grid."""
    require_same_grid(f, problem.grid)
    w = simpson_weights(f.values.size)
    val = f.spacing * np.sum(w * problem.r(f.grid) * f.values ** 2)
    return math.sqrt(max(val, 0.0))


def weighted_inner(f: GridFunction, g: GridFunction, problem: SLProblem) -> float:
    require_same_grid(f, problem.grid)
    require_same_grid(g, problem.grid)
    w = simpson_weights(f.values.size)
    return float(f.spacing * np.sum(w * problem.r(f.grid) * f.values * g.values))


def fourier_coefficients(f: GridFunction, spectrum: Spectrum, problem: SLProblem) -> np.ndarray:
    """Coefficients <phi_n, f>_r for all computed modes, by Simpson quadrature."""
    require_same_grid(f, problem.grid)
    require_same_grid(f, spectrum.grid)
    w = simpson_weights(f.values.size)
    weighted = w * problem.r(f.grid) * f.values
    return f.spacing * spectrum.eigenfunctions @ weighted


def parseval_residual(f: GridFunction, coeffs: np.ndarray, problem: SLProblem) -> float:
    """|sum c_n^2 - ||f||_r^2| for the given (possibly truncated) coefficients."""
    return float(abs(np.sum(np.asarray(coeffs) ** 2) - weighted_norm(f, problem) ** 2))
