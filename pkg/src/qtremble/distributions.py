"""Tremble densities: von Mises on circles and tori, von Mises-Fisher on spheres.

The modified Bessel function backend is implemented here (power series below
x = 15, scaled asymptotic expansion above) so results do not depend on any
platform special-function library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum import TWO_PI, StrategyParams

# Switch point between the power series and the asymptotic expansion; both
# reach <= 1e-10 relative error there.
_SERIES_CUTOFF = 15.0
# exp(x) overflows an IEEE double shortly above this.
_OVERFLOW_X = 700.0


def bessel_i(nu, x: float) -> float:
    """Modified Bessel function of the first kind I_nu(x) for nu >= 0, x >= 0.

    Uses the ascending power series for x <= 15 and the large-argument
    asymptotic expansion beyond; relative error is below 1e-10 throughout the
    supported range.  Raises OverflowError once exp(x) leaves double range
    (concentrations of practical interest stay far below that).
    """
    nu = float(nu)
    x = float(x)
    if nu < 0:
        raise ValueError("order nu must be nonnegative")
    if x < 0:
        raise ValueError("argument x must be nonnegative")
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if x > _OVERFLOW_X:
        raise OverflowError(f"I_nu({x}) exceeds double-precision range")
    if x <= _SERIES_CUTOFF:
        return _bessel_i_series(nu, x)
    return math.exp(x) * _bessel_i_asymptotic_scaled(nu, x)


def bessel_i_scaled(nu, x: float) -> float:
    """Exponentially scaled exp(-x) * I_nu(x); stays finite for any x >= 0.

    The densities below are ratios against exp(kappa), so evaluating them
    through this form keeps large concentrations representable.
    """
    nu = float(nu)
    x = float(x)
    if nu < 0 or x < 0:
        raise ValueError("nu and x must be nonnegative")
    if x <= _SERIES_CUTOFF:
        return _bessel_i_series(nu, x) * math.exp(-x)
    return _bessel_i_asymptotic_scaled(nu, x)


def _bessel_i_series(nu: float, x: float) -> float:
    half = 0.5 * x
    term = half**nu / math.gamma(nu + 1.0)
    total = term
    for k in range(1, 600):
        term *= half * half / (k * (k + nu))
        total += term
        if term < total * 1e-18:
            return total
    raise RuntimeError("Bessel series failed to converge")  # pragma: no cover


def _bessel_i_asymptotic_scaled(nu: float, x: float) -> float:
    mu = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, 60):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(term) >= prev:
            break  # divergent tail reached; stop at the optimal truncation
        total += term
        prev = abs(term)
        if abs(term) < abs(total) * 1e-17:
            break
    return total / math.sqrt(TWO_PI * x)


def vm_normalization(kappa: float) -> float:
    """Circle normalization 1 / (2*pi*I_0(kappa)); equals 1/(2*pi) at kappa = 0."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    return 1.0 / (TWO_PI * bessel_i(0, kappa))


def vm_density(theta, theta0: float, kappa: float):
    """von Mises density on the circle; vectorized over ``theta``.

    Evaluated as exp(kappa*(cos(theta-theta0) - 1)) over the scaled
    normalization, so arbitrarily sharp concentrations stay finite.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    theta = np.asarray(theta, dtype=float)
    if kappa == 0.0:
        out = np.full(theta.shape, 1.0 / TWO_PI)
        return out if out.ndim else float(out)
    scaled_norm = TWO_PI * bessel_i_scaled(0, kappa)
    out = np.exp(kappa * (np.cos(theta - theta0) - 1.0)) / scaled_norm
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TrembleSpec:
    """A tremble: von Mises product distribution centered on a pure strategy.

    ``center`` is the intended strategy, ``kappa`` the common concentration of
    the per-coordinate von Mises factors, and ``dims`` (matching
    ``center.dims``) how many torus coordinates actually tremble; inactive
    coordinates stay pinned at zero.
    """

    center: StrategyParams
    kappa: float
    dims: int = 0

    def __post_init__(self):
        if not math.isfinite(self.kappa) or self.kappa < 0:
            raise ValueError("kappa must be finite and nonnegative")
        dims = self.dims if self.dims else self.center.dims
        if dims != self.center.dims:
            raise ValueError(
                f"dims ({dims}) must match the center's active dims ({self.center.dims})"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "kappa", float(self.kappa))


def torus_density_angles(angles: np.ndarray, spec: TrembleSpec) -> np.ndarray:
    """Density of ``spec`` at angle rows (..., dims) over its active torus."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape[-1] != spec.dims:
        raise ValueError(f"expected {spec.dims} angle column(s), got {angles.shape[-1]}")
    if spec.kappa == 0.0:
        return np.full(angles.shape[:-1], (1.0 / TWO_PI) ** spec.dims)
    center = np.array(spec.center.angles[: spec.dims])
    scaled_norm = (TWO_PI * bessel_i_scaled(0, spec.kappa)) ** spec.dims
    exponent = spec.kappa * (np.cos(angles - center) - 1.0).sum(axis=-1)
    return np.exp(exponent) / scaled_norm


def torus_vm_density(point: StrategyParams, spec: TrembleSpec) -> float:
    """Product von Mises density at a torus point with matching active dims."""
    if point.dims != spec.dims:
        raise ValueError(f"point has dims {point.dims}, tremble has dims {spec.dims}")
    return float(torus_density_angles(np.array(point.active), spec))


def sphere_surface_area(p: int) -> float:
    """Surface area of the unit sphere S^(p-1) embedded in R^p."""
    return 2.0 * math.pi ** (p / 2.0) / math.gamma(p / 2.0)


def vmf_density(x: np.ndarray, x0: np.ndarray, kappa: float, p: int) -> float:
    """von Mises-Fisher density on S^(p-1) with respect to the surface measure.

    ``x`` and ``x0`` are unit vectors in R^p; ``x0`` points at the mode.  The
    normalization is kappa^(p/2-1) / ((2*pi)^(p/2) * I_(p/2-1)(kappa)), and the
    kappa = 0 case is handled analytically as the uniform density.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x.shape != (p,) or x0.shape != (p,):
        raise ValueError(f"directions must be vectors of length p = {p}")
    for vec, name in ((x, "x"), (x0, "x0")):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
            raise ValueError(f"{name} is not a unit vector")
    if kappa == 0.0:
        return 1.0 / sphere_surface_area(p)
    order = p / 2.0 - 1.0
    norm = kappa**order / ((TWO_PI) ** (p / 2.0) * bessel_i(order, kappa))
    return float(norm * math.exp(kappa * float(x @ x0)))


def sample_vm(rng: np.random.Generator, theta0: float, kappa: float, size=None):
    """Draw exact von Mises samples via Best-Fisher rejection.

    Returns a scalar angle in [-pi, pi) when ``size`` is None, otherwise an
    array of that shape.  kappa = 0 degenerates to the uniform distribution.
    The caller owns the generator: one stream per thread.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    n = 1 if size is None else int(np.prod(size))
    if kappa < 1e-10:
        draws = rng.uniform(-math.pi, math.pi, size=n)
    else:
        draws = _best_fisher(rng, theta0, kappa, n)
    draws = np.mod(draws + math.pi, TWO_PI) - math.pi
    if size is None:
        return float(draws[0])
    return draws.reshape(size)


def _best_fisher(rng: np.random.Generator, theta0: float, kappa: float, n: int) -> np.ndarray:
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)

    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(n - filled, 64)
        u1, u2, u3 = rng.uniform(size=(3, m))
        z = np.cos(math.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        accept = (c * (2.0 - c) - u2 > 0.0)
        with np.errstate(divide="ignore"):
            log_ok = ~accept & (np.log(c / u2) + 1.0 - c >= 0.0)
        accept |= log_ok
        good = f[accept]
        take = min(good.size, n - filled)
        if take:
            signs = np.where(u3[accept][:take] > 0.5, 1.0, -1.0)
            out[filled:filled + take] = theta0 + signs * np.arccos(np.clip(good[:take], -1.0, 1.0))
            filled += take
    return out


def sample_torus_angles(rng: np.random.Generator, spec: TrembleSpec, n: int) -> np.ndarray:
    """Draw ``n`` torus points from a tremble as an (n, 3) angle array.

    Active coordinates are independent von Mises draws around the center
    (drawn theta first, then alpha, then beta, so streams replay exactly for a
    fixed seed); inactive coordinates are zero.
    """
    out = np.zeros((n, 3))
    for axis in range(spec.dims):
        out[:, axis] = sample_vm(rng, spec.center.angles[axis], spec.kappa, size=n)
    return out


def sample_torus(rng: np.random.Generator, spec: TrembleSpec) -> StrategyParams:
    """Draw one strategy from a tremble distribution."""
    theta, alpha, beta = sample_torus_angles(rng, spec, 1)[0]
    return StrategyParams(theta, alpha, beta, spec.dims)
