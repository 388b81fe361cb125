"""The rotation-invariant limiting law for the small-lag regime.

The law is determined by its radial CDF, built from the increasing function
g(x) = x (1 - gamma0 + 2x)^2 / (1 + x) on [max(0, gamma0 - 1), gamma0].
For gamma0 > 1 the CDF is flat at 1 - 1/gamma0 near the origin; that mass is
represented here as an atom at radius exactly 0 (the limit is rank
deficient, so the deficiency concentrates at the origin).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

INVERSION_TOL = 1e-12


@dataclass(frozen=True)
class Gamma0Law:
    """Limiting eigenvalue law at aspect ratio gamma0 = lim N/n."""

    gamma0: float

    def __post_init__(self):
        if not 0.0 < self.gamma0 < np.inf:
            raise ValueError(f"gamma0 must be in (0, inf), got {self.gamma0}")

    @property
    def domain(self) -> tuple[float, float]:
        """Domain of g: [max(0, gamma0 - 1), gamma0]."""
        return (max(0.0, self.gamma0 - 1.0), self.gamma0)

    @property
    def support_radius(self) -> float:
        return float(np.sqrt(self.gamma0 * (self.gamma0 + 1.0)))

    @property
    def atom_mass(self) -> float:
        """Mass at radius 0; nonzero only when gamma0 > 1."""
        return max(0.0, 1.0 - 1.0 / self.gamma0)

    @property
    def inner_radius(self) -> float:
        """Upper edge of the flat CDF branch, (gamma0 - 1)^{3/2} gamma0^{-1/2}."""
        if self.gamma0 <= 1.0:
            return 0.0
        return float((self.gamma0 - 1.0) ** 1.5 / np.sqrt(self.gamma0))

    def g(self, x) -> np.ndarray | float:
        """Evaluate g on its domain."""
        lo, hi = self.domain
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr < lo - 1e-12) or np.any(x_arr > hi + 1e-12):
            raise ValueError(f"x outside [{lo}, {hi}]")
        x_arr = np.clip(x_arr, lo, hi)
        val = x_arr * (1.0 - self.gamma0 + 2.0 * x_arr) ** 2 / (1.0 + x_arr)
        return float(val) if np.isscalar(x) else val

    def g_inverse(self, y: float) -> float:
        """Invert g by monotone bracketing bisection."""
        lo, hi = self.domain
        y_lo, y_hi = self.g(lo), self.g(hi)
        if y < y_lo - 1e-12 * max(1.0, abs(y_lo)) or y > y_hi + 1e-12 * max(1.0, y_hi):
            raise ValueError(f"y={y} outside range [{y_lo}, {y_hi}]")
        y = min(max(y, y_lo), y_hi)
        if y == y_lo:
            return lo
        if y == y_hi:
            return hi
        return float(brentq(lambda x: self.g(x) - y, lo, hi, xtol=INVERSION_TOL,
                            rtol=8.881784197001252e-16))

    def radial_cdf(self, r) -> np.ndarray | float:
        """Probability of the closed ball of radius r about the origin."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr < 0):
            raise ValueError("radius must be nonnegative")
        out = np.empty_like(r_arr)
        for i, ri in enumerate(r_arr):
            if ri >= self.support_radius:
                out[i] = 1.0
            elif ri <= self.inner_radius:
                out[i] = self.atom_mass
            else:
                out[i] = self.g_inverse(ri * ri) / self.gamma0
        return float(out[0]) if np.isscalar(r) else out

    def radial_quantile(self, p) -> np.ndarray | float:
        """Smallest r with radial_cdf(r) >= p.

        Closed form on the continuous branch: CDF(r) = p solves to
        r = sqrt(g(gamma0 * p)). Probabilities inside the atom map to 0.
        """
        p_arr = np.atleast_1d(np.asarray(p, dtype=float))
        if np.any(p_arr < 0) or np.any(p_arr > 1):
            raise ValueError("p must lie in [0, 1]")
        out = np.empty_like(p_arr)
        atom = self.atom_mass
        for i, pi in enumerate(p_arr):
            if pi <= atom:
                out[i] = 0.0
            else:
                out[i] = np.sqrt(self.g(self.gamma0 * pi))
        return float(out[0]) if np.isscalar(p) else out

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        """Draw complex points: inverse-CDF radius, uniform angle."""
        if count < 1:
            raise ValueError("count must be positive")
        rng = np.random.Generator(np.random.PCG64(seed))
        radii = self.radial_quantile(rng.uniform(0.0, 1.0, count))
        angles = rng.uniform(0.0, 2.0 * np.pi, count)
        return radii * np.exp(1j * angles)

    def cdf_table(self, r_grid) -> list[tuple[float, float]]:
        return [(float(r), float(self.radial_cdf(r))) for r in r_grid]


def write_cdf_csv(path, law: Gamma0Law, r_grid) -> None:
    """Emit (r, cdf) rows for a radius grid."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "cdf"])
        for r, c in law.cdf_table(r_grid):
            writer.writerow([repr(r), repr(c)])
