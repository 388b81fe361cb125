"""Large-lag limiting resolvent: block formulas and the scalar fixed point.

At spectral parameter eta = i t the averaged diagonal resolvent trace of the
Hermitian dilation of Y - zI is purely imaginary, g11 = i s with s > 0. In
the limit s solves the scalar master relation

    (t + a s/(1+s^2)) (t s + a s^2/(1+s^2) - gamma0) + s |z|^2 = 0,

with a = lim (n-k)/n. The relation is polynomial after clearing (1+s^2)^2;
roots are tracked by continuation from the large-t asymptote
s ~ gamma0 t / (t^2 + |z|^2), which selects the resolvent branch when more
than one positive root exists.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from autocov_spectra.linalg import _as_matrix, singular_values

SOLVER_TOL = 1e-12


@dataclass(frozen=True)
class ResolventParams:
    """Point (z, t) and limit shape (gamma0, a = 1 - gamma1) for the solver."""

    z: complex
    t: float
    gamma0: float
    a: float

    def __post_init__(self):
        if self.z == 0:
            raise ValueError("z = 0 is excluded")
        if self.t <= 0:
            raise ValueError("t must be positive")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if not 0.0 < self.a <= 0.5:
            raise ValueError("a must lie in (0, 1/2] (the large-lag regime)")


@dataclass
class FixedPointSolution:
    s: float
    g12: complex
    residual: float
    multiple_roots: bool

    @property
    def g11(self) -> complex:
        return 1j * self.s


def master_relation(s: float, params: ResolventParams) -> float:
    t, a, g0 = params.t, params.a, params.gamma0
    w = a * s / (1.0 + s * s)
    return (t + w) * (t * s + w * s - g0) + s * abs(params.z) ** 2


def _master_poly(params: ResolventParams) -> np.ndarray:
    """Ascending coefficients of master_relation * (1+s^2)^2."""
    t, a, g0 = params.t, params.a, params.gamma0
    z2 = abs(params.z) ** 2
    p1 = np.array([t, a, t])
    p2 = np.array([-g0, t, a - g0, t])
    p3 = z2 * np.array([0.0, 1.0, 0.0, 2.0, 0.0, 1.0])
    poly = P.polyadd(P.polymul(p1, p2), p3)
    return poly


def _positive_roots(params: ResolventParams) -> np.ndarray:
    roots = P.polyroots(_master_poly(params))
    real = roots[np.abs(roots.imag) < 1e-9 * (1.0 + np.abs(roots.real))].real
    pos = np.unique(real[real > 0.0])
    return pos


def _refine(s: float, params: ResolventParams) -> float:
    """Polish a root of the master relation to residual <= SOLVER_TOL."""
    lo, hi = s * (1.0 - 1e-6), s * (1.0 + 1e-6)
    f_lo, f_hi = master_relation(lo, params), master_relation(hi, params)
    if f_lo * f_hi < 0:
        return float(brentq(master_relation, lo, hi, args=(params,),
                            xtol=1e-15, rtol=8.881784197001252e-16))
    # Newton fallback with a numeric derivative.
    for _ in range(50):
        f = master_relation(s, params)
        if abs(f) <= SOLVER_TOL:
            break
        h = max(1e-9, 1e-9 * s)
        df = (master_relation(s + h, params) - master_relation(s - h, params)) / (2 * h)
        if df == 0:
            break
        s -= f / df
    return s


def large_t_asymptote(params: ResolventParams) -> float:
    """Leading behaviour t (t s - gamma0) + s|z|^2 = 0 for t >> 1."""
    t = params.t
    return params.gamma0 * t / (t * t + abs(params.z) ** 2)


def solve_s(params: ResolventParams, steps_per_decade: int = 40) -> FixedPointSolution:
    """Positive solution of the master relation, selected by t-continuation.

    Starts at t_start = max(10, 10 |z|) where the asymptote is accurate and
    walks a geometric t-grid down to the target, at each step keeping the
    positive root closest to the previous one.
    """
    t_target = params.t
    t_start = max(10.0, 10.0 * abs(params.z))
    if t_target >= t_start:
        path = [t_target]
    else:
        decades = np.log10(t_start / t_target)
        count = max(2, int(np.ceil(decades * steps_per_decade)) + 1)
        path = list(np.geomspace(t_start, t_target, count))
    s_prev = large_t_asymptote(ResolventParams(params.z, path[0], params.gamma0, params.a))
    saw_multiple = False
    for t in path:
        p_t = ResolventParams(params.z, float(t), params.gamma0, params.a)
        roots = _positive_roots(p_t)
        if roots.size == 0:
            raise RuntimeError(
                f"no positive root of the master relation at t={t} "
                f"(previous s={s_prev}); relation at 0 is {master_relation(0.0, p_t)}")
        if roots.size > 1:
            saw_multiple = True
        s_prev = float(roots[np.argmin(np.abs(roots - s_prev))])
    s = _refine(s_prev, params)
    residual = abs(master_relation(s, params))
    sol = FixedPointSolution(s=s, g12=0j, residual=residual, multiple_roots=saw_multiple)
    sol.g12 = g12_of(sol, params)
    return sol


def g12_of(solution: FixedPointSolution, params: ResolventParams) -> complex:
    """Off-diagonal limit g12 = -z s / (t + a s / (1 + s^2)); g21 is its
    conjugate."""
    s = solution.s
    return -params.z * s / (params.t + params.a * s / (1.0 + s * s))


def predicted_stieltjes(params: ResolventParams,
                        solution: FixedPointSolution | None = None) -> complex:
    """Limiting Stieltjes transform of the symmetrized singular law at i t.

    The dilation trace averages the two diagonal blocks:
    (1/2N) Tr G = (n/N) g11, hence the value i s / gamma0.
    """
    if solution is None:
        solution = solve_s(params)
    return 1j * solution.s / params.gamma0


def resolvent_blocks(M, z: complex, eta: complex):
    """Blocks of ((dilation of M - zI) - eta I)^(-1) for Im eta > 0.

    G11 = eta (B B* - eta^2 I)^-1, G12 = (B B* - eta^2 I)^-1 B,
    G21 = B* (B B* - eta^2 I)^-1, G22 = eta (B* B - eta^2 I)^-1,
    with B = M - zI.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("resolvent_blocks requires a square matrix")
    if eta.imag <= 0:
        raise ValueError("eta must have positive imaginary part")
    N = M.shape[0]
    B = M - z * np.eye(N)
    core = np.linalg.inv(B @ B.conj().T - eta**2 * np.eye(N))
    core2 = np.linalg.inv(B.conj().T @ B - eta**2 * np.eye(N))
    G11 = eta * core
    G12 = core @ B
    G21 = B.conj().T @ core
    G22 = eta * core2
    return G11, G12, G21, G22


def assemble_resolvent(G11, G12, G21, G22) -> np.ndarray:
    return np.block([[G11, G12], [G21, G22]])


def empirical_resolvent_trace(M, z: complex, t: float) -> complex:
    """(1/2N) Tr of the dilation resolvent at i t, from singular values:
    (i t / N) sum_i 1 / (s_i(M - zI)^2 + t^2)."""
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("requires a square matrix")
    if t <= 0:
        raise ValueError("t must be positive")
    N = M.shape[0]
    s = singular_values(M - z * np.eye(N))
    return 1j * t / N * float(np.sum(1.0 / (s**2 + t * t)))


def write_comparison_csv(path, rows) -> None:
    """Emit solver-vs-simulation rows: (z, t, s, g12, empirical, abs error)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re_z", "im_z", "t", "s", "re_g12", "im_g12",
                         "empirical_re", "empirical_im", "abs_error"])
        for z, t, s, g12, emp, err in rows:
            writer.writerow([repr(z.real), repr(z.imag), repr(t), repr(s),
                             repr(g12.real), repr(g12.imag),
                             repr(emp.real), repr(emp.imag), repr(err)])
