"""Seeded Monte Carlo drivers turning finite-n matrix inequalities and
convergence statements into reproducible pass/fail reports.

Finite-n inequality checks (linearization, interlacing, norm bound, atom at
zero) must hold on every trial. Convergence checks use calibrated KS
thresholds, since the underlying statements are asymptotic with no finite-n
rates.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from autocov_spectra import linalg
from autocov_spectra.ensembles import (
    EnsembleSpec,
    SeededTrial,
    build_autocov,
    build_circular,
    build_linearization,
    default_c0_bound,
    sample_entry_matrix,
)
from autocov_spectra.fixed_point import (
    ResolventParams,
    empirical_resolvent_trace,
    predicted_stieltjes,
    solve_s,
)
from autocov_spectra.limit_law import Gamma0Law

ZERO_EIGENVALUE_TOL = 1e-8

DEFAULT_THRESHOLDS = {
    "radial_ks": 0.08,
    "angular_ks": 0.1,
    "lag_ks_gap": 0.05,
    "lsv_tail_freq": 0.05,
    "resolvent_abs_error": 0.05,
    "stability_ks": 0.08,
    "hermitization_tv": 0.15,
}


@dataclass
class ExperimentConfig:
    spec: EnsembleSpec
    trials: int = 1
    z_list: list[complex] = field(default_factory=lambda: [1.0 + 0j])
    t_list: list[float] = field(default_factory=lambda: [0.3, 0.5, 1.0])
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    output_path: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.thresholds = {**DEFAULT_THRESHOLDS, **self.thresholds}


def ks_statistic(sample, cdf) -> float:
    """One-sample KS: sup |F_hat - F| with right-continuous empirical CDF."""
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    if m == 0:
        raise ValueError("empty sample")
    F = np.asarray([cdf(v) for v in x], dtype=float)
    upper = np.arange(1, m + 1) / m - F
    lower = F - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def ks_two_sample(a, b) -> float:
    """Two-sample KS distance between empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    Fa = np.searchsorted(a, grid, side="right") / a.size
    Fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(Fa - Fb)))


def _report_dict(obj) -> dict:
    out = dataclasses.asdict(obj)

    def clean(v):
        if isinstance(v, complex):
            return {"re": v.real, "im": v.imag}
        if isinstance(v, np.ndarray):
            return v.tolist()
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, list):
            return [clean(x) for x in v]
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        return v

    return {k: clean(v) for k, v in out.items()}


@dataclass
class RotationReport:
    ks: float
    count: int
    conclusive: bool


def rotation_invariance_test(eigs, min_count: int = 100) -> RotationReport:
    """KS statistic of eigenvalue angles against uniform on [0, 2 pi).

    Eigenvalues inside the zero atom (|lambda| <= 1e-8) carry no angle and
    are excluded; too few remaining angles flags the result inconclusive.
    """
    eigs = np.asarray(eigs, dtype=complex).ravel()
    nz = eigs[np.abs(eigs) > ZERO_EIGENVALUE_TOL]
    if nz.size < min_count:
        return RotationReport(ks=float("nan"), count=int(nz.size), conclusive=False)
    angles = np.mod(np.angle(nz), 2.0 * np.pi)
    ks = ks_statistic(angles, lambda a: a / (2.0 * np.pi))
    return RotationReport(ks=ks, count=int(nz.size), conclusive=True)


@dataclass
class ConvergenceReport:
    radial_ks_per_trial: list[float]
    angular_ks_per_trial: list[float]
    mean_radial_ks: float
    mean_angular_ks: float
    seeds: list[int]
    passed: bool


def esd_experiment(config: ExperimentConfig) -> ConvergenceReport:
    """Sample Y, compare the empirical radial CDF of its eigenvalues to the
    small-lag limit law, and test angular uniformity."""
    spec = config.spec
    law = Gamma0Law(spec.gamma0)
    radial_ks, angular_ks, seeds = [], [], []
    for trial_index in range(config.trials):
        trial = SeededTrial.from_master(spec.master_seed, trial_index)
        seeds.append(trial.derived_seed)
        X = sample_entry_matrix(spec, trial)
        Y = build_autocov(X, spec.k)
        eigs = linalg.eigenvalues(Y)
        radial_ks.append(ks_statistic(np.abs(eigs), law.radial_cdf))
        rot = rotation_invariance_test(eigs)
        angular_ks.append(rot.ks if rot.conclusive else float("nan"))
    mean_radial = float(np.mean(radial_ks))
    finite_ang = [a for a in angular_ks if np.isfinite(a)]
    mean_angular = float(np.mean(finite_ang)) if finite_ang else float("nan")
    passed = mean_radial <= config.thresholds["radial_ks"]
    return ConvergenceReport(
        radial_ks_per_trial=radial_ks,
        angular_ks_per_trial=angular_ks,
        mean_radial_ks=mean_radial,
        mean_angular_ks=mean_angular,
        seeds=seeds,
        passed=bool(passed),
    )


@dataclass
class TailReport:
    threshold: float
    c0_bound: float
    lsv_values: list[float]
    norm_ok_count: int
    event_count: int
    frequency: float
    passed: bool


def lsv_tail_experiment(config: ExperimentConfig, z: complex | None = None) -> TailReport:
    """Frequency of {s_N(Y - zI) <= n^(-37/22), ||X|| <= C0} over trials.

    The bound's leading constant is unspecified, so the check is one-sided
    smallness against the configured frequency threshold.
    """
    spec = config.spec
    if z is None:
        z = config.z_list[0]
    if z == 0:
        raise ValueError("z = 0 is excluded")
    threshold = spec.n ** (-37.0 / 22.0)
    c0 = default_c0_bound(spec.N, spec.n)
    lsv_values, norm_ok, events = [], 0, 0
    for trial_index in range(config.trials):
        X = sample_entry_matrix(spec, trial_index)
        Y = build_autocov(X, spec.k)
        s_min = linalg.least_singular_value(Y - z * np.eye(spec.N))
        lsv_values.append(float(s_min))
        if linalg.operator_norm(X) <= c0:
            norm_ok += 1
            if s_min <= threshold:
                events += 1
    freq = events / config.trials
    return TailReport(
        threshold=float(threshold),
        c0_bound=float(c0),
        lsv_values=lsv_values,
        norm_ok_count=norm_ok,
        event_count=events,
        frequency=float(freq),
        passed=bool(freq <= config.thresholds["lsv_tail_freq"]),
    )


@dataclass
class LinearizationReport:
    lsv_H_prime: float
    lsv_resolvent: float
    lower_bound_ok: bool
    multiset_max_gap: float
    multiset_ok: bool
    norm_H: float
    norm_budget: float
    norm_ok: bool
    passed: bool


def linearization_check(X, z: complex, k: int, tol: float = 1e-10) -> LinearizationReport:
    """Verify the three linearization facts on one sample:
    s_min(H') <= s_min(Y - zI), identical singular multisets of H and H',
    and ||H|| <= |z| + 1 + ||X||."""
    X = np.asarray(X, dtype=complex)
    N, n = X.shape
    H_prime, H = build_linearization(X, z, k)
    Y = build_autocov(X, k)
    s_Hp = linalg.singular_values(H_prime)
    s_H = linalg.singular_values(H)
    lsv_Hp = float(s_Hp[-1])
    lsv_res = linalg.least_singular_value(Y - z * np.eye(N))
    scale = max(float(s_Hp[0]), 1.0)
    lower_ok = lsv_Hp <= lsv_res + tol * scale
    gap = float(np.max(np.abs(s_H - s_Hp)))
    multiset_ok = gap <= 1e-10 * scale
    norm_H = float(s_H[0])
    budget = abs(z) + 1.0 + linalg.operator_norm(X)
    norm_ok = norm_H <= budget + tol * scale
    return LinearizationReport(
        lsv_H_prime=lsv_Hp,
        lsv_resolvent=float(lsv_res),
        lower_bound_ok=bool(lower_ok),
        multiset_max_gap=gap,
        multiset_ok=bool(multiset_ok),
        norm_H=norm_H,
        norm_budget=float(budget),
        norm_ok=bool(norm_ok),
        passed=bool(lower_ok and multiset_ok and norm_ok),
    )


@dataclass
class RankPerturbationReport:
    interlacing_ok: bool
    worst_margin: float
    diff_rank_one: bool
    log_mass_Y: float
    log_mass_Z: float
    log_mass_bound: float
    log_mass_ok: bool
    passed: bool


def _small_log_mass(s: np.ndarray, delta: float) -> float:
    """|integral_0^delta ln(lambda) d nu| = (1/N) sum_{s_i < delta} |ln s_i|."""
    small = s[s < delta]
    if small.size == 0:
        return 0.0
    return float(np.sum(np.abs(np.log(small))) / s.size)


def rank_perturbation_experiment(X, z: complex, delta: float = 0.1) -> RankPerturbationReport:
    """Compare Y and its circular variant Z built from the same X (k = 1):
    the shifted singular values interlace across the rank-one difference, and
    the small-singular-value log mass of Y - zI is dominated by its least
    term plus the Z log mass."""
    X = np.asarray(X, dtype=complex)
    N = X.shape[0]
    Y = build_autocov(X, 1)
    Z = build_circular(X)
    I = np.eye(N)
    report = linalg.perturbation_interlacing_check(Y - z * I, Z - z * I, r=1)
    diff_s = linalg.singular_values(Z - Y)
    scale = max(float(diff_s[0]), 1.0)
    rank_one = bool(diff_s.size < 2 or diff_s[1] <= linalg.RANK_TOL * scale)
    s_Y = linalg.singular_values(Y - z * I)
    s_Z = linalg.singular_values(Z - z * I)
    mass_Y = _small_log_mass(s_Y, delta)
    mass_Z = _small_log_mass(s_Z, delta)
    bound = float(np.abs(np.log(s_Y[-1])) / N + mass_Z)
    mass_ok = mass_Y <= bound + 1e-12
    return RankPerturbationReport(
        interlacing_ok=report.passed,
        worst_margin=report.worst_margin,
        diff_rank_one=rank_one,
        log_mass_Y=mass_Y,
        log_mass_Z=mass_Z,
        log_mass_bound=bound,
        log_mass_ok=bool(mass_ok),
        passed=bool(report.passed and rank_one and mass_ok),
    )


@dataclass
class HermitizationReport:
    grid_spacing: float
    total_mass: float
    tv_distance: float
    flagged_cells: int
    passed: bool


def hermitization_pipeline(config: ExperimentConfig, half_width: float | None = None,
                           h: float = 0.1, s_floor: float = 1e-12,
                           tv_block: int = 2) -> HermitizationReport:
    """Recover the eigenvalue density from log potentials on a z-grid.

    Evaluates L(z) = -(1/N) sum ln s_i(Y - zI), applies the 5-point discrete
    Laplacian scaled by -1/(2 pi), clips negatives, normalizes, and compares
    with the direct eigenvalue histogram by total variation. The comparison
    aggregates tv_block x tv_block cells first: the Laplacian spreads each
    unit charge over the nodes adjacent to it while the histogram assigns it
    to one cell, so single-cell TV measures that sub-cell smearing rather
    than the recovery error.
    """
    spec = config.spec
    X = sample_entry_matrix(spec, 0)
    Y = build_autocov(X, spec.k)
    eigs = linalg.eigenvalues(Y)
    if half_width is None:
        half_width = Gamma0Law(spec.gamma0).support_radius + 2 * h
    xs = np.arange(-half_width, half_width + h / 2, h)
    L = np.empty((xs.size, xs.size))
    flagged = 0
    I = np.eye(spec.N)
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            s = linalg.singular_values(Y - complex(x, y) * I)
            if s[-1] < s_floor:
                flagged += 1
            s = np.maximum(s, s_floor)
            L[i, j] = -float(np.mean(np.log(s)))
    lap = (L[:-2, 1:-1] + L[2:, 1:-1] + L[1:-1, :-2] + L[1:-1, 2:]
           - 4.0 * L[1:-1, 1:-1]) / (h * h)
    density = np.clip(-lap / (2.0 * np.pi), 0.0, None)
    total_mass = float(np.sum(density) * h * h)
    if total_mass > 0:
        density_norm = density / np.sum(density)
    else:
        density_norm = density
    # Histogram eigenvalues over the same interior cells.
    interior = xs[1:-1]
    edges = np.concatenate([interior - h / 2, [interior[-1] + h / 2]])
    hist, _, _ = np.histogram2d(eigs.real, eigs.imag, bins=[edges, edges])
    hist = hist / eigs.size
    b = max(1, int(tv_block))
    m = (density_norm.shape[0] // b) * b
    coarse_dens = density_norm[:m, :m].reshape(m // b, b, m // b, b).sum(axis=(1, 3))
    coarse_hist = hist[:m, :m].reshape(m // b, b, m // b, b).sum(axis=(1, 3))
    tv = float(0.5 * np.sum(np.abs(coarse_dens - coarse_hist)))
    return HermitizationReport(
        grid_spacing=float(h),
        total_mass=total_mass,
        tv_distance=tv,
        flagged_cells=flagged,
        passed=bool(tv <= config.thresholds["hermitization_tv"]),
    )


@dataclass
class LargeKReport:
    stability_ks: float
    stability_ok: bool
    resolvent_errors: list[float]
    mean_resolvent_error: float
    resolvent_ok: bool
    zero_eigs: int
    zero_required: int
    atom_ok: bool
    passed: bool


def large_k_experiment(config: ExperimentConfig) -> LargeKReport:
    """Large-lag regime (k >= n/2): ESD stability between n and 2n, resolvent
    match against the fixed-point prediction, and the zero atom for N > n."""
    spec = config.spec
    if spec.k < spec.n / 2:
        raise ValueError("large_k_experiment requires k >= n/2")

    def radial_sample(n, N, k, seed_offset):
        sub = EnsembleSpec(n=n, N=N, k=k, law=spec.law,
                           master_seed=spec.master_seed + seed_offset)
        X = sample_entry_matrix(sub, 0)
        return np.abs(linalg.eigenvalues(build_autocov(X, k)))

    r_small = radial_sample(spec.n, spec.N, spec.k, 0)
    r_big = radial_sample(2 * spec.n, 2 * spec.N, 2 * spec.k, 1)
    stability = ks_two_sample(r_small, r_big)
    stability_ok = stability <= config.thresholds["stability_ks"]

    a = 1.0 - spec.gamma1
    errors = []
    for z in config.z_list:
        for t in config.t_list:
            params = ResolventParams(z=complex(z), t=float(t),
                                     gamma0=spec.gamma0, a=a)
            pred = predicted_stieltjes(params)
            per_trial = []
            for trial_index in range(config.trials):
                X = sample_entry_matrix(spec, trial_index)
                Y = build_autocov(X, spec.k)
                per_trial.append(empirical_resolvent_trace(Y, complex(z), float(t)))
            emp = np.mean(per_trial)
            errors.append(float(abs(emp - pred)))
    mean_error = float(np.mean(errors))
    resolvent_ok = mean_error <= config.thresholds["resolvent_abs_error"]

    zero_required = max(0, spec.N - spec.n)
    if zero_required > 0:
        X = sample_entry_matrix(spec, 0)
        eigs = linalg.eigenvalues(build_autocov(X, spec.k))
        zero_eigs = int(np.count_nonzero(np.abs(eigs) <= ZERO_EIGENVALUE_TOL))
    else:
        zero_eigs = 0
    atom_ok = zero_eigs >= zero_required
    return LargeKReport(
        stability_ks=float(stability),
        stability_ok=bool(stability_ok),
        resolvent_errors=errors,
        mean_resolvent_error=mean_error,
        resolvent_ok=bool(resolvent_ok),
        zero_eigs=zero_eigs,
        zero_required=zero_required,
        atom_ok=bool(atom_ok),
        passed=bool(stability_ok and resolvent_ok and atom_ok),
    )


def write_eigenvalue_csv(path, eigs) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re_lambda", "im_lambda"])
        for lam in np.asarray(eigs, dtype=complex).ravel():
            writer.writerow([repr(lam.real), repr(lam.imag)])


def write_radial_cdf_csv(path, radii, cdf_values) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "empirical_cdf"])
        for r, c in zip(radii, cdf_values):
            writer.writerow([repr(float(r)), repr(float(c))])


def write_report_json(path, report) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_report_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
