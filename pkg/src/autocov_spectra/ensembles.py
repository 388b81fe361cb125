"""Entry laws, seeded sampling of X, and the ensemble matrices A, Y, Z, H, H'.

The entry laws all have mean 0 and variance 1/n. The default complex
Gaussian has independent real and imaginary parts of variance 1/(2n), so
n E[X^2] = 0 and the non-degeneracy margin c0 is 1. A real Gaussian law is
included only to exercise the degenerate (line-supported) diagnostic path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from autocov_spectra.linalg import _as_matrix

ENTRY_LAW_KINDS = (
    "complex-gaussian",
    "uniform-phase-modulus",
    "two-point-complex",
    "real-gaussian",
)

# Norm-conditioning constant: ||X|| -> 1 + sqrt(gamma0), plus slack for
# finite-n fluctuation.
def default_c0_bound(N: int, n: int) -> float:
    return 1.0 + np.sqrt(N / n) + 0.5


def mix_seed(master_seed: int, trial_index: int) -> int:
    """Derive a per-trial 64-bit seed from (master_seed, trial_index).

    splitmix64 finalizer applied to master_seed + golden-ratio increments;
    a fixed integer hash so trials shard reproducibly without coordination.
    """
    mask = (1 << 64) - 1
    z = (master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return (z ^ (z >> 31)) & mask


@dataclass(frozen=True)
class EntryLaw:
    """A complex scalar entry distribution with 1/n variance scaling.

    declared_m4 bounds n^2 E|X11|^4; declared_c0 = 1 - |n E[X11^2]| is the
    margin keeping the law off a line through the origin. A declared_c0 <= 0
    marks a law that intentionally violates that margin (real-gaussian).
    """

    kind: str = "complex-gaussian"
    declared_m4: float = 2.0
    declared_c0: float = 1.0

    def __post_init__(self):
        if self.kind not in ENTRY_LAW_KINDS:
            raise ValueError(f"unknown entry law kind {self.kind!r}")
        if not np.isfinite(self.declared_m4):
            raise ValueError("declared_m4 must be finite")

    def sample(self, rng: np.random.Generator, size, n: int) -> np.ndarray:
        """Draw entries with variance 1/n from this law."""
        if self.kind == "complex-gaussian":
            scale = 1.0 / np.sqrt(2.0 * n)
            return rng.standard_normal(size) * scale + 1j * rng.standard_normal(size) * scale
        if self.kind == "uniform-phase-modulus":
            phase = rng.uniform(0.0, 2.0 * np.pi, size)
            return np.exp(1j * phase) / np.sqrt(n)
        if self.kind == "two-point-complex":
            scale = 1.0 / np.sqrt(2.0 * n)
            re = rng.integers(0, 2, size) * 2.0 - 1.0
            im = rng.integers(0, 2, size) * 2.0 - 1.0
            return (re + 1j * im) * scale
        if self.kind == "real-gaussian":
            return rng.standard_normal(size) / np.sqrt(n) + 0j
        raise AssertionError(self.kind)


@dataclass(frozen=True)
class EnsembleSpec:
    """Dimensions (N rows, n columns), lag k, entry law and master seed."""

    n: int
    N: int
    k: int
    law: EntryLaw = field(default_factory=EntryLaw)
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.N < 1:
            raise ValueError(f"invalid dimensions N={self.N}, n={self.n}")
        if not 1 <= self.k < self.n:
            raise ValueError(f"lag k={self.k} must satisfy 1 <= k < n={self.n}")

    @property
    def gamma0(self) -> float:
        return self.N / self.n

    @property
    def gamma1(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class SeededTrial:
    """One trial in a Monte Carlo run; the derived seed is a pure hash."""

    trial_index: int
    derived_seed: int

    @classmethod
    def from_master(cls, master_seed: int, trial_index: int) -> "SeededTrial":
        return cls(trial_index=trial_index, derived_seed=mix_seed(master_seed, trial_index))


def trial_rng(spec: EnsembleSpec, trial_index: int) -> np.random.Generator:
    trial = SeededTrial.from_master(spec.master_seed, trial_index)
    return np.random.Generator(np.random.PCG64(trial.derived_seed))


def sample_entry_matrix(spec: EnsembleSpec, trial: SeededTrial | int) -> np.ndarray:
    """The N x n matrix X for one trial, bit-reproducible per (spec, trial)."""
    if isinstance(trial, int):
        trial = SeededTrial.from_master(spec.master_seed, trial)
    rng = np.random.Generator(np.random.PCG64(trial.derived_seed))
    return spec.law.sample(rng, (spec.N, spec.n), spec.n)


def shift_matrix(n: int, k: int) -> np.ndarray:
    """The n x n nilpotent k-step shift: entry (i, j) is 1 iff i = j + k."""
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    A = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - k)
    A[idx + k, idx] = 1.0
    return A


def build_autocov(X, k: int) -> np.ndarray:
    """Lag-k auto-covariance matrix Y = X A X* = sum_j x_{j+k} x_j*."""
    X = _as_matrix(X)
    n = X.shape[1]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    # Equals X @ shift_matrix(n, k) @ X.conj().T without forming A.
    return X[:, k:] @ X[:, : n - k].conj().T


def build_circular(X) -> np.ndarray:
    """Circular lag-1 variant Z = Y_1 + x_1 x_n* = X J X* (J cyclic)."""
    X = _as_matrix(X)
    if X.shape[1] < 2:
        raise ValueError("need at least two columns")
    Y1 = build_autocov(X, 1)
    return Y1 + np.outer(X[:, 0], X[:, -1].conj())


def build_linearization(X, z: complex, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The (N+n-k)-dimensional linearizations (H', H) of the resolvent.

    H' = [[z I_N, (X_{k+1}..X_n)], [(X_1..X_{n-k})*, I_{n-k}]]. H permutes
    the last n-k columns of H' (last k of the block moved to the front) when
    2k+1 <= n, and equals H' otherwise. Singular multisets agree. Requires
    z != 0.
    """
    X = _as_matrix(X)
    N, n = X.shape
    if z == 0:
        raise ValueError("z = 0 is excluded")
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    m = n - k
    H_prime = np.zeros((N + m, N + m), dtype=complex)
    H_prime[:N, :N] = z * np.eye(N)
    H_prime[:N, N:] = X[:, k:]
    H_prime[N:, :N] = X[:, :m].conj().T
    H_prime[N:, N:] = np.eye(m)
    if 2 * k + 1 > n:
        return H_prime, H_prime.copy()
    # Block-column permutation: indices m-k..m-1 first, then 0..m-k-1.
    perm = np.concatenate([np.arange(m - k, m), np.arange(m - k)])
    H = H_prime.copy()
    H[:, N:] = H_prime[:, N:][:, perm]
    return H_prime, H


def hermitize(M, z: complex) -> np.ndarray:
    """Hermitian dilation [[0, M - zI], [(M - zI)*, 0]].

    Its eigenvalue multiset is {+-s_i(M - zI)}.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("hermitize requires a square matrix")
    N = M.shape[0]
    B = M - z * np.eye(N)
    out = np.zeros((2 * N, 2 * N), dtype=complex)
    out[:N, N:] = B
    out[N:, :N] = B.conj().T
    return out


@dataclass
class MomentReport:
    """Monte Carlo moment estimates for an entry law at scale n."""

    mean: complex
    n_var: float
    abs_n_second_moment: float
    n2_fourth_moment: float
    se_second_moment: float
    violates_c2: bool


def moment_diagnostics(law: EntryLaw, n: int, sample_count: int = 100_000,
                       seed: int = 0) -> MomentReport:
    """Estimate the (C1)/(C2) moments of a law by direct sampling.

    Flags a (C2) violation when the |n E[X^2]| estimate minus three standard
    errors still exceeds 1 - declared_c0.
    """
    if sample_count < 10_000:
        raise ValueError("sample_count must be at least 10^4")
    rng = np.random.Generator(np.random.PCG64(mix_seed(seed, 0)))
    x = law.sample(rng, sample_count, n)
    mean = complex(x.mean())
    n_var = float(n * np.mean(np.abs(x - mean) ** 2))
    second = n * np.mean(x**2)
    se = float(n * np.sqrt(np.mean(np.abs(x**2 - np.mean(x**2)) ** 2) / sample_count))
    fourth = float(n**2 * np.mean(np.abs(x) ** 4))
    violates = abs(second) - 3.0 * se > 1.0 - law.declared_c0
    return MomentReport(
        mean=mean,
        n_var=n_var,
        abs_n_second_moment=float(abs(second)),
        n2_fourth_moment=fourth,
        se_second_moment=se,
        violates_c2=bool(violates),
    )


MATRIX_FORMAT_VERSION = 1


def save_matrix(path, M) -> None:
    """Write a matrix as a versioned text grid: one row per line, entries as
    're,im' pairs separated by tabs."""
    M = _as_matrix(M)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# autocov-spectra matrix v{MATRIX_FORMAT_VERSION} "
                 f"{M.shape[0]} {M.shape[1]}\n")
        for row in M:
            fh.write("\t".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row) + "\n")


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) < 6 or header[3] != f"v{MATRIX_FORMAT_VERSION}":
            raise ValueError(f"unrecognized matrix header in {path}")
        rows, cols = int(header[4]), int(header[5])
        out = np.empty((rows, cols), dtype=complex)
        for i in range(rows):
            parts = fh.readline().split("\t")
            if len(parts) != cols:
                raise ValueError(f"row {i} has {len(parts)} entries, expected {cols}")
            for j, p in enumerate(parts):
                re, im = p.split(",")
                out[i, j] = complex(float(re), float(im))
    return out
